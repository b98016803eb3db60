#include "viewcal/tail.hpp"

#include <cmath>

namespace viewcal {

std::string to_string(TailAdmissibility a) {
    switch (a) {
        case TailAdmissibility::admissible: return "admissible";
        case TailAdmissibility::inadmissible: return "inadmissible";
        case TailAdmissibility::unknown: return "unknown";
    }
    return "unknown";
}

TailAssumption check_assumption(const MarginalDensity& g) {
    switch (g.kind()) {
        case MarginalKind::student_t: {
            const auto& t = std::get<MarginalDensity::StudentT>(g.params());
            return {TailAdmissibility::admissible, t.dof + 1.0};
        }
        case MarginalKind::gaussian: return {TailAdmissibility::inadmissible, std::nullopt};
        case MarginalKind::grid: return {TailAdmissibility::unknown, std::nullopt};
    }
    return {};
}

std::vector<double> probe_schedule(double s_max, int n_points) {
    require(n_points >= 1 && s_max > 0.0, ErrorCode::InvalidArgument, "probe_schedule: bad parameters");
    std::vector<double> out;
    for (int i = 0; i < n_points; ++i) out.push_back(std::ldexp(s_max, -(n_points - 1 - i)));
    return out;
}

std::vector<double> tail_ratio_profile(const GaussianMarginalPosteriord& post, Index coord,
                                       const std::vector<double>& points) {
    require(post.k1() == 1, ErrorCode::InvalidArgument, "tail probe: the marginal view must be univariate");
    std::vector<double> out;
    for (double s : points) {
        const double log_post = posterior_marginal_y1_log(post, coord, s);
        const double log_g = post.marginal->log_density(s);
        out.push_back(std::exp(log_post - log_g));
    }
    return out;
}

TailReport tail_ratio_probe(const GaussianMarginalPosteriord& post, Index coord, std::optional<double> s_max,
                            int n_points) {
    require(post.k1() == 1, ErrorCode::InvalidArgument,
            "tail probe: the limit is established for a univariate marginal view only");
    require(coord >= 0 && coord < post.dimension() - 1, ErrorCode::InvalidArgument, "tail probe: coordinate range");
    const auto& g = *post.marginal;
    const auto assumption = check_assumption(g);
    require(assumption.status == TailAdmissibility::admissible, ErrorCode::InadmissibleTail,
            "tail probe: marginal view is " + to_string(assumption.status) + " under the tail assumption");
    const auto& sigma = post.transformed_prior.covariance();
    const double sxx = sigma(0, 0);
    const double sxy = sigma(0, 1 + coord);
    const double scale_y = std::sqrt(std::max(0.0, sigma(1 + coord, 1 + coord)));
    require(std::abs(sxy) > 1e-14 * std::sqrt(sxx) * scale_y, ErrorCode::ZeroCorrelation,
            "tail probe: sigma_xy is zero; no power-law limit to verify");

    TailReport report;
    report.alpha = *assumption.alpha;
    report.target_ratio = std::pow(std::abs(sxy / sxx), report.alpha - 1.0);
    const double scale = std::get<MarginalDensity::StudentT>(g.params()).scale;
    const auto points = probe_schedule(s_max.value_or(2048.0 * scale), n_points);
    for (double s : points) {
        double ratio = 0.0;
        try {
            ratio = tail_ratio_profile(post, coord, {s}).front();
        } catch (const Error& e) {
            if (e.code() != ErrorCode::QuadratureFailure) throw;
            report.truncated = true;
            break;
        }
        if (!std::isfinite(ratio)) {
            report.truncated = true;
            break;
        }
        report.probe_points.push_back(s);
        report.measured_ratios.push_back(ratio);
    }
    require(!report.measured_ratios.empty(), ErrorCode::QuadratureFailure, "tail probe: no stable probe point");
    report.converged = std::abs(report.measured_ratios.back() / report.target_ratio - 1.0) <= 0.05;
    return report;
}

}  // namespace viewcal
