#include "viewcal/sensitivity.hpp"

#include <cmath>

#include "viewcal/quadrature.hpp"

namespace viewcal {
namespace {

Eigen::MatrixXd invert_v(const Eigen::MatrixXd& v) {
    if (v.rows() == 0) return Eigen::MatrixXd(0, 0);
    SpdFactor<double> chol(v, ErrorCode::SingularV, "sensitivities: V is singular (dependent views)");
    return symmetrized<double>(chol.solve(Eigen::MatrixXd::Identity(v.rows(), v.cols())));
}

}  // namespace

SensitivityReport sensitivities(const TiltedPosterior& post, const MomentFunction& r,
                                std::optional<MarginalParameter> alpha) {
    const auto& model = post.model();
    const Index k = model.dimension();
    const auto& lambda = post.lambda();
    const auto& outer = model.outer();
    if (alpha) {
        require(model.marginal().has_value() && model.marginal()->dimension() == 1, ErrorCode::InvalidArgument,
                "sensitivities: d/dalpha needs a univariate marginal view");
    }
    SensitivityReport out;
    out.cov_r_h = Eigen::VectorXd::Zero(k);
    out.v = Eigen::MatrixXd::Zero(k, k);
    CompensatedSum value, d_alpha;
    for (Index j = 0; j < model.outer_size(); ++j) {
        const double w = outer.weights(j);
        if (w == 0.0) continue;
        const auto stats = model.conditional_stats(j, lambda);
        const auto& nodes = model.conditional(j);
        const auto& h = model.moment_values(j);
        const Eigen::VectorXd x = outer.points.col(j);
        Eigen::VectorXd rv(nodes.size());
        for (Index c = 0; c < nodes.size(); ++c) rv(c) = r(x, nodes.points.col(c));
        const Eigen::VectorXd& p = stats.tilted_weights;
        const double r_mean = p.dot(rv);
        const Eigen::VectorXd h_mean = h * p;
        const Eigen::VectorXd r_c = rv.array() - r_mean;
        const Eigen::MatrixXd h_c = h.colwise() - h_mean;
        out.cov_r_h.noalias() += w * (h_c * p.asDiagonal() * r_c);
        out.v.noalias() += w * (h_c * p.asDiagonal() * h_c.transpose());
        value.add(w * r_mean);
        if (alpha) d_alpha.add(w * r_mean * model.marginal()->d_log_density(x(0), *alpha));
    }
    out.v = symmetrized<double>(out.v);
    out.value = value.value();
    out.u = invert_v(out.v);
    out.d_pi_d_c = out.u * out.cov_r_h;
    if (alpha) out.d_pi_d_alpha = d_alpha.value();
    return out;
}

SensitivityReport sensitivities(const GaussianMarginalPosteriord& post, const Eigen::VectorXd& l_w,
                                std::optional<MarginalParameter> alpha) {
    const Index k1 = post.k1();
    const Index m = post.lambda.size();
    require(l_w.size() == post.dimension(), ErrorCode::InvalidArgument, "sensitivities: functional size");
    const Eigen::VectorXd l_y = l_w.tail(post.dimension() - k1);
    const Eigen::MatrixXd& s = post.conditional_covariance();
    SensitivityReport out;
    out.value = l_w.dot(post.mean_w());
    out.cov_r_h = (s * l_y).head(m);
    out.v = s.topLeftCorner(m, m);
    out.u = invert_v(out.v);
    out.d_pi_d_c = out.u * out.cov_r_h;
    if (alpha) {
        require(k1 == 1, ErrorCode::InvalidArgument, "sensitivities: d/dalpha needs a univariate marginal view");
        const auto& g = *post.marginal;
        // E[r | X = x] = a0 + a1 x; d/dalpha of its g-average with lambda fixed.
        const double a0 = l_y.dot(post.intercept());
        const double a1 = l_w(0) + l_y.dot(post.gain().col(0));
        auto integrand = [&](double x) {
            const double d = g.density(x);
            return d > 0.0 ? (a0 + a1 * x) * d * g.d_log_density(x, *alpha) : 0.0;
        };
        auto [lo, hi] = g.support();
        std::vector<double> breaks{lo, hi};
        if (const auto* grid = std::get_if<MarginalDensity::Grid>(&g.params())) breaks = grid->knots;
        else breaks = {lo, g.mean()(0), hi};
        out.d_pi_d_alpha = integrate_piecewise(integrand, breaks, 1e-10, 1e-14).value;
    }
    return out;
}

}  // namespace viewcal
