#include "viewcal/gaussian_analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "viewcal/quadrature.hpp"

namespace viewcal {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

double posterior_log_density_w(const GaussianMarginalPosteriord& post, const Eigen::VectorXd& w) {
    const Index k1 = post.k1();
    require(w.size() == post.dimension(), ErrorCode::InvalidArgument, "posterior density: dimension mismatch");
    const Eigen::VectorXd x = w.head(k1);
    const Eigen::VectorXd y = w.tail(w.size() - k1);
    double log_g = 0.0;
    if (k1 > 0) {
        log_g = post.marginal->log_density(x);
        if (!std::isfinite(log_g)) return kNegInf;
    }
    if (y.size() == 0) return log_g;
    const GaussianPrior<double> conditional(post.conditional_mean(x), post.conditional_covariance());
    return log_g + conditional.log_density(y);
}

double posterior_log_density_z(const GaussianMarginalPosteriord& post, const Eigen::VectorXd& z) {
    require(z.size() == post.dimension(), ErrorCode::InvalidArgument, "posterior density: dimension mismatch");
    return posterior_log_density_w(post, post.view_map.forward(z)) + std::log(post.view_map.abs_det());
}

double posterior_density_z(const GaussianMarginalPosteriord& post, const Eigen::VectorXd& z) {
    return std::exp(posterior_log_density_z(post, z));
}

double posterior_linear_marginal_log(const GaussianMarginalPosteriord& post, const Eigen::VectorXd& l_w, double s,
                                     double rel_tol) {
    require(post.k1() == 1, ErrorCode::InvalidArgument, "posterior marginal: requires a one-dimensional X block");
    require(l_w.size() == post.dimension(), ErrorCode::InvalidArgument, "posterior marginal: functional size");
    const auto& g = *post.marginal;
    const Eigen::VectorXd l_y = l_w.tail(l_w.size() - 1);
    // l^T W | X = x  ~  N(c0 + c1 x, var)
    const double c0 = l_y.dot(post.intercept());
    const double c1 = l_w(0) + (l_y.size() > 0 ? l_y.dot(post.gain().col(0)) : 0.0);
    const double var = l_y.size() > 0 ? l_y.dot(post.conditional_covariance() * l_y) : 0.0;
    const double degenerate = 1e-24 * std::max(1.0, l_w.squaredNorm());
    if (!(var > degenerate * std::max(1.0, post.conditional_covariance().cwiseAbs().maxCoeff()))) {
        require(c1 != 0.0, ErrorCode::InvalidArgument, "posterior marginal: degenerate functional");
        return g.log_density((s - c0) / c1) - std::log(std::abs(c1));
    }
    const double sd = std::sqrt(var);

    auto log_integrand = [&](double x) { return normal_log_pdf(s, c0 + c1 * x, var) + g.log_density(x); };

    // Intervals: bulk of g, and the window where the Gaussian kernel peaks.
    auto [lo, hi] = g.support();
    std::vector<std::pair<double, double>> pieces;
    std::vector<double> interior_breaks;
    if (c1 != 0.0) {
        const double peak = (s - c0) / c1;
        const double half = 40.0 * sd / std::abs(c1);
        const double plo = peak - half, phi = peak + half;
        if (phi < lo || plo > hi) {
            pieces = {{lo, hi}, {plo, phi}};
        } else {
            pieces = {{std::min(lo, plo), std::max(hi, phi)}};
        }
        interior_breaks.push_back(peak);
    } else {
        pieces = {{lo, hi}};
    }
    interior_breaks.push_back(g.mean()(0));
    if (g.kind() != MarginalKind::grid) {
        std::sort(pieces.begin(), pieces.end());
        pieces.front().first = kNegInf;
        pieces.back().second = -kNegInf;
    }

    // Reference level for scaling.
    double ref = kNegInf;
    for (auto [a, b] : pieces) {
        const double fa = std::isfinite(a) ? a : std::min(b, interior_breaks.front()) - 64.0 * (1.0 + sd);
        const double fb = std::isfinite(b) ? b : std::max(a, interior_breaks.front()) + 64.0 * (1.0 + sd);
        for (int i = 0; i <= 64; ++i) ref = std::max(ref, log_integrand(fa + (fb - fa) * i / 64.0));
    }
    for (double x : interior_breaks) ref = std::max(ref, log_integrand(x));
    if (!std::isfinite(ref)) return kNegInf;

    auto scaled = [&](double x) {
        const double v = log_integrand(x) - ref;
        return v < -745.0 ? 0.0 : std::exp(v);
    };

    double total = 0.0;
    for (auto [a, b] : pieces) {
        std::vector<double> breaks{a};
        for (double x : interior_breaks)
            if (x > a && x < b) breaks.push_back(x);
        if (const auto* grid = std::get_if<MarginalDensity::Grid>(&g.params())) {
            for (double k : grid->knots)
                if (k > a && k < b) breaks.push_back(k);
        }
        breaks.push_back(b);
        std::sort(breaks.begin(), breaks.end());
        total += integrate_piecewise(scaled, breaks, rel_tol, 1e-300).value;
    }
    if (!(total > 0.0)) return kNegInf;
    return ref + std::log(total);
}

double posterior_marginal_y1_log(const GaussianMarginalPosteriord& post, Index coord, double s, double rel_tol) {
    require(coord >= 0 && coord < post.dimension() - post.k1(), ErrorCode::InvalidArgument,
            "posterior_marginal_y1: coordinate out of range");
    Eigen::VectorXd l = Eigen::VectorXd::Zero(post.dimension());
    l(post.k1() + coord) = 1.0;
    return posterior_linear_marginal_log(post, l, s, rel_tol);
}

double posterior_marginal_y1(const GaussianMarginalPosteriord& post, Index coord, double s, double rel_tol) {
    return std::exp(posterior_marginal_y1_log(post, coord, s, rel_tol));
}

double posterior_marginal_z(const GaussianMarginalPosteriord& post, Index j, double s, double rel_tol) {
    require(j >= 0 && j < post.dimension(), ErrorCode::InvalidArgument, "posterior_marginal_z: index out of range");
    const Eigen::VectorXd l_w = post.view_map.inverse().row(j).transpose();
    return std::exp(posterior_linear_marginal_log(post, l_w, s, rel_tol));
}

double prior_linear_density(const GaussianPrior<double>& prior, const Eigen::VectorXd& l_z, double s) {
    const double mean = l_z.dot(prior.mean());
    const double var = l_z.dot(prior.covariance() * l_z);
    return std::exp(normal_log_pdf(s, mean, var));
}

}  // namespace viewcal
