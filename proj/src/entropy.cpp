#include "viewcal/entropy.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "viewcal/quadrature.hpp"

namespace viewcal {
namespace {

// p log(p / q) from log densities; DivergentEntropy where q vanishes under p.
double kl_term(double log_p, double log_q) {
    if (!(log_p > -745.0)) return 0.0;
    if (!std::isfinite(log_q)) fail(ErrorCode::DivergentEntropy, "reference density vanishes where p > 0");
    return std::exp(log_p) * (log_p - log_q);
}

double gaussian_kl(const Eigen::VectorXd& m0, const Eigen::MatrixXd& s0, const Eigen::VectorXd& m1,
                   const Eigen::MatrixXd& s1) {
    const Index k = m0.size();
    SpdFactor<double> f1(s1, ErrorCode::SingularBlock, "relative entropy: singular prior block");
    SpdFactor<double> f0(s0, ErrorCode::DivergentEntropy, "relative entropy: singular marginal view");
    const Eigen::VectorXd d = m1 - m0;
    const double trace = f1.solve(s0).trace();
    return 0.5 * (trace + d.dot(f1.solve(d)) - double(k) + f1.log_det() - f0.log_det());
}

}  // namespace

double relative_entropy_discrete(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    require(p.size() == q.size(), ErrorCode::InvalidArgument, "relative_entropy_discrete: size mismatch");
    CompensatedSum sum;
    for (Index i = 0; i < p.size(); ++i) {
        if (p(i) <= 0.0) continue;
        if (!(q(i) > 0.0)) fail(ErrorCode::DivergentEntropy, "reference probability is zero where p > 0");
        sum.add(p(i) * std::log(p(i) / q(i)));
    }
    return sum.value();
}

double relative_entropy_1d(const LogDensity1& log_p, const LogDensity1& log_q, double lo, double hi,
                           double rel_tol) {
    auto f = [&](double x) { return kl_term(log_p(x), log_q(x)); };
    return integrate_adaptive(f, lo, hi, rel_tol, 1e-14).value;
}

double relative_entropy_2d(const LogDensity2& log_p, const LogDensity2& log_q, Eigen::Vector2d lo, Eigen::Vector2d hi,
                           double rel_tol) {
    auto outer = [&](double x) {
        auto inner = [&](double y) { return kl_term(log_p(x, y), log_q(x, y)); };
        return integrate_adaptive(inner, lo(1), hi(1), rel_tol, 1e-14).value;
    };
    return integrate_adaptive(outer, lo(0), hi(0), rel_tol, 1e-13).value;
}

double relative_entropy_samples(const Eigen::MatrixXd& samples, const std::optional<Eigen::VectorXd>& weights,
                                const LogDensityN& log_p, const LogDensityN& log_q) {
    require(samples.cols() > 0, ErrorCode::InvalidArgument, "relative_entropy_samples: no samples");
    CompensatedSum sum;
    double total = 0.0;
    for (Index j = 0; j < samples.cols(); ++j) {
        const double w = weights ? (*weights)(j) : 1.0;
        if (w == 0.0) continue;
        const Eigen::VectorXd s = samples.col(j);
        const double lq = log_q(s);
        if (!std::isfinite(lq)) fail(ErrorCode::DivergentEntropy, "reference density vanishes at a sample");
        sum.add(w * (log_p(s) - lq));
        total += w;
    }
    return sum.value() / total;
}

double marginal_relative_entropy(const MarginalDensity& g, const Eigen::VectorXd& prior_mean,
                                 const Eigen::MatrixXd& prior_covariance) {
    require(g.dimension() == prior_mean.size(), ErrorCode::InvalidArgument,
            "marginal_relative_entropy: dimension mismatch");
    if (const auto* p = std::get_if<MarginalDensity::Gaussian>(&g.params())) {
        return gaussian_kl(p->mean, p->covariance, prior_mean, prior_covariance);
    }
    const double mu = prior_mean(0);
    const double var = prior_covariance(0, 0);
    require(var > 0.0, ErrorCode::SingularBlock, "marginal_relative_entropy: degenerate prior marginal");
    auto term = [&](double x) { return kl_term(g.log_density(x), normal_log_pdf(x, mu, var)); };
    if (const auto* grid = std::get_if<MarginalDensity::Grid>(&g.params())) {
        return integrate_piecewise(term, grid->knots, 1e-10, 1e-14).value;
    }
    // Student-t: x = loc + scale tan(theta) maps the real line to (-pi/2, pi/2).
    const auto& t = std::get<MarginalDensity::StudentT>(g.params());
    auto mapped = [&](double theta) {
        const double c = std::cos(theta);
        return term(t.location + t.scale * std::tan(theta)) * t.scale / (c * c);
    };
    const double h = std::numbers::pi / 2;
    const std::vector<double> breaks{-h, -h / 2, 0.0, h / 2, h};
    return integrate_piecewise(mapped, breaks, 1e-10, 1e-14).value;
}

double relative_entropy(const GaussianMarginalPosteriord& post) {
    const Index k1 = post.k1();
    double marginal = 0.0;
    if (k1 > 0) {
        const auto& mu = post.transformed_prior.mean();
        const auto& cov = post.transformed_prior.covariance();
        marginal = marginal_relative_entropy(*post.marginal, mu.head(k1), cov.topLeftCorner(k1, k1));
    }
    const Index m = post.lambda.size();
    const Eigen::MatrixXd s_cc = post.conditional_covariance().topLeftCorner(m, m);
    return marginal + 0.5 * post.lambda.dot(s_cc * post.lambda);
}

double relative_entropy(const TiltedPosterior& post, double marginal_divergence) {
    const auto state = post.model().evaluate(post.lambda());
    return marginal_divergence - state.value + post.lambda().dot(state.gradient);
}

}  // namespace viewcal
