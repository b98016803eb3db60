#include "viewcal/pricing.hpp"

#include <cmath>

#include "viewcal/quadrature.hpp"

namespace viewcal {

double call_on_log_return(double s0, double strike, double log_return) {
    return std::max(0.0, s0 * std::exp(log_return) - strike);
}

namespace {

void check_payoff(double v) {
    if (!std::isfinite(v)) fail(ErrorCode::NonIntegrablePayoff, "payoff is not finite at a quadrature node");
}

}  // namespace

PriceResult price_option(const TiltedPosterior& post, const MomentFunction& payoff, double discount) {
    auto checked = [&payoff](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        const double v = payoff(x, y);
        check_payoff(v);
        return v;
    };
    const double e = post.expectation(checked);
    if (!std::isfinite(e)) fail(ErrorCode::NonIntegrablePayoff, "posterior expectation of the payoff diverges");
    return {std::exp(-discount) * e, 0.0, "quadrature"};
}

PriceResult price_option(const GaussianMarginalPosteriord& post, const FactorFunction& payoff, double discount,
                         std::size_t samples, std::uint64_t seed) {
    const Index dim = post.dimension();
    const Index k1 = post.k1();
    if (dim - k1 == 1 && k1 <= 1) {
        const double sd = std::sqrt(std::max(0.0, post.conditional_covariance()(0, 0)));
        const TensorRule inner = normal_legendre_rule(200, 12.0);
        const Eigen::VectorXd inner_w = inner.log_weights.array().exp().matrix();
        OuterNodes outer;
        if (k1 == 1) {
            outer = post.marginal->outer_nodes(10000);
        } else {
            outer.points.resize(0, 1);
            outer.weights = Eigen::VectorXd::Ones(1);
        }
        const Eigen::VectorXd intercept = post.intercept();
        const Eigen::MatrixXd& v_inv = post.view_map.inverse();
        CompensatedSum total;
        Eigen::VectorXd w(dim);
        for (Index j = 0; j < outer.points.cols(); ++j) {
            if (outer.weights(j) == 0.0) continue;
            const Eigen::VectorXd x = outer.points.col(j);
            const double m = intercept(0) + (k1 > 0 ? post.gain().row(0).dot(x) : 0.0);
            double inner_sum = 0.0;
            for (Index c = 0; c < inner.points.cols(); ++c) {
                w.head(k1) = x;
                w(k1) = m + sd * inner.points(0, c);
                const double v = payoff(v_inv * w);
                check_payoff(v);
                inner_sum += inner_w(c) * v;
            }
            total.add(outer.weights(j) * inner_sum);
        }
        return {std::exp(-discount) * total.value(), 0.0, "quadrature"};
    }
    return price_option(sample_posterior(post, samples, seed), payoff, discount);
}

PriceResult price_option(const SampleBatch& batch, const FactorFunction& payoff, double discount) {
    const Index n = batch.size();
    require(n > 1, ErrorCode::InsufficientSamples, "price_option: need at least two draws");
    CompensatedSum sum;
    double total_w = 0.0;
    for (Index i = 0; i < n; ++i) {
        const double v = payoff(batch.z.row(i).transpose());
        check_payoff(v);
        const double w = batch.weight(i);
        sum.add(w * v);
        total_w += w;
    }
    const double mean = sum.value() / total_w;
    // Self-normalized estimator variance.
    double var = 0.0;
    for (Index i = 0; i < n; ++i) {
        const double d = batch.weight(i) * (payoff(batch.z.row(i).transpose()) - mean);
        var += d * d;
    }
    const double se = std::sqrt(var) / total_w;
    const double scale = std::exp(-discount);
    return {scale * mean, scale * se, "monte_carlo"};
}

}  // namespace viewcal
