#include "viewcal/sampling.hpp"

#include <cmath>

#include "viewcal/random.hpp"

namespace viewcal {

double SampleBatch::effective_size() const {
    if (!weights) return double(size());
    const double s = weights->sum();
    return s * s / weights->squaredNorm();
}

Eigen::VectorXd SampleBatch::mean() const {
    if (!weights) return z.colwise().mean().transpose();
    return (z.transpose() * *weights) / weights->sum();
}

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& sigma) {
    const Index k = sigma.rows();
    if (k == 0) return Eigen::MatrixXd(0, 0);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma);
    const double scale = std::max(1e-300, sigma.diagonal().cwiseAbs().maxCoeff());
    require(ldlt.info() == Eigen::Success && (ldlt.vectorD().array() >= -1e-12 * scale).all(),
            ErrorCode::SingularBlock, "psd_factor: matrix not positive semidefinite");
    const Eigen::VectorXd d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd l = ldlt.matrixL();
    Eigen::MatrixXd f = l * d.asDiagonal();
    return ldlt.transpositionsP().transpose() * f;
}

SampleBatch sample_prior(const GaussianPrior<double>& prior, std::size_t n, std::uint64_t seed) {
    const Index dim = prior.dimension();
    const Eigen::MatrixXd f = psd_factor(prior.covariance());
    SampleBatch out;
    out.seed = seed;
    out.z.resize(static_cast<Index>(n), dim);
    StreamCursor cursor(seed);
    std::normal_distribution<double> normal;
    Eigen::VectorXd u(dim);
    for (std::size_t r = 0; r < n; ++r) {
        auto& rng = cursor.at(r);
        for (Index i = 0; i < dim; ++i) u(i) = normal(rng);
        out.z.row(static_cast<Index>(r)) = (prior.mean() + f * u).transpose();
    }
    return out;
}

SampleBatch sample_posterior(const GaussianMarginalPosteriord& post, std::size_t n, std::uint64_t seed) {
    const Index dim = post.dimension();
    const Index k1 = post.k1();
    const Index k = dim - k1;
    const Eigen::MatrixXd f = psd_factor(post.conditional_covariance());
    const Eigen::MatrixXd& v_inv = post.view_map.inverse();
    const Eigen::VectorXd intercept = post.intercept();
    SampleBatch out;
    out.seed = seed;
    out.z.resize(static_cast<Index>(n), dim);
    StreamCursor cursor(seed);
    std::normal_distribution<double> normal;
    Eigen::VectorXd w(dim), u(k);
    for (std::size_t r = 0; r < n; ++r) {
        auto& rng = cursor.at(r);
        if (k1 > 0) w.head(k1) = post.marginal->sample(rng);
        for (Index i = 0; i < k; ++i) u(i) = normal(rng);
        w.tail(k) = intercept + post.gain() * w.head(k1) + f * u;
        out.z.row(static_cast<Index>(r)) = (v_inv * w).transpose();
    }
    return out;
}

SampleBatch sample_posterior(const TiltedPosterior& post, std::size_t n, std::uint64_t seed) {
    const auto& model = post.model();
    require(model.prior() != nullptr, ErrorCode::NonSampleableConditional,
            "sample_posterior: model has no conditional sampler");
    const auto& prior = *model.prior();
    const auto& g = model.marginal();
    const Index k1 = prior.x_dimension();
    const Index dim = k1 + prior.y_dimension();
    const auto& map = model.view_map();

    SampleBatch out;
    out.seed = seed;
    out.z.resize(static_cast<Index>(n), dim);
    Eigen::VectorXd log_w(static_cast<Index>(n));
    StreamCursor cursor(seed);
    Eigen::VectorXd w(dim);
    for (std::size_t r = 0; r < n; ++r) {
        auto& rng = cursor.at(r);
        const Eigen::VectorXd x = k1 > 0 ? g->sample(rng) : Eigen::VectorXd();
        const Eigen::VectorXd y = prior.sample_conditional(x, rng);
        w << x, y;
        log_w(static_cast<Index>(r)) = post.tilt(x, y) - post.log_normalizer(x);
        out.z.row(static_cast<Index>(r)) = (map ? map->backward(w) : w).transpose();
    }
    require(log_w.allFinite(), ErrorCode::NonSampleableConditional, "sample_posterior: non-finite tilt weights");
    const double shift = log_w.maxCoeff();
    Eigen::VectorXd weights = (log_w.array() - shift).exp().matrix();
    weights *= double(n) / weights.sum();
    out.weights = std::move(weights);
    const double ess = out.effective_size();
    require(ess >= std::min<double>(10.0, double(n)), ErrorCode::NonSampleableConditional,
            "sample_posterior: importance weights collapsed (effective size " + std::to_string(ess) + ")");
    return out;
}

}  // namespace viewcal
