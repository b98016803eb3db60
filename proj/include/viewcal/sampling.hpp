#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>

#include "viewcal/gaussian_analytic.hpp"
#include "viewcal/posterior.hpp"

namespace viewcal {

/// Draws in original factor coordinates, one row per draw.
struct SampleBatch {
    Eigen::MatrixXd z;  ///< n x N
    std::uint64_t seed = 0;
    std::optional<Eigen::VectorXd> weights;  ///< importance weights with mean one

    Index size() const { return z.rows(); }
    Index dimension() const { return z.cols(); }
    double weight(Index i) const { return weights ? (*weights)(i) : 1.0; }
    /// Kish effective sample size.
    double effective_size() const;
    /// Weighted mean of each column.
    Eigen::VectorXd mean() const;
};

SampleBatch sample_prior(const GaussianPrior<double>& prior, std::size_t n, std::uint64_t seed);

/// X ~ g, then Y | X exactly Gaussian; mapped back through the view map.
SampleBatch sample_posterior(const GaussianMarginalPosteriord& post, std::size_t n, std::uint64_t seed);

/// X ~ g, Y ~ f(. | X) under the prior, weighted by the normalized tilt.
/// Fails with NonSampleableConditional when the weights collapse.
SampleBatch sample_posterior(const TiltedPosterior& post, std::size_t n, std::uint64_t seed);

/// F with F F^T = sigma for a PSD sigma (pivoted LDLT).
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& sigma);

}  // namespace viewcal
