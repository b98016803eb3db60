#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>

#include "viewcal/gaussian_analytic.hpp"
#include "viewcal/posterior.hpp"

namespace viewcal {

using LogDensity1 = std::function<double(double)>;
using LogDensity2 = std::function<double(double, double)>;
using LogDensityN = std::function<double(const Eigen::VectorXd&)>;

/// D(p || q) for probability vectors on a common support.
double relative_entropy_discrete(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

/// D(p || q) = int p log(p / q) on [lo, hi] by adaptive quadrature.
double relative_entropy_1d(const LogDensity1& log_p, const LogDensity1& log_q, double lo, double hi,
                           double rel_tol = 1e-10);

/// Same on a rectangle, nested adaptive quadrature.
double relative_entropy_2d(const LogDensity2& log_p, const LogDensity2& log_q, Eigen::Vector2d lo, Eigen::Vector2d hi,
                           double rel_tol = 1e-8);

/// Importance-sampling estimate from draws of p (columns of `samples`).
double relative_entropy_samples(const Eigen::MatrixXd& samples, const std::optional<Eigen::VectorXd>& weights,
                                const LogDensityN& log_p, const LogDensityN& log_q);

/// D(g || f_X) for a marginal view against the prior's X-marginal N(mean, cov).
double marginal_relative_entropy(const MarginalDensity& g, const Eigen::VectorXd& prior_mean,
                                 const Eigen::MatrixXd& prior_covariance);

/// Posterior-to-prior relative entropy of the closed-form posterior:
/// D(g || f_X) + lambda^T S_cc lambda / 2 (the conditional part is a mean shift).
double relative_entropy(const GaussianMarginalPosteriord& post);

/// Generic posterior: D(g || f_X) - F(lambda), with D(g || f_X) supplied.
double relative_entropy(const TiltedPosterior& post, double marginal_divergence);

}  // namespace viewcal
