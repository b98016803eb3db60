#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "viewcal/dual.hpp"
#include "viewcal/generic_prior.hpp"
#include "viewcal/marginal.hpp"
#include "viewcal/newton.hpp"

namespace viewcal {

/// Convex-hull membership of c among the columns of `points` (k x n).
///
/// Coordinates are scaled by the per-coordinate sample spread. c is interior
/// when every vertex of the cross-polytope c +- rel_tol * spread_i * e_i lies
/// in the hull, boundary when c does but some vertex does not, and outside
/// otherwise. k = 1 uses the sample range, k = 2 the monotone-chain polygon,
/// larger k a phase-one simplex feasibility problem.
ExistenceStatus hull_membership(const Eigen::MatrixXd& points, const Eigen::VectorXd& c, double rel_tol = 1e-6);

/// Feasibility of c = sum_j w_j p_j with w on the simplex (phase-one simplex).
bool in_convex_hull_lp(const Eigen::MatrixXd& points, const Eigen::VectorXd& c);

/// h-images (k x n) of draws X ~ g, Y ~ f(. | X).
Eigen::MatrixXd sample_h_images(const GenericPrior& prior, const std::optional<MarginalDensity>& marginal,
                                const std::vector<MomentFunction>& moments, std::size_t n, std::uint64_t seed);

ExistenceStatus existence_check(const GenericPrior& prior, const std::optional<MarginalDensity>& marginal,
                                const std::vector<MomentFunction>& moments, const Eigen::VectorXd& targets,
                                std::size_t n_samples, std::uint64_t seed, double rel_tol = 1e-6);

/// Sampled E_g[Cov(h | X)] at lambda = 0 from paired conditional draws, and
/// its smallest eigenvalue.
struct IndependenceReport {
    Eigen::MatrixXd covariance;
    double min_eigenvalue = 0.0;
};
IndependenceReport independence_check(const GenericPrior& prior, const std::optional<MarginalDensity>& marginal,
                                      const std::vector<MomentFunction>& moments, std::size_t n_samples,
                                      std::uint64_t seed);

/// Same quantity on a discretized model (Hessian of the dual at zero).
double independence_check(const TiltedModel& model);

}  // namespace viewcal
