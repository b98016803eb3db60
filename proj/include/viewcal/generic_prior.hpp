#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>

#include "viewcal/gaussian.hpp"

namespace viewcal {

/// Weighted point cloud approximating a (conditional) law.
/// `points` is dim x m; `log_weights` are log probability weights (sum of
/// exp equals one).
struct NodeSet {
    Eigen::MatrixXd points;
    Eigen::VectorXd log_weights;

    Index size() const { return points.cols(); }
};

/// How the inner y-integral of the dual is discretized.
struct ConditionalRule {
    enum class Kind { gauss_hermite, composite_legendre };
    Kind kind = Kind::gauss_hermite;
    int gauss_hermite_order = 0;  ///< 0 selects the default for the dimension
    int monte_carlo_draws = 256;  ///< used above three conditional dimensions
    std::uint64_t seed = 0x5eedULL;
    /// Composite rule (one conditional dimension only): panels of 8-point
    /// Gauss-Legendre on [-half_width, half_width] standard deviations.
    /// Suited to kinked moment functions such as call payoffs.
    int legendre_panels = 200;
    double legendre_half_width = 12.0;
};

/// Prior on (X, Y) given through evaluators.
///
/// `conditional_nodes` discretizes f(y | x) for the dual's inner integral; the
/// other members give densities and exact conditional draws.
class GenericPrior {
public:
    using JointDensity = std::function<double(const Eigen::VectorXd& x, const Eigen::VectorXd& y)>;
    using ConditionalDensity = std::function<double(const Eigen::VectorXd& y, const Eigen::VectorXd& x)>;
    using ConditionalSampler = std::function<Eigen::VectorXd(const Eigen::VectorXd& x, std::mt19937_64& rng)>;
    using ConditionalNodes = std::function<NodeSet(const Eigen::VectorXd& x)>;

    GenericPrior(Index x_dim, Index y_dim, JointDensity joint, ConditionalDensity conditional,
                 ConditionalSampler sampler, ConditionalNodes nodes);

    /// Gaussian prior on W split at k1 with Y | X Gaussian; inner nodes are a
    /// tensor Gauss-Hermite rule (64 nodes in 1-D, 24 in 2-D, 12 in 3-D) or
    /// nested Monte Carlo draws above three dimensions.
    static GenericPrior from_gaussian(const GaussianPrior<double>& w_prior, Index k1, ConditionalRule rule = {});

    Index x_dimension() const { return x_dim_; }
    Index y_dimension() const { return y_dim_; }

    double joint_density(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const { return joint_(x, y); }
    double conditional_density(const Eigen::VectorXd& y, const Eigen::VectorXd& x) const {
        return conditional_(y, x);
    }
    Eigen::VectorXd sample_conditional(const Eigen::VectorXd& x, std::mt19937_64& rng) const {
        return sampler_(x, rng);
    }
    NodeSet conditional_nodes(const Eigen::VectorXd& x) const { return nodes_(x); }
    bool uses_monte_carlo_nodes() const { return monte_carlo_nodes_; }

private:
    Index x_dim_;
    Index y_dim_;
    JointDensity joint_;
    ConditionalDensity conditional_;
    ConditionalSampler sampler_;
    ConditionalNodes nodes_;
    bool monte_carlo_nodes_ = false;
};

int default_gauss_hermite_order(Index dim);

}  // namespace viewcal
