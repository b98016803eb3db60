#pragma once

// Dual function of the calibration problem
//
//   F(lambda) = E_g[ log E_f[ exp(lambda^T h(X, Y)) | X ] ] - lambda^T c
//
// with gradient E_lambda[h] - c and Hessian E_g[Cov_lambda(h | X)].

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "viewcal/gaussian.hpp"
#include "viewcal/generic_prior.hpp"
#include "viewcal/marginal.hpp"
#include "viewcal/views.hpp"

namespace viewcal {

struct DualState {
    Eigen::VectorXd lambda;
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
};

class DualProblem {
public:
    virtual ~DualProblem() = default;
    virtual Index dimension() const = 0;
    virtual DualState evaluate(const Eigen::VectorXd& lambda) const = 0;
    virtual const Eigen::VectorXd& targets() const = 0;
};

/// Closed form for a Gaussian prior with h_i = Y_i (moment coordinates):
/// F = lambda^T (b - c) + lambda^T S lambda / 2 with b = E_g-averaged
/// conditional mean and S the conditional covariance of the moment block.
class GaussianLinearDual final : public DualProblem {
public:
    GaussianLinearDual(const GaussianPrior<double>& z_prior, const ViewSet& views);
    GaussianLinearDual(Eigen::VectorXd averaged_mean, Eigen::MatrixXd conditional_covariance,
                       Eigen::VectorXd targets);

    Index dimension() const override { return targets_.size(); }
    DualState evaluate(const Eigen::VectorXd& lambda) const override;
    const Eigen::VectorXd& targets() const override { return targets_; }

private:
    Eigen::VectorXd averaged_mean_;
    Eigen::MatrixXd covariance_;
    Eigen::VectorXd targets_;
};

/// Moment function in transformed coordinates (x, y).
using MomentFunction = std::function<double(const Eigen::VectorXd& x, const Eigen::VectorXd& y)>;

/// Per-node conditional statistics under the tilt.
struct ConditionalStats {
    double log_normalizer = 0.0;   ///< log E_f[exp(lambda^T h) | x]
    Eigen::VectorXd tilted_weights;  ///< probabilities of the inner nodes under f_lambda(. | x)
};

/// Discretized tilted model: outer nodes for X ~ g, and for every outer node
/// a conditional node set for Y | X under the prior. Moment values are
/// precomputed so dual evaluations are matrix work only.
class TiltedModel final : public DualProblem {
public:
    TiltedModel(OuterNodes outer, std::vector<NodeSet> conditionals, std::vector<MomentFunction> moments,
                Eigen::VectorXd targets);

    /// Discretizes a generic prior: outer nodes from g (grid knots or
    /// `outer_count` quasi-random quantile points), inner nodes from
    /// prior.conditional_nodes(x). With no X block a single outer node is used.
    static std::shared_ptr<TiltedModel> from_prior(std::shared_ptr<const GenericPrior> prior,
                                                   const std::optional<MarginalDensity>& marginal,
                                                   std::vector<MomentFunction> moments, Eigen::VectorXd targets,
                                                   std::size_t outer_count = 10000);

    /// Gaussian prior on Z with a view set (linear or not); moment functions
    /// are evaluated through the view map.
    static std::shared_ptr<TiltedModel> from_views(const GaussianPrior<double>& z_prior, const ViewSet& views,
                                                   ConditionalRule rule = {}, std::size_t outer_count = 10000);

    Index dimension() const override { return targets_.size(); }
    DualState evaluate(const Eigen::VectorXd& lambda) const override;
    const Eigen::VectorXd& targets() const override { return targets_; }

    Index outer_size() const { return outer_.points.cols(); }
    const OuterNodes& outer() const { return outer_; }
    const NodeSet& conditional(Index j) const { return conditionals_[static_cast<std::size_t>(j)]; }
    const Eigen::MatrixXd& moment_values(Index j) const { return moment_values_[static_cast<std::size_t>(j)]; }
    const std::vector<MomentFunction>& moments() const { return moments_; }

    ConditionalStats conditional_stats(Index j, const Eigen::VectorXd& lambda) const;

    /// E_lambda[r(X, Y)] over the discretization.
    double expectation(const MomentFunction& r, const Eigen::VectorXd& lambda) const;

    /// Same model with different targets (moment values are shared).
    std::shared_ptr<TiltedModel> with_targets(Eigen::VectorXd targets) const;

    /// Optional: prior used to build the model (needed off-node).
    std::shared_ptr<const GenericPrior> prior() const { return prior_; }
    const std::optional<MarginalDensity>& marginal() const { return marginal_; }
    const std::optional<LinearViewMap<double>>& view_map() const { return view_map_; }

private:
    OuterNodes outer_;
    std::vector<NodeSet> conditionals_;
    std::vector<MomentFunction> moments_;
    std::vector<Eigen::MatrixXd> moment_values_;  // k x m_j per outer node
    Eigen::VectorXd targets_;
    std::shared_ptr<const GenericPrior> prior_;
    std::optional<MarginalDensity> marginal_;
    std::optional<LinearViewMap<double>> view_map_;
};

/// Moment functions in (x, y) coordinates for a view set.
std::vector<MomentFunction> moment_functions(const ViewSet& views);

}  // namespace viewcal
