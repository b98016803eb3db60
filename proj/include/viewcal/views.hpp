#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "viewcal/gaussian.hpp"
#include "viewcal/marginal.hpp"

namespace viewcal {

/// Payoff / moment function of the original factor vector z.
using FactorFunction = std::function<double(const Eigen::VectorXd& z)>;

/// E[h] = target, where h is either a transformed coordinate W_i = (V z)_i
/// or an arbitrary function of z.
struct MomentView {
    std::optional<Index> coordinate;  ///< index into W = V z, k1 <= i < k2
    FactorFunction function;
    double target = 0.0;
    std::string name;

    static MomentView on_coordinate(Index i, double target, std::string name = {});
    static MomentView on_function(FactorFunction h, double target, std::string name = {});

    bool is_linear() const { return coordinate.has_value(); }
};

/// Marginal view on the X block plus moment views.
class ViewSet {
public:
    ViewSet(LinearViewMap<double> map, std::optional<MarginalDensity> marginal, std::vector<MomentView> moments);

    const LinearViewMap<double>& view_map() const { return map_; }
    const std::optional<MarginalDensity>& marginal() const { return marginal_; }
    const std::vector<MomentView>& moments() const { return moments_; }
    Index moment_count() const { return static_cast<Index>(moments_.size()); }

    /// True when every moment view is a coordinate of W; then the views are
    /// exactly E[W_i] = c_i for i in [k1, k2).
    bool is_linear() const;

    /// Targets ordered by coordinate k1..k2-1 (linear case only).
    Eigen::VectorXd linear_targets() const;
    Eigen::VectorXd targets() const;

    ViewSet with_targets(const Eigen::VectorXd& targets) const;
    ViewSet with_marginal(std::optional<MarginalDensity> marginal) const;

    /// h_i evaluated at transformed coordinates w = (x, y).
    double moment_value(std::size_t i, const Eigen::VectorXd& w) const;

private:
    LinearViewMap<double> map_;
    std::optional<MarginalDensity> marginal_;
    std::vector<MomentView> moments_;
};

}  // namespace viewcal
