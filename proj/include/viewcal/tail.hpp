#pragma once

#include <optional>
#include <string>
#include <vector>

#include "viewcal/gaussian_analytic.hpp"

namespace viewcal {

enum class TailAdmissibility { admissible, inadmissible, unknown };

std::string to_string(TailAdmissibility a);

struct TailAssumption {
    TailAdmissibility status = TailAdmissibility::unknown;
    std::optional<double> alpha;  ///< regular-variation index when admissible
};

/// Student-t(n) is regularly varying with index n + 1; Gaussian tails are
/// not; grids have finite support and cannot certify a tail law.
TailAssumption check_assumption(const MarginalDensity& g);

struct TailReport {
    double alpha = 0.0;
    double target_ratio = 0.0;  ///< |sigma_xy / sigma_xx|^(alpha - 1)
    std::vector<double> probe_points;
    std::vector<double> measured_ratios;  ///< posterior density of Y_coord over g, at each probe
    bool converged = false;
    bool truncated = false;  ///< quadrature failed beyond the last reported point
};

/// Geometric probe schedule s_max * 2^-(n-1-i), i = 0..n-1.
std::vector<double> probe_schedule(double s_max, int n_points);

/// Ratio of the posterior marginal density of Y_coord to g at each point,
/// without hypothesis checks.
std::vector<double> tail_ratio_profile(const GaussianMarginalPosteriord& post, Index coord,
                                       const std::vector<double>& points);

/// Probes the tail limit of the posterior marginal of Y_coord. s_max defaults
/// to 2048 scale units of g. Fails with ZeroCorrelation when sigma_xy = 0 and
/// InadmissibleTail unless g is admissible.
TailReport tail_ratio_probe(const GaussianMarginalPosteriord& post, Index coord,
                            std::optional<double> s_max = std::nullopt, int n_points = 10);

}  // namespace viewcal
