#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "viewcal/sampling.hpp"

namespace viewcal {

/// upper_quantile: VaR_q = quantile_q(portfolio return) * notional, the
/// convention that reproduces the published prior column.
/// lower_tail_loss: VaR_q = -quantile_{1-q}(portfolio return) * notional.
enum class VarConvention { upper_quantile, lower_tail_loss };

std::string to_string(VarConvention c);
VarConvention var_convention_from_string(const std::string& s);

struct VarReport {
    std::vector<double> levels;
    std::vector<double> var_values;
    std::vector<double> std_errors;
    double notional = 0.0;
    std::size_t n_samples = 0;
    VarConvention convention = VarConvention::upper_quantile;
};

struct VarOptions {
    VarConvention convention = VarConvention::upper_quantile;
    int bootstrap_resamples = 200;
    std::uint64_t bootstrap_seed = 0xb007ULL;
};

/// Empirical VaR of the portfolio w^T z; weighted batches use the weighted
/// empirical distribution. Fails with InsufficientSamples when n (1 - q) < 20.
VarReport estimate_var(const SampleBatch& batch, const Eigen::VectorXd& portfolio_weights, double notional,
                       const std::vector<double>& levels, const VarOptions& options = {});

/// Closed form for a Gaussian portfolio return N(mu, sigma^2).
double gaussian_var(double mu, double sigma, double notional, double level,
                    VarConvention convention = VarConvention::upper_quantile);

/// Empirical q-quantile of sorted values (linear interpolation between order statistics).
double sorted_quantile(const std::vector<double>& sorted, double q);

}  // namespace viewcal
