#pragma once

#include <Eigen/Dense>

#include <string>

#include "viewcal/gaussian_analytic.hpp"
#include "viewcal/posterior.hpp"
#include "viewcal/sampling.hpp"

namespace viewcal {

struct PriceResult {
    double price = 0.0;
    double std_error = 0.0;  ///< zero for quadrature
    std::string method;
};

/// e^{-D} E_lambda[payoff(x, y)] on the calibrated model's nodes.
PriceResult price_option(const TiltedPosterior& post, const MomentFunction& payoff, double discount);

/// e^{-D} E[payoff(z)] under the closed-form posterior. For one conditional
/// coordinate and 1-D X this is a product rule (outer nodes of g times a
/// composite Gauss-Legendre rule in y); otherwise Monte Carlo with `samples`
/// draws and standard error.
PriceResult price_option(const GaussianMarginalPosteriord& post, const FactorFunction& payoff, double discount,
                         std::size_t samples = 100000, std::uint64_t seed = 1);

/// Monte Carlo estimate from a batch (weights honoured).
PriceResult price_option(const SampleBatch& batch, const FactorFunction& payoff, double discount);

/// Call payoff (s0 * exp(y) - strike)^+ on a log-return coordinate.
double call_on_log_return(double s0, double strike, double log_return);

}  // namespace viewcal
