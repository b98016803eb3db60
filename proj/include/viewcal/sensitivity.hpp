#pragma once

#include <Eigen/Dense>

#include <optional>

#include "viewcal/gaussian_analytic.hpp"
#include "viewcal/posterior.hpp"

namespace viewcal {

struct SensitivityReport {
    double value = 0.0;           ///< Pi = E_lambda[r]
    Eigen::VectorXd cov_r_h;      ///< E[Cov_lambda(r, h_j | X)]
    Eigen::MatrixXd v;            ///< E[Cov_lambda(h_i, h_j | X)]
    Eigen::MatrixXd u;            ///< V^{-1}
    Eigen::VectorXd d_pi_d_c;     ///< sum_j E[Cov(r, h_j | X)] U_ij
    std::optional<double> d_pi_d_alpha;  ///< E_lambda[r d/dalpha log g], lambda held fixed
};

/// Sensitivities of Pi = E_lambda[r] on the calibrated model's nodes.
/// Fails with SingularV when the views are dependent.
SensitivityReport sensitivities(const TiltedPosterior& post, const MomentFunction& r,
                                std::optional<MarginalParameter> alpha = std::nullopt);

/// Closed form for r = l^T W (l in transformed coordinates) under the Gaussian
/// posterior: Cov(r, Y_c | X) = (S l_y)_c and V = S_cc.
SensitivityReport sensitivities(const GaussianMarginalPosteriord& post, const Eigen::VectorXd& l_w,
                                std::optional<MarginalParameter> alpha = std::nullopt);

}  // namespace viewcal
