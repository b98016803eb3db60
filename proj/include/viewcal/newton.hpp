#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "viewcal/dual.hpp"

namespace viewcal {

enum class ExistenceStatus { interior, boundary, outside, unchecked };

std::string to_string(ExistenceStatus status);

struct NewtonOptions {
    double tolerance = 1e-8;  ///< on the infinity norm of the dual gradient
    int max_iterations = 100;
    std::optional<Eigen::VectorXd> initial;  ///< defaults to zero
    double armijo = 1e-4;
    double backtrack = 0.5;
    int max_backtracks = 60;
};

struct CalibrationReport {
    Eigen::VectorXd lambda;
    Eigen::VectorXd residuals;  ///< |E_lambda[h_i] - c_i|
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;    ///< at the returned lambda
    int iterations = 0;
    bool converged = false;
    double dual_value = 0.0;
    std::vector<double> dual_history;  ///< F at lambda_0, lambda_1, ...
    ExistenceStatus existence = ExistenceStatus::unchecked;
    /// Smallest eigenvalue of the Hessian at lambda = 0, when the solve started there.
    std::optional<double> independence;
    bool gradient_fallback = false;  ///< a singular Hessian forced a gradient step
    std::string message;

    double max_residual() const { return residuals.size() ? residuals.cwiseAbs().maxCoeff() : 0.0; }
};

/// Damped Newton on the convex dual with Armijo backtracking.
/// Returns the best iterate with converged == false instead of throwing when
/// the iteration budget or the line search is exhausted.
CalibrationReport solve_lambda_newton(const DualProblem& problem, const NewtonOptions& options = {});

/// Throws NotConverged unless the report converged.
const CalibrationReport& require_converged(const CalibrationReport& report);

}  // namespace viewcal
