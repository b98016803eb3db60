#include "viewcal/newton.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace viewcal {

std::string to_string(ExistenceStatus status) {
    switch (status) {
        case ExistenceStatus::interior: return "interior";
        case ExistenceStatus::boundary: return "boundary";
        case ExistenceStatus::outside: return "outside";
        case ExistenceStatus::unchecked: return "unchecked";
    }
    return "unchecked";
}

namespace {

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

double min_eigenvalue(const Eigen::MatrixXd& h) {
    if (h.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h, Eigen::EigenvaluesOnly);
    return eig.eigenvalues()(0);
}

std::optional<DualState> try_evaluate(const DualProblem& problem, const Eigen::VectorXd& lambda) {
    try {
        return problem.evaluate(lambda);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::NonIntegrableTilt) return std::nullopt;
        throw;
    }
}

}  // namespace

CalibrationReport solve_lambda_newton(const DualProblem& problem, const NewtonOptions& options) {
    const Index k = problem.dimension();
    Eigen::VectorXd lambda = options.initial ? *options.initial : Eigen::VectorXd::Zero(k);
    require(lambda.size() == k, ErrorCode::InvalidArgument, "solve_lambda_newton: initial lambda has wrong size");

    CalibrationReport report;
    DualState state = problem.evaluate(lambda);
    report.dual_history.push_back(state.value);
    if (!options.initial || options.initial->isZero(0.0)) report.independence = min_eigenvalue(state.hessian);

    int it = 0;
    bool line_search_failed = false;
    while (inf_norm(state.gradient) > options.tolerance && it < options.max_iterations) {
        const Eigen::MatrixXd& h = state.hessian;
        const double scale = std::max(1e-300, h.diagonal().cwiseAbs().maxCoeff());
        Eigen::VectorXd direction;
        bool singular = min_eigenvalue(h) <= 1e-12 * scale;
        if (!singular) {
            Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
            direction = ldlt.solve(-state.gradient);
            singular = ldlt.info() != Eigen::Success || !direction.allFinite() ||
                       direction.dot(state.gradient) >= 0.0;
        }
        if (singular) {
            report.gradient_fallback = true;
            // Newton step restricted to the range of H, else steepest descent.
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
            const Eigen::VectorXd ev = eig.eigenvalues();
            Eigen::VectorXd inv = Eigen::VectorXd::Zero(k);
            for (Index i = 0; i < k; ++i)
                if (ev(i) > 1e-12 * scale) inv(i) = 1.0 / ev(i);
            direction = -(eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose() * state.gradient);
            if (!(direction.dot(state.gradient) < 0.0)) direction = -state.gradient / scale;
        }

        const double slope = direction.dot(state.gradient);
        double step = 1.0;
        std::optional<DualState> accepted;
        for (int b = 0; b < options.max_backtracks; ++b) {
            const Eigen::VectorXd trial = lambda + step * direction;
            auto candidate = try_evaluate(problem, trial);
            if (candidate) {
                if (candidate->value <= state.value + options.armijo * step * slope) {
                    accepted = std::move(candidate);
                    break;
                }
                // Near the optimum F is flat to rounding; accept a step that
                // does not raise F and shrinks the gradient.
                const double noise = 64.0 * std::numeric_limits<double>::epsilon() *
                                     std::max(1.0, std::abs(state.value));
                if (candidate->value <= state.value + noise &&
                    inf_norm(candidate->gradient) < inf_norm(state.gradient)) {
                    candidate->value = std::min(candidate->value, state.value);
                    accepted = std::move(candidate);
                    break;
                }
            }
            step *= options.backtrack;
        }
        if (!accepted) {
            line_search_failed = true;
            break;
        }
        lambda = accepted->lambda;
        state = std::move(*accepted);
        report.dual_history.push_back(state.value);
        ++it;
    }

    report.lambda = lambda;
    report.gradient = state.gradient;
    report.hessian = state.hessian;
    report.residuals = state.gradient.cwiseAbs();
    report.dual_value = state.value;
    report.iterations = it;
    report.converged = inf_norm(state.gradient) <= options.tolerance;
    if (!report.converged) {
        report.message = line_search_failed ? "line search failed to decrease the dual"
                                            : "iteration limit reached";
    }
    return report;
}

const CalibrationReport& require_converged(const CalibrationReport& report) {
    if (!report.converged) {
        fail(ErrorCode::NotConverged, report.message + " (max residual " + std::to_string(report.max_residual()) + ")");
    }
    return report;
}

}  // namespace viewcal
