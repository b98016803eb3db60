#pragma once

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <vector>

namespace viewcal {

/// Probabilists' Gauss-Hermite rule: E[f(U)] for U ~ N(0,1) is
/// approximated by sum_i weights[i] f(nodes[i]); weights sum to one.
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    std::vector<double> log_weights;
};

/// Cached rule with `order` nodes (Golub-Welsch with Newton refinement).
const GaussHermiteRule& gauss_hermite(int order);

/// Tensor-product rule in `dim` dimensions; points are dim x order^dim.
struct TensorRule {
    Eigen::MatrixXd points;
    Eigen::VectorXd log_weights;
};
TensorRule gauss_hermite_tensor(int order, int dim);

/// Composite 8-point Gauss-Legendre rule for the standard normal law on
/// [-half_width, half_width]; weights renormalized to one. Points are 1 x m.
TensorRule normal_legendre_rule(int panels, double half_width);

/// Radical-inverse Halton point `index` (1-based) in `dim` dimensions.
Eigen::VectorXd halton_point(std::size_t index, int dim);

double log_sum_exp(std::span<const double> values);
double log_sum_exp(const Eigen::VectorXd& values);

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
};

/// Adaptive 31-point Gauss-Kronrod on [a, b]. Throws QuadratureFailure when the
/// error estimate exceeds rel_tol * |value| + abs_tol.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double rel_tol = 1e-10, double abs_tol = 0.0, unsigned max_depth = 15);

/// Sums adaptive integrals over consecutive intervals split at `breaks`
/// (must be increasing).
QuadratureResult integrate_piecewise(const std::function<double(double)>& f, std::span<const double> breaks,
                                     double rel_tol = 1e-10, double abs_tol = 0.0);

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace viewcal
