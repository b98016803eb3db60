#pragma once

#include <Eigen/Dense>

#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "viewcal/errors.hpp"

namespace viewcal {

enum class MarginalKind { gaussian, student_t, grid };

std::string to_string(MarginalKind kind);

/// Parameters a marginal view can be differentiated against.
enum class MarginalParameter { location, scale, degrees_of_freedom };

/// Weighted point set used for outer integrals over the marginal block.
/// `points` is dimension x count, `weights` sums to one.
struct OuterNodes {
    Eigen::MatrixXd points;
    Eigen::VectorXd weights;
};

/// Density g of the marginal-view block X.
///
/// Gaussian may be multivariate; Student-t and grid kinds are univariate.
/// Grid densities are piecewise linear between knots, zero outside, and are
/// renormalized to unit trapezoid mass at construction.
class MarginalDensity {
public:
    struct Gaussian {
        Eigen::VectorXd mean;
        Eigen::MatrixXd covariance;
        Eigen::MatrixXd chol;  // lower Cholesky factor
        double log_det = 0.0;
    };
    struct StudentT {
        double dof;
        double location;
        double scale;
        double log_norm;  // log of the constant in front of the kernel
    };
    struct Grid {
        std::vector<double> knots;
        std::vector<double> densities;
        std::vector<double> cdf;  // cumulative mass at each knot
    };

    static MarginalDensity gaussian(double mean, double stddev);
    static MarginalDensity gaussian(Eigen::VectorXd mean, Eigen::MatrixXd covariance);
    static MarginalDensity student_t(double dof, double location, double scale,
                                     std::optional<double> tail_index = std::nullopt);
    static MarginalDensity grid(std::vector<double> knots, std::vector<double> densities);

    /// Tabulates a univariate analytic density on n equally spaced knots over
    /// [lo, hi]; fails unless the interval carries at least 99.99% of the mass.
    static MarginalDensity tabulate(const MarginalDensity& source, double lo, double hi, std::size_t n);

    MarginalKind kind() const;
    Eigen::Index dimension() const;
    std::optional<double> tail_index() const { return tail_index_; }

    double density(double x) const;
    double log_density(double x) const;
    double density(const Eigen::VectorXd& x) const;
    double log_density(const Eigen::VectorXd& x) const;

    // Univariate only.
    double cdf(double x) const;
    double quantile(double u) const;
    double variance() const;
    /// Interval carrying all but a negligible fraction of the mass.
    std::pair<double, double> support() const;

    Eigen::VectorXd mean() const;

    /// d/dtheta log g(x) for a univariate analytic marginal.
    double d_log_density(double x, MarginalParameter parameter) const;
    /// Copy with one parameter replaced (univariate analytic kinds).
    MarginalDensity with_parameter(MarginalParameter parameter, double value) const;
    double parameter(MarginalParameter parameter) const;

    /// Quadrature/quasi-random nodes for E_g[.]: trapezoid weights on grid
    /// knots, quantile midpoints for univariate analytic kinds, and a Halton
    /// sequence mapped through the Cholesky factor for multivariate Gaussians.
    OuterNodes outer_nodes(std::size_t count) const;

    Eigen::VectorXd sample(std::mt19937_64& rng) const;

    const std::variant<Gaussian, StudentT, Grid>& params() const { return params_; }

private:
    explicit MarginalDensity(std::variant<Gaussian, StudentT, Grid> params) : params_(std::move(params)) {}

    std::variant<Gaussian, StudentT, Grid> params_;
    std::optional<double> tail_index_;
};

/// Trapezoid mass of a univariate density over its declared support.
double trapezoid_mass(const MarginalDensity& g, std::size_t intervals = 200000);

}  // namespace viewcal
