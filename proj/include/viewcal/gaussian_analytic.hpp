#pragma once

// Closed-form minimum-relative-entropy posterior for a Gaussian prior with a
// marginal view g on X = first k1 coordinates of W = V Z and mean views on the
// next k2 - k1 coordinates. Remaining coordinates (k2..N) are left free.
//
// Posterior: W = (X, Y), X ~ g, Y | X = x ~ N(mu_{y|x} + S_{:,c} lambda, S)
// with S the prior conditional covariance and c the constrained block.

#include <optional>

#include "viewcal/gaussian.hpp"
#include "viewcal/marginal.hpp"
#include "viewcal/views.hpp"

namespace viewcal {

template <typename Scalar>
Vector<Scalar> marginal_mean_as(const std::optional<MarginalDensity>& g, Index k1) {
    if (!g) return Vector<Scalar>::Zero(k1);
    return g->mean().template cast<Scalar>();
}

/// lambda = S_cc^{-1} [a - mu_c - G_c (E_g[X] - mu_x)].
template <typename Scalar>
Vector<Scalar> solve_lambda_gaussian_linear(const GaussianConditional<Scalar>& conditional,
                                            const Vector<Scalar>& marginal_mean, const Vector<Scalar>& targets) {
    const Index m = targets.size();
    require(m <= conditional.y_dimension(), ErrorCode::InvalidArgument,
            "solve_lambda_gaussian_linear: more targets than conditional coordinates");
    require(marginal_mean.size() == conditional.x_dimension(), ErrorCode::InvalidArgument,
            "solve_lambda_gaussian_linear: marginal mean has wrong dimension");
    if (m == 0) return Vector<Scalar>::Zero(0);
    require(marginal_mean.allFinite(), ErrorCode::InvalidArgument,
            "solve_lambda_gaussian_linear: E_g[X] must be finite");
    const Vector<Scalar> averaged = conditional.mean(marginal_mean).head(m);
    const Matrix<Scalar> s_cc = conditional.covariance.topLeftCorner(m, m);
    SpdFactor<Scalar> chol(s_cc, ErrorCode::SingularConditionalCovariance,
                           "conditional covariance of the moment-view block is singular");
    return chol.solve(targets - averaged);
}

template <typename Scalar>
struct GaussianMarginalPosterior {
    std::optional<MarginalDensity> marginal;
    LinearViewMap<Scalar> view_map;
    GaussianPrior<Scalar> transformed_prior;  ///< law of W = V Z under the prior
    GaussianConditional<Scalar> prior_conditional;
    Vector<Scalar> lambda;
    Vector<Scalar> marginal_mean;  ///< E_g[X]
    Vector<Scalar> shift;          ///< S_{:,c} lambda

    Index k1() const { return view_map.k1(); }
    Index dimension() const { return view_map.dimension(); }

    Vector<Scalar> conditional_mean(const Vector<Scalar>& x) const { return prior_conditional.mean(x) + shift; }
    const Matrix<Scalar>& conditional_covariance() const { return prior_conditional.covariance; }
    const Matrix<Scalar>& gain() const { return prior_conditional.gain; }
    /// conditional_mean(x) = intercept() + gain() x
    Vector<Scalar> intercept() const {
        return prior_conditional.y_mean - prior_conditional.gain * prior_conditional.x_mean + shift;
    }
    /// E[W] under the posterior.
    Vector<Scalar> mean_w() const {
        Vector<Scalar> out(dimension());
        out.head(k1()) = marginal_mean;
        out.tail(dimension() - k1()) = conditional_mean(marginal_mean);
        return out;
    }
};

using GaussianMarginalPosteriord = GaussianMarginalPosterior<double>;

/// Posterior with a given multiplier vector (not necessarily the calibrated one).
template <typename Scalar>
GaussianMarginalPosterior<Scalar> posterior_with_lambda(const GaussianPrior<Scalar>& prior,
                                                        const LinearViewMap<Scalar>& map,
                                                        std::optional<MarginalDensity> marginal,
                                                        const Vector<Scalar>& lambda) {
    require(map.dimension() == prior.dimension(), ErrorCode::InvalidArgument,
            "build_posterior: view map and prior dimensions differ");
    require(lambda.size() == map.moment_count(), ErrorCode::InvalidArgument,
            "build_posterior: lambda must have k2 - k1 entries");
    const Index k1 = map.k1();
    if (k1 > 0) {
        require(marginal.has_value() && marginal->dimension() == k1, ErrorCode::InvalidArgument,
                "build_posterior: marginal view must have dimension k1");
    }
    auto transformed = transform_prior(prior, map);
    auto conditional = gaussian_conditional(transformed, k1);
    Vector<Scalar> eg = marginal_mean_as<Scalar>(marginal, k1);
    if (!marginal) eg = conditional.x_mean;
    const Index m = lambda.size();
    Vector<Scalar> shift = conditional.covariance.leftCols(m) * lambda;
    return GaussianMarginalPosterior<Scalar>{std::move(marginal), map,          std::move(transformed),
                                             std::move(conditional), lambda,     std::move(eg),
                                             std::move(shift)};
}

template <typename Scalar>
GaussianMarginalPosterior<Scalar> build_posterior(const GaussianPrior<Scalar>& prior,
                                                  const LinearViewMap<Scalar>& map,
                                                  std::optional<MarginalDensity> marginal,
                                                  const Vector<Scalar>& targets) {
    require(targets.size() == map.moment_count(), ErrorCode::InvalidArgument,
            "build_posterior: need one mean target per moment coordinate");
    auto transformed = transform_prior(prior, map);
    auto conditional = gaussian_conditional(transformed, map.k1());
    Vector<Scalar> eg = marginal ? marginal_mean_as<Scalar>(marginal, map.k1()) : conditional.x_mean;
    const Vector<Scalar> lambda = solve_lambda_gaussian_linear(conditional, eg, targets);
    return posterior_with_lambda(prior, map, std::move(marginal), lambda);
}

inline GaussianMarginalPosteriord build_posterior(const GaussianPrior<double>& prior, const ViewSet& views) {
    return build_posterior<double>(prior, views.view_map(), views.marginal(), views.linear_targets());
}

/// Posterior density at original coordinates z, including |det V|.
double posterior_density_z(const GaussianMarginalPosteriord& post, const Eigen::VectorXd& z);
double posterior_log_density_z(const GaussianMarginalPosteriord& post, const Eigen::VectorXd& z);
inline double posterior_density_z(const GaussianMarginalPosteriord& post, const FactorVector& z) {
    return posterior_density_z(post, z.values);
}
/// Density of (X, Y) = w in transformed coordinates.
double posterior_log_density_w(const GaussianMarginalPosteriord& post, const Eigen::VectorXd& w);

/// Log density at s of the linear functional l^T W under the posterior
/// (1-D X). Uses adaptive quadrature over x in log-scaled arithmetic.
double posterior_linear_marginal_log(const GaussianMarginalPosteriord& post, const Eigen::VectorXd& l_w, double s,
                                     double rel_tol = 1e-10);

/// Density of Y_coord (0-based within the Y block) at s.
double posterior_marginal_y1(const GaussianMarginalPosteriord& post, Index coord, double s, double rel_tol = 1e-10);
double posterior_marginal_y1_log(const GaussianMarginalPosteriord& post, Index coord, double s,
                                 double rel_tol = 1e-10);

/// Density of original factor Z_j at s.
double posterior_marginal_z(const GaussianMarginalPosteriord& post, Index j, double s, double rel_tol = 1e-10);

/// Prior density at s of l^T Z (Gaussian).
double prior_linear_density(const GaussianPrior<double>& prior, const Eigen::VectorXd& l_z, double s);

}  // namespace viewcal
