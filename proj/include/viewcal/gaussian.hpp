#pragma once

// Gaussian priors, linear view maps and Gaussian conditioning.
//
// Everything here is templated on the scalar type so the closed-form path can
// be run in extended precision; the rest of the library instantiates double.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "viewcal/errors.hpp"

namespace viewcal {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Index = Eigen::Index;

inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kDefinitenessTolerance = 1e-10;

/// Named factor values, e.g. one scenario of asset returns.
struct FactorVector {
    Eigen::VectorXd values;
    std::vector<std::string> labels;

    FactorVector(Eigen::VectorXd v, std::vector<std::string> names)
        : values(std::move(v)), labels(std::move(names)) {
        require(static_cast<Index>(labels.size()) == values.size(), ErrorCode::InvalidArgument,
                "FactorVector: labels/values length mismatch");
        require(values.allFinite(), ErrorCode::InvalidArgument, "FactorVector: non-finite value");
    }
    explicit FactorVector(Eigen::VectorXd v) : values(std::move(v)) {
        require(values.allFinite(), ErrorCode::InvalidArgument, "FactorVector: non-finite value");
        for (Index i = 0; i < values.size(); ++i) labels.push_back("z" + std::to_string(i + 1));
    }
};

/// Cholesky factor of a symmetric block with a relative positive-definiteness check.
///
/// Fails with `code` if the smallest pivot is below kDefinitenessTolerance
/// times the largest diagonal entry.
template <typename Scalar>
class SpdFactor {
public:
    SpdFactor(const Matrix<Scalar>& a, ErrorCode code, const char* what) : llt_(a) {
        if (a.rows() == 0) return;
        const Scalar max_diag = a.diagonal().cwiseAbs().maxCoeff();
        if (llt_.info() != Eigen::Success || !(max_diag > Scalar(0))) fail(code, what);
        const Matrix<Scalar> l = llt_.matrixL();
        const Scalar min_pivot = l.diagonal().minCoeff();
        if (!(min_pivot * min_pivot > Scalar(kDefinitenessTolerance) * max_diag)) fail(code, what);
    }

    template <typename Rhs>
    auto solve(const Eigen::MatrixBase<Rhs>& b) const {
        return llt_.solve(b);
    }
    Matrix<Scalar> lower() const { return llt_.matrixL(); }
    Scalar log_det() const {
        const Matrix<Scalar> l = llt_.matrixL();
        return Scalar(2) * l.diagonal().array().log().sum();
    }

private:
    Eigen::LLT<Matrix<Scalar>> llt_;
};

template <typename Scalar>
Matrix<Scalar> symmetrized(const Matrix<Scalar>& a) {
    return (a + a.transpose()) / Scalar(2);
}

/// N(mean, covariance) on the factor vector.
template <typename Scalar>
class GaussianPrior {
public:
    GaussianPrior(Vector<Scalar> mean, Matrix<Scalar> covariance)
        : mean_(std::move(mean)), covariance_(std::move(covariance)) {
        using std::abs;
        const Index n = mean_.size();
        require(covariance_.rows() == n && covariance_.cols() == n, ErrorCode::InvalidArgument,
                "GaussianPrior: covariance must be N x N");
        require(mean_.allFinite() && covariance_.allFinite(), ErrorCode::InvalidArgument,
                "GaussianPrior: non-finite entries");
        const Scalar scale = n > 0 ? covariance_.cwiseAbs().maxCoeff() : Scalar(0);
        require(n == 0 || (covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() <=
                              Scalar(kSymmetryTolerance) * scale,
                ErrorCode::InvalidArgument, "GaussianPrior: covariance not symmetric");
        covariance_ = symmetrized(covariance_);
        if (n > 0 && scale > Scalar(0)) {
            Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(covariance_, Eigen::EigenvaluesOnly);
            require(eig.eigenvalues().minCoeff() >= -Scalar(kSymmetryTolerance) * scale * Scalar(n),
                    ErrorCode::InvalidArgument, "GaussianPrior: covariance not positive semidefinite");
        }
    }

    Index dimension() const { return mean_.size(); }
    const Vector<Scalar>& mean() const { return mean_; }
    const Matrix<Scalar>& covariance() const { return covariance_; }

    /// Log density; requires a positive definite covariance.
    Scalar log_density(const Vector<Scalar>& z) const {
        SpdFactor<Scalar> chol(covariance_, ErrorCode::SingularBlock, "GaussianPrior: singular covariance");
        const Vector<Scalar> r = z - mean_;
        const Vector<Scalar> w = chol.lower().template triangularView<Eigen::Lower>().solve(r);
        return -Scalar(0.5) * (w.squaredNorm() + chol.log_det() +
                               Scalar(dimension()) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>));
    }

    GaussianPrior<double> cast_double() const {
        return {mean_.template cast<double>(), covariance_.template cast<double>()};
    }

private:
    Vector<Scalar> mean_;
    Matrix<Scalar> covariance_;
};

/// Invertible linear change of variables W = V Z.
///
/// Rows [0, k1) are the marginal-view coordinates X, rows [k1, k2) carry
/// moment views, rows [k2, N) are unconstrained completions.
template <typename Scalar>
class LinearViewMap {
public:
    LinearViewMap(Matrix<Scalar> v, Index k1, Index k2) : matrix_(std::move(v)), k1_(k1), k2_(k2) {
        using std::abs;
        const Index n = matrix_.rows();
        require(matrix_.cols() == n, ErrorCode::InvalidArgument, "LinearViewMap: V must be square");
        require(0 <= k1 && k1 <= k2 && k2 <= n, ErrorCode::InvalidArgument,
                "LinearViewMap: need 0 <= k1 <= k2 <= N");
        Eigen::PartialPivLU<Matrix<Scalar>> lu(matrix_);
        det_ = n > 0 ? lu.determinant() : Scalar(1);
        Scalar scale(1);
        for (Index i = 0; i < n; ++i) scale *= matrix_.row(i).norm();
        require(abs(det_) > Scalar(kDefinitenessTolerance) * scale, ErrorCode::SingularMap,
                "LinearViewMap: V is singular");
        inverse_ = lu.inverse();
    }

    static LinearViewMap identity(Index n, Index k1, Index k2) {
        return LinearViewMap(Matrix<Scalar>::Identity(n, n), k1, k2);
    }

    Index dimension() const { return matrix_.rows(); }
    Index k1() const { return k1_; }
    Index k2() const { return k2_; }
    Index moment_count() const { return k2_ - k1_; }
    const Matrix<Scalar>& matrix() const { return matrix_; }
    const Matrix<Scalar>& inverse() const { return inverse_; }
    Scalar abs_det() const {
        using std::abs;
        return abs(det_);
    }

    Vector<Scalar> forward(const Vector<Scalar>& z) const { return matrix_ * z; }
    Vector<Scalar> backward(const Vector<Scalar>& w) const { return inverse_ * w; }

    LinearViewMap inverted() const { return LinearViewMap(inverse_, k1_, k2_); }

private:
    Matrix<Scalar> matrix_;
    Matrix<Scalar> inverse_;
    Index k1_;
    Index k2_;
    Scalar det_{1};
};

/// Law of Y given X = x for a jointly Gaussian (X, Y) split at k1:
/// mean(x) = mu_y + gain (x - mu_x), constant covariance.
template <typename Scalar>
struct GaussianConditional {
    Vector<Scalar> x_mean;
    Vector<Scalar> y_mean;
    Matrix<Scalar> gain;        ///< Sigma_yx Sigma_xx^{-1}
    Matrix<Scalar> covariance;  ///< Sigma_yy - Sigma_yx Sigma_xx^{-1} Sigma_xy

    Index x_dimension() const { return x_mean.size(); }
    Index y_dimension() const { return y_mean.size(); }

    Vector<Scalar> mean(const Vector<Scalar>& x) const { return y_mean + gain * (x - x_mean); }
};

template <typename Scalar>
GaussianConditional<Scalar> gaussian_conditional(const GaussianPrior<Scalar>& prior, Index k1) {
    const Index n = prior.dimension();
    require(0 <= k1 && k1 <= n, ErrorCode::InvalidArgument, "gaussian_conditional: split out of range");
    const Index k = n - k1;
    const auto& mu = prior.mean();
    const auto& sigma = prior.covariance();
    GaussianConditional<Scalar> out;
    out.x_mean = mu.head(k1);
    out.y_mean = mu.tail(k);
    if (k1 == 0) {
        out.gain = Matrix<Scalar>::Zero(k, 0);
        out.covariance = sigma;
        return out;
    }
    const Matrix<Scalar> sxx = sigma.topLeftCorner(k1, k1);
    const Matrix<Scalar> sxy = sigma.topRightCorner(k1, k);
    SpdFactor<Scalar> chol(sxx, ErrorCode::SingularBlock, "gaussian_conditional: Sigma_xx not invertible");
    out.gain = chol.solve(sxy).transpose();
    out.covariance = symmetrized<Scalar>(sigma.bottomRightCorner(k, k) - out.gain * sxy);
    return out;
}

/// Exact law of V Z for Z ~ prior.
template <typename Scalar>
GaussianPrior<Scalar> transform_prior(const GaussianPrior<Scalar>& prior, const LinearViewMap<Scalar>& map) {
    require(map.dimension() == prior.dimension(), ErrorCode::InvalidArgument,
            "transform_prior: dimension mismatch");
    const auto& v = map.matrix();
    return GaussianPrior<Scalar>(v * prior.mean(), symmetrized<Scalar>(v * prior.covariance() * v.transpose()));
}

inline double normal_log_pdf(double x, double mean, double variance) {
    const double r = x - mean;
    return -0.5 * (r * r / variance + std::log(2.0 * std::numbers::pi * variance));
}

}  // namespace viewcal
