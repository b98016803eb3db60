#pragma once

#include <Eigen/Dense>

#include <memory>

#include "viewcal/dual.hpp"

namespace viewcal {

/// Calibrated generic posterior f_lambda(y | x) g(x) with
/// f_lambda(y | x) = exp(lambda^T h(x, y)) f(y | x) / Z_lambda(x).
class TiltedPosterior {
public:
    TiltedPosterior(std::shared_ptr<const TiltedModel> model, Eigen::VectorXd lambda);

    const TiltedModel& model() const { return *model_; }
    std::shared_ptr<const TiltedModel> model_ptr() const { return model_; }
    const Eigen::VectorXd& lambda() const { return lambda_; }

    /// log Z_lambda(x) from the prior's conditional nodes at an arbitrary x.
    double log_normalizer(const Eigen::VectorXd& x) const;
    double tilt(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

    double log_density_w(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
    /// Density in original coordinates when the model came from a view set.
    double log_density_z(const Eigen::VectorXd& z) const;

    double expectation(const MomentFunction& r) const { return model_->expectation(r, lambda_); }

private:
    const GenericPrior& prior() const;

    std::shared_ptr<const TiltedModel> model_;
    Eigen::VectorXd lambda_;
};

}  // namespace viewcal
