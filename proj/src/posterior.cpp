#include "viewcal/posterior.hpp"

#include <cmath>
#include <limits>

#include "viewcal/quadrature.hpp"

namespace viewcal {

TiltedPosterior::TiltedPosterior(std::shared_ptr<const TiltedModel> model, Eigen::VectorXd lambda)
    : model_(std::move(model)), lambda_(std::move(lambda)) {
    require(model_ != nullptr, ErrorCode::InvalidArgument, "TiltedPosterior: null model");
    require(lambda_.size() == model_->dimension(), ErrorCode::InvalidArgument, "TiltedPosterior: lambda size");
}

const GenericPrior& TiltedPosterior::prior() const {
    require(model_->prior() != nullptr, ErrorCode::InvalidArgument,
            "TiltedPosterior: model was built without a prior; off-node evaluation unavailable");
    return *model_->prior();
}

double TiltedPosterior::tilt(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    double t = 0.0;
    const auto& h = model_->moments();
    for (Index i = 0; i < lambda_.size(); ++i) t += lambda_(i) * h[static_cast<std::size_t>(i)](x, y);
    return t;
}

double TiltedPosterior::log_normalizer(const Eigen::VectorXd& x) const {
    const NodeSet nodes = prior().conditional_nodes(x);
    Eigen::VectorXd e = nodes.log_weights;
    for (Index c = 0; c < nodes.size(); ++c) e(c) += tilt(x, nodes.points.col(c));
    const double lse = log_sum_exp(e);
    require(std::isfinite(lse), ErrorCode::NonIntegrableTilt, "tilted normalizer overflow");
    return lse;
}

double TiltedPosterior::log_density_w(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    double log_g = 0.0;
    if (x.size() > 0) {
        require(model_->marginal().has_value(), ErrorCode::InvalidArgument, "TiltedPosterior: no marginal view");
        log_g = model_->marginal()->log_density(x);
        if (!std::isfinite(log_g)) return -std::numeric_limits<double>::infinity();
    }
    const double f = prior().conditional_density(y, x);
    if (!(f > 0.0)) return -std::numeric_limits<double>::infinity();
    return log_g + std::log(f) + tilt(x, y) - log_normalizer(x);
}

double TiltedPosterior::log_density_z(const Eigen::VectorXd& z) const {
    const auto& map = model_->view_map();
    const Eigen::VectorXd w = map ? map->forward(z) : z;
    const Index k1 = prior().x_dimension();
    const double jac = map ? std::log(map->abs_det()) : 0.0;
    return log_density_w(w.head(k1), w.tail(w.size() - k1)) + jac;
}

}  // namespace viewcal
