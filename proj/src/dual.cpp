#include "viewcal/dual.hpp"

#include <cmath>
#include <limits>

#include "viewcal/quadrature.hpp"

namespace viewcal {

GaussianLinearDual::GaussianLinearDual(const GaussianPrior<double>& z_prior, const ViewSet& views) {
    require(views.is_linear(), ErrorCode::InvalidArgument, "GaussianLinearDual: views must be coordinate means");
    const auto w_prior = transform_prior(z_prior, views.view_map());
    const Index k1 = views.view_map().k1();
    const auto cond = gaussian_conditional(w_prior, k1);
    const Eigen::VectorXd eg = views.marginal() ? views.marginal()->mean() : cond.x_mean;
    const Index m = views.view_map().moment_count();
    averaged_mean_ = cond.mean(eg).head(m);
    covariance_ = cond.covariance.topLeftCorner(m, m);
    targets_ = views.linear_targets();
}

GaussianLinearDual::GaussianLinearDual(Eigen::VectorXd averaged_mean, Eigen::MatrixXd conditional_covariance,
                                       Eigen::VectorXd targets)
    : averaged_mean_(std::move(averaged_mean)),
      covariance_(std::move(conditional_covariance)),
      targets_(std::move(targets)) {
    require(averaged_mean_.size() == targets_.size() && covariance_.rows() == targets_.size() &&
                covariance_.cols() == targets_.size(),
            ErrorCode::InvalidArgument, "GaussianLinearDual: dimension mismatch");
}

DualState GaussianLinearDual::evaluate(const Eigen::VectorXd& lambda) const {
    require(lambda.size() == dimension(), ErrorCode::InvalidArgument, "dual: lambda has wrong size");
    DualState s;
    s.lambda = lambda;
    const Eigen::VectorXd s_lambda = covariance_ * lambda;
    s.value = lambda.dot(averaged_mean_ - targets_) + 0.5 * lambda.dot(s_lambda);
    s.gradient = averaged_mean_ + s_lambda - targets_;
    s.hessian = covariance_;
    return s;
}

TiltedModel::TiltedModel(OuterNodes outer, std::vector<NodeSet> conditionals, std::vector<MomentFunction> moments,
                         Eigen::VectorXd targets)
    : outer_(std::move(outer)),
      conditionals_(std::move(conditionals)),
      moments_(std::move(moments)),
      targets_(std::move(targets)) {
    const Index n = outer_.points.cols();
    require(outer_.weights.size() == n && static_cast<Index>(conditionals_.size()) == n, ErrorCode::InvalidArgument,
            "TiltedModel: one conditional node set per outer node required");
    require(static_cast<Index>(moments_.size()) == targets_.size(), ErrorCode::InvalidArgument,
            "TiltedModel: one target per moment function required");
    require(targets_.allFinite(), ErrorCode::InvalidArgument, "TiltedModel: targets must be finite");
    const Index k = targets_.size();
    moment_values_.resize(conditionals_.size());
    for (Index j = 0; j < n; ++j) {
        const auto& nodes = conditionals_[static_cast<std::size_t>(j)];
        require(nodes.log_weights.size() == nodes.points.cols(), ErrorCode::InvalidArgument,
                "TiltedModel: node weights/points mismatch");
        const Eigen::VectorXd x = outer_.points.col(j);
        Eigen::MatrixXd h(k, nodes.points.cols());
        for (Index c = 0; c < nodes.points.cols(); ++c) {
            const Eigen::VectorXd y = nodes.points.col(c);
            for (Index i = 0; i < k; ++i) h(i, c) = moments_[static_cast<std::size_t>(i)](x, y);
        }
        require(h.allFinite(), ErrorCode::InvalidArgument, "TiltedModel: moment function returned non-finite value");
        moment_values_[static_cast<std::size_t>(j)] = std::move(h);
    }
}

std::shared_ptr<TiltedModel> TiltedModel::from_prior(std::shared_ptr<const GenericPrior> prior,
                                                     const std::optional<MarginalDensity>& marginal,
                                                     std::vector<MomentFunction> moments, Eigen::VectorXd targets,
                                                     std::size_t outer_count) {
    require(prior != nullptr, ErrorCode::InvalidArgument, "TiltedModel: null prior");
    OuterNodes outer;
    if (prior->x_dimension() == 0) {
        require(!marginal, ErrorCode::InvalidArgument, "TiltedModel: marginal view without an X block");
        outer.points.resize(0, 1);
        outer.weights = Eigen::VectorXd::Ones(1);
    } else {
        require(marginal && marginal->dimension() == prior->x_dimension(), ErrorCode::InvalidArgument,
                "TiltedModel: marginal view must match the X block");
        outer = marginal->outer_nodes(outer_count);
    }
    std::vector<NodeSet> conditionals;
    conditionals.reserve(static_cast<std::size_t>(outer.points.cols()));
    for (Index j = 0; j < outer.points.cols(); ++j) {
        conditionals.push_back(prior->conditional_nodes(outer.points.col(j)));
    }
    auto model = std::make_shared<TiltedModel>(std::move(outer), std::move(conditionals), std::move(moments),
                                               std::move(targets));
    model->prior_ = std::move(prior);
    model->marginal_ = marginal;
    return model;
}

std::vector<MomentFunction> moment_functions(const ViewSet& views) {
    std::vector<MomentFunction> out;
    const auto map = std::make_shared<const LinearViewMap<double>>(views.view_map());
    const Index k1 = map->k1();
    for (const auto& m : views.moments()) {
        if (m.coordinate) {
            const Index i = *m.coordinate - k1;
            out.emplace_back([i](const Eigen::VectorXd&, const Eigen::VectorXd& y) { return y(i); });
        } else {
            auto h = m.function;
            out.emplace_back([h, map](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
                Eigen::VectorXd w(x.size() + y.size());
                w << x, y;
                return h(map->backward(w));
            });
        }
    }
    return out;
}

std::shared_ptr<TiltedModel> TiltedModel::from_views(const GaussianPrior<double>& z_prior, const ViewSet& views,
                                                     ConditionalRule rule, std::size_t outer_count) {
    const auto w_prior = transform_prior(z_prior, views.view_map());
    auto prior = std::make_shared<const GenericPrior>(GenericPrior::from_gaussian(w_prior, views.view_map().k1(), rule));
    auto model = from_prior(std::move(prior), views.marginal(), moment_functions(views), views.targets(), outer_count);
    model->view_map_ = views.view_map();
    return model;
}

ConditionalStats TiltedModel::conditional_stats(Index j, const Eigen::VectorXd& lambda) const {
    const auto& nodes = conditionals_[static_cast<std::size_t>(j)];
    const auto& h = moment_values_[static_cast<std::size_t>(j)];
    Eigen::VectorXd exponent = nodes.log_weights;
    if (lambda.size() > 0) exponent.noalias() += h.transpose() * lambda;
    const double lse = log_sum_exp(exponent);
    if (!std::isfinite(lse)) {
        fail(ErrorCode::NonIntegrableTilt, "inner normalizer overflowed at outer node " + std::to_string(j));
    }
    ConditionalStats out;
    out.log_normalizer = lse;
    out.tilted_weights = (exponent.array() - lse).exp().matrix();
    return out;
}

DualState TiltedModel::evaluate(const Eigen::VectorXd& lambda) const {
    const Index k = dimension();
    require(lambda.size() == k, ErrorCode::InvalidArgument, "dual: lambda has wrong size");
    require(lambda.allFinite(), ErrorCode::NonIntegrableTilt, "dual: non-finite lambda");
    CompensatedSum value;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(k);
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(k, k);
    for (Index j = 0; j < outer_size(); ++j) {
        const double w = outer_.weights(j);
        if (w == 0.0) continue;
        const auto stats = conditional_stats(j, lambda);
        const auto& h = moment_values_[static_cast<std::size_t>(j)];
        const Eigen::VectorXd m = h * stats.tilted_weights;
        const Eigen::MatrixXd centered = h.colwise() - m;
        value.add(w * stats.log_normalizer);
        mean.noalias() += w * m;
        second.noalias() += w * (centered * stats.tilted_weights.asDiagonal() * centered.transpose());
    }
    DualState s;
    s.lambda = lambda;
    s.value = value.value() - lambda.dot(targets_);
    s.gradient = mean - targets_;
    s.hessian = 0.5 * (second + second.transpose());
    if (!std::isfinite(s.value) || !s.gradient.allFinite() || !s.hessian.allFinite()) {
        fail(ErrorCode::NonIntegrableTilt, "dual evaluation produced non-finite values");
    }
    return s;
}

double TiltedModel::expectation(const MomentFunction& r, const Eigen::VectorXd& lambda) const {
    CompensatedSum total;
    for (Index j = 0; j < outer_size(); ++j) {
        const double w = outer_.weights(j);
        if (w == 0.0) continue;
        const auto stats = conditional_stats(j, lambda);
        const auto& nodes = conditionals_[static_cast<std::size_t>(j)];
        const Eigen::VectorXd x = outer_.points.col(j);
        double inner = 0.0;
        for (Index c = 0; c < nodes.size(); ++c) {
            const double p = stats.tilted_weights(c);
            if (p == 0.0) continue;
            inner += p * r(x, nodes.points.col(c));
        }
        total.add(w * inner);
    }
    return total.value();
}

std::shared_ptr<TiltedModel> TiltedModel::with_targets(Eigen::VectorXd targets) const {
    require(targets.size() == targets_.size(), ErrorCode::InvalidArgument, "with_targets: size mismatch");
    auto copy = std::make_shared<TiltedModel>(*this);
    copy->targets_ = std::move(targets);
    return copy;
}

}  // namespace viewcal
