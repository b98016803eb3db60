#include "viewcal/views.hpp"

#include <set>

namespace viewcal {

MomentView MomentView::on_coordinate(Index i, double target, std::string name) {
    require(std::isfinite(target), ErrorCode::InvalidArgument, "MomentView: target must be finite");
    MomentView v;
    v.coordinate = i;
    v.target = target;
    v.name = name.empty() ? "w" + std::to_string(i + 1) : std::move(name);
    return v;
}

MomentView MomentView::on_function(FactorFunction h, double target, std::string name) {
    require(std::isfinite(target), ErrorCode::InvalidArgument, "MomentView: target must be finite");
    require(static_cast<bool>(h), ErrorCode::InvalidArgument, "MomentView: empty function");
    MomentView v;
    v.function = std::move(h);
    v.target = target;
    v.name = name.empty() ? "h" : std::move(name);
    return v;
}

ViewSet::ViewSet(LinearViewMap<double> map, std::optional<MarginalDensity> marginal, std::vector<MomentView> moments)
    : map_(std::move(map)), marginal_(std::move(marginal)), moments_(std::move(moments)) {
    const Index k1 = map_.k1();
    if (k1 > 0) {
        require(marginal_.has_value(), ErrorCode::InvalidArgument, "ViewSet: k1 > 0 requires a marginal view");
        require(marginal_->dimension() == k1, ErrorCode::InvalidArgument,
                "ViewSet: marginal dimension must equal k1");
    } else {
        require(!marginal_.has_value(), ErrorCode::InvalidArgument, "ViewSet: marginal view given but k1 == 0");
    }
    if (is_linear()) {
        require(moment_count() == map_.moment_count(), ErrorCode::InvalidArgument,
                "ViewSet: moment count must equal k2 - k1");
        std::set<Index> seen;
        for (const auto& m : moments_) {
            require(*m.coordinate >= k1 && *m.coordinate < map_.k2(), ErrorCode::InvalidArgument,
                    "ViewSet: moment coordinate outside [k1, k2)");
            require(seen.insert(*m.coordinate).second, ErrorCode::InvalidArgument,
                    "ViewSet: duplicated moment coordinate");
        }
    } else {
        for (const auto& m : moments_) {
            if (m.coordinate) {
                require(*m.coordinate >= k1 && *m.coordinate < map_.dimension(), ErrorCode::InvalidArgument,
                        "ViewSet: moment coordinate must address the conditional block");
            }
        }
    }
}

bool ViewSet::is_linear() const {
    for (const auto& m : moments_)
        if (!m.is_linear()) return false;
    return true;
}

Eigen::VectorXd ViewSet::linear_targets() const {
    require(is_linear(), ErrorCode::InvalidArgument, "linear_targets: non-linear moment view present");
    Eigen::VectorXd c(map_.moment_count());
    for (const auto& m : moments_) c(*m.coordinate - map_.k1()) = m.target;
    return c;
}

Eigen::VectorXd ViewSet::targets() const {
    Eigen::VectorXd c(moment_count());
    for (Index i = 0; i < moment_count(); ++i) c(i) = moments_[static_cast<std::size_t>(i)].target;
    return c;
}

ViewSet ViewSet::with_targets(const Eigen::VectorXd& targets) const {
    require(targets.size() == moment_count(), ErrorCode::InvalidArgument, "with_targets: size mismatch");
    auto moments = moments_;
    for (std::size_t i = 0; i < moments.size(); ++i) moments[i].target = targets(static_cast<Index>(i));
    return ViewSet(map_, marginal_, std::move(moments));
}

ViewSet ViewSet::with_marginal(std::optional<MarginalDensity> marginal) const {
    return ViewSet(map_, std::move(marginal), moments_);
}

double ViewSet::moment_value(std::size_t i, const Eigen::VectorXd& w) const {
    const auto& m = moments_[i];
    if (m.coordinate) return w(*m.coordinate);
    return m.function(map_.backward(w));
}

}  // namespace viewcal
