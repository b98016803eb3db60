#include "viewcal/generic_prior.hpp"

#include <cmath>
#include <memory>

#include "viewcal/quadrature.hpp"
#include "viewcal/sampling.hpp"

namespace viewcal {

int default_gauss_hermite_order(Index dim) {
    switch (dim) {
        case 0: return 1;
        case 1: return 64;
        case 2: return 24;
        case 3: return 12;
        default: return 0;
    }
}

GenericPrior::GenericPrior(Index x_dim, Index y_dim, JointDensity joint, ConditionalDensity conditional,
                           ConditionalSampler sampler, ConditionalNodes nodes)
    : x_dim_(x_dim),
      y_dim_(y_dim),
      joint_(std::move(joint)),
      conditional_(std::move(conditional)),
      sampler_(std::move(sampler)),
      nodes_(std::move(nodes)) {
    require(x_dim >= 0 && y_dim >= 0, ErrorCode::InvalidArgument, "GenericPrior: negative dimension");
    require(joint_ && conditional_ && sampler_ && nodes_, ErrorCode::InvalidArgument,
            "GenericPrior: all evaluators must be provided");
}

GenericPrior GenericPrior::from_gaussian(const GaussianPrior<double>& w_prior, Index k1, ConditionalRule rule) {
    auto cond = std::make_shared<const GaussianConditional<double>>(gaussian_conditional(w_prior, k1));
    const Index k = cond->y_dimension();
    const Eigen::MatrixXd chol = psd_factor(cond->covariance);
    auto factor = std::make_shared<const Eigen::MatrixXd>(chol);
    auto joint_prior = std::make_shared<const GaussianPrior<double>>(w_prior);

    int order = rule.gauss_hermite_order > 0 ? rule.gauss_hermite_order : default_gauss_hermite_order(k);
    std::shared_ptr<const NodeSet> standard_nodes;
    bool mc = false;
    if (rule.kind == ConditionalRule::Kind::composite_legendre) {
        require(k == 1, ErrorCode::InvalidArgument, "composite Legendre rule needs one conditional dimension");
        TensorRule t = normal_legendre_rule(rule.legendre_panels, rule.legendre_half_width);
        standard_nodes = std::make_shared<const NodeSet>(NodeSet{std::move(t.points), std::move(t.log_weights)});
    } else if (order > 0) {
        TensorRule t = gauss_hermite_tensor(order, static_cast<int>(k));
        standard_nodes = std::make_shared<const NodeSet>(NodeSet{std::move(t.points), std::move(t.log_weights)});
    } else {
        mc = true;
        std::mt19937_64 rng(rule.seed);
        std::normal_distribution<double> normal;
        NodeSet draws;
        draws.points.resize(k, rule.monte_carlo_draws);
        for (Index j = 0; j < draws.points.cols(); ++j)
            for (Index i = 0; i < k; ++i) draws.points(i, j) = normal(rng);
        draws.log_weights = Eigen::VectorXd::Constant(rule.monte_carlo_draws, -std::log(double(rule.monte_carlo_draws)));
        standard_nodes = std::make_shared<const NodeSet>(std::move(draws));
    }

    auto joint = [joint_prior, k1](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        Eigen::VectorXd w(k1 + y.size());
        w << x, y;
        return std::exp(joint_prior->log_density(w));
    };
    auto conditional = [cond](const Eigen::VectorXd& y, const Eigen::VectorXd& x) {
        const GaussianPrior<double> law(cond->mean(x), cond->covariance);
        return std::exp(law.log_density(y));
    };
    auto sampler = [cond, factor](const Eigen::VectorXd& x, std::mt19937_64& rng) {
        std::normal_distribution<double> normal;
        Eigen::VectorXd u(cond->y_dimension());
        for (Index i = 0; i < u.size(); ++i) u(i) = normal(rng);
        return Eigen::VectorXd(cond->mean(x) + *factor * u);
    };
    auto nodes = [cond, factor, standard_nodes](const Eigen::VectorXd& x) {
        NodeSet out;
        out.points = (*factor * standard_nodes->points).colwise() + cond->mean(x);
        out.log_weights = standard_nodes->log_weights;
        return out;
    };
    GenericPrior out(k1, k, std::move(joint), std::move(conditional), std::move(sampler), std::move(nodes));
    out.monte_carlo_nodes_ = mc;
    return out;
}

}  // namespace viewcal
