#include "viewcal/var.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "viewcal/quadrature.hpp"
#include "viewcal/random.hpp"

namespace viewcal {

std::string to_string(VarConvention c) {
    return c == VarConvention::upper_quantile ? "upper_quantile" : "lower_tail_loss";
}

VarConvention var_convention_from_string(const std::string& s) {
    if (s == "upper_quantile") return VarConvention::upper_quantile;
    if (s == "lower_tail_loss") return VarConvention::lower_tail_loss;
    fail(ErrorCode::Validation, "unknown VaR convention '" + s + "'");
}

double sorted_quantile(const std::vector<double>& sorted, double q) {
    require(!sorted.empty(), ErrorCode::InsufficientSamples, "quantile of an empty sample");
    const double h = (double(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - double(lo)) * (sorted[hi] - sorted[lo]);
}

namespace {

// Weighted quantile: smallest value whose cumulative weight reaches q.
double weighted_quantile(const std::vector<double>& values, const std::vector<double>& weights,
                         const std::vector<std::size_t>& order, double q) {
    double total = 0.0;
    for (double w : weights) total += w;
    const double target = q * total;
    double cum = 0.0;
    for (std::size_t i : order) {
        cum += weights[i];
        if (cum >= target) return values[i];
    }
    return values[order.back()];
}

struct Quantiler {
    std::vector<double> values;
    std::vector<double> weights;  // empty when unweighted

    std::vector<double> at(const std::vector<double>& qs) const {
        std::vector<double> out;
        if (weights.empty()) {
            std::vector<double> sorted = values;
            std::sort(sorted.begin(), sorted.end());
            for (double q : qs) out.push_back(sorted_quantile(sorted, q));
        } else {
            std::vector<std::size_t> order(values.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
            for (double q : qs) out.push_back(weighted_quantile(values, weights, order, q));
        }
        return out;
    }
};

std::vector<double> to_var(const std::vector<double>& return_quantiles, double notional, VarConvention c) {
    std::vector<double> out;
    for (double r : return_quantiles) out.push_back(c == VarConvention::upper_quantile ? r * notional : -r * notional);
    return out;
}

}  // namespace

VarReport estimate_var(const SampleBatch& batch, const Eigen::VectorXd& portfolio_weights, double notional,
                       const std::vector<double>& levels, const VarOptions& options) {
    require(portfolio_weights.size() == batch.dimension(), ErrorCode::InvalidArgument,
            "estimate_var: portfolio weights must have one entry per factor");
    require(!levels.empty(), ErrorCode::InvalidArgument, "estimate_var: no levels");
    require(std::isfinite(notional), ErrorCode::InvalidArgument, "estimate_var: notional must be finite");
    const auto n = static_cast<std::size_t>(batch.size());
    const double n_eff = batch.effective_size();
    for (double q : levels) {
        require(q > 0.0 && q < 1.0, ErrorCode::InvalidArgument, "estimate_var: levels must lie in (0, 1)");
        require(n_eff * (1.0 - q) >= 20.0, ErrorCode::InsufficientSamples,
                "estimate_var: fewer than 20 tail samples at level " + std::to_string(q));
    }
    // Quantile levels of the return distribution.
    std::vector<double> qs;
    for (double q : levels) qs.push_back(options.convention == VarConvention::upper_quantile ? q : 1.0 - q);

    Quantiler base;
    const Eigen::VectorXd r = batch.z * portfolio_weights;
    base.values.assign(r.data(), r.data() + r.size());
    if (batch.weights) base.weights.assign(batch.weights->data(), batch.weights->data() + batch.weights->size());

    VarReport report;
    report.levels = levels;
    report.notional = notional;
    report.n_samples = n;
    report.convention = options.convention;
    report.var_values = to_var(base.at(qs), notional, options.convention);

    const int b = options.bootstrap_resamples;
    std::vector<double> sum(levels.size(), 0.0), sum_sq(levels.size(), 0.0);
    if (b > 1) {
        std::mt19937_64 rng = stream_engine(options.bootstrap_seed ^ batch.seed, 0);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        Quantiler resample;
        resample.values.resize(n);
        if (!base.weights.empty()) resample.weights.resize(n);
        for (int rep = 0; rep < b; ++rep) {
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t j = pick(rng);
                resample.values[i] = base.values[j];
                if (!base.weights.empty()) resample.weights[i] = base.weights[j];
            }
            const auto v = to_var(resample.at(qs), notional, options.convention);
            for (std::size_t l = 0; l < levels.size(); ++l) {
                sum[l] += v[l];
                sum_sq[l] += v[l] * v[l];
            }
        }
    }
    for (std::size_t l = 0; l < levels.size(); ++l) {
        if (b > 1) {
            const double mean = sum[l] / b;
            report.std_errors.push_back(std::sqrt(std::max(0.0, (sum_sq[l] - b * mean * mean) / (b - 1))));
        } else {
            report.std_errors.push_back(0.0);
        }
    }
    return report;
}

double gaussian_var(double mu, double sigma, double notional, double level, VarConvention convention) {
    require(level > 0.0 && level < 1.0, ErrorCode::InvalidArgument, "gaussian_var: level must lie in (0, 1)");
    require(sigma >= 0.0, ErrorCode::InvalidArgument, "gaussian_var: negative sigma");
    const double z = boost::math::quantile(boost::math::normal_distribution<double>(), level);
    return convention == VarConvention::upper_quantile ? (mu + z * sigma) * notional : (z * sigma - mu) * notional;
}

}  // namespace viewcal
