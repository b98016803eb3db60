#include "viewcal/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "viewcal/errors.hpp"

namespace viewcal {
namespace {

// Orthonormal (w.r.t. N(0,1)) Hermite polynomials p_0..p_{n-1} at x and the
// derivative of p_n, via the three-term recurrence.
struct HermiteEval {
    double p_n;
    double dp_n;
    double christoffel;  // sum_{j<n} p_j(x)^2
};

HermiteEval hermite_eval(int n, double x) {
    double p_prev = 0.0;
    double p = 1.0;
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
        sum += p * p;
        const double p_next = (x * p - std::sqrt(double(j)) * p_prev) / std::sqrt(double(j + 1));
        p_prev = p;
        p = p_next;
    }
    // p_n' = sqrt(n) p_{n-1}
    return {p, std::sqrt(double(n)) * p_prev, sum};
}

GaussHermiteRule build_rule(int n) {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        jacobi(i, i - 1) = jacobi(i - 1, i) = std::sqrt(double(i));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi, Eigen::EigenvaluesOnly);
    GaussHermiteRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    rule.log_weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = eig.eigenvalues()(i);
        for (int it = 0; it < 3; ++it) {
            const auto e = hermite_eval(n, x);
            if (e.dp_n == 0.0) break;
            x -= e.p_n / e.dp_n;
        }
        rule.nodes[i] = x;
        rule.weights[i] = 1.0 / hermite_eval(n, x).christoffel;
    }
    double total = 0.0;
    for (double w : rule.weights) total += w;
    for (int i = 0; i < n; ++i) {
        rule.weights[i] /= total;
        rule.log_weights[i] = std::log(rule.weights[i]);
    }
    return rule;
}

constexpr std::array<int, 12> kPrimes{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

}  // namespace

const GaussHermiteRule& gauss_hermite(int order) {
    require(order >= 1 && order <= 200, ErrorCode::InvalidArgument, "gauss_hermite: order out of range");
    static std::mutex mutex;
    static std::map<int, GaussHermiteRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, build_rule(order)).first;
    return it->second;
}

TensorRule gauss_hermite_tensor(int order, int dim) {
    const auto& rule = gauss_hermite(order);
    Eigen::Index count = 1;
    for (int d = 0; d < dim; ++d) count *= order;
    TensorRule out;
    out.points.resize(dim, count);
    out.log_weights.resize(count);
    for (Eigen::Index c = 0; c < count; ++c) {
        Eigen::Index rem = c;
        double lw = 0.0;
        for (int d = 0; d < dim; ++d) {
            const auto i = static_cast<std::size_t>(rem % order);
            rem /= order;
            out.points(d, c) = rule.nodes[i];
            lw += rule.log_weights[i];
        }
        out.log_weights(c) = lw;
    }
    return out;
}

TensorRule normal_legendre_rule(int panels, double half_width) {
    require(panels > 0 && half_width > 0.0, ErrorCode::InvalidArgument, "normal_legendre_rule: bad parameters");
    using Rule = boost::math::quadrature::gauss<double, 8>;
    const auto& abscissa = Rule::abscissa();
    const auto& weights = Rule::weights();
    std::vector<double> nodes;
    std::vector<double> log_w;
    const double h = 2.0 * half_width / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = -half_width + (p + 0.5) * h;
        for (std::size_t i = 0; i < abscissa.size(); ++i) {
            const double offsets[2] = {abscissa[i], -abscissa[i]};
            const int count = abscissa[i] == 0.0 ? 1 : 2;
            for (int j = 0; j < count; ++j) {
                const double u = mid + 0.5 * h * offsets[j];
                nodes.push_back(u);
                log_w.push_back(std::log(0.5 * h * weights[i]) - 0.5 * u * u);
            }
        }
    }
    TensorRule out;
    out.points = Eigen::Map<const Eigen::RowVectorXd>(nodes.data(), static_cast<Eigen::Index>(nodes.size()));
    out.log_weights = Eigen::Map<const Eigen::VectorXd>(log_w.data(), static_cast<Eigen::Index>(log_w.size()));
    out.log_weights.array() -= log_sum_exp(out.log_weights);
    return out;
}

Eigen::VectorXd halton_point(std::size_t index, int dim) {
    require(dim <= static_cast<int>(kPrimes.size()), ErrorCode::InvalidArgument, "halton_point: dimension too large");
    Eigen::VectorXd out(dim);
    for (int d = 0; d < dim; ++d) {
        const std::size_t base = static_cast<std::size_t>(kPrimes[static_cast<std::size_t>(d)]);
        double f = 1.0;
        double r = 0.0;
        for (std::size_t i = index; i > 0; i /= base) {
            f /= double(base);
            r += f * double(i % base);
        }
        out(d) = r;
    }
    return out;
}

double log_sum_exp(std::span<const double> values) {
    if (values.empty()) return -std::numeric_limits<double>::infinity();
    const double m = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double v : values) s += std::exp(v - m);
    return m + std::log(s);
}

double log_sum_exp(const Eigen::VectorXd& values) {
    return log_sum_exp(std::span<const double>(values.data(), static_cast<std::size_t>(values.size())));
}

namespace {

QuadratureResult gauss_kronrod_unchecked(const std::function<double(double)>& f, double a, double b, double rel_tol,
                                         unsigned max_depth) {
    QuadratureResult out;
    if (a == b) return out;
    double error = 0.0;
    out.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, max_depth, rel_tol, &error);
    out.error = error;
    return out;
}

void check_tolerance(const QuadratureResult& r, double a, double b, double rel_tol, double abs_tol) {
    if (!std::isfinite(r.value) || r.error > 100.0 * (rel_tol * std::abs(r.value) + abs_tol) + 1e-300) {
        fail(ErrorCode::QuadratureFailure, "adaptive quadrature did not reach tolerance on [" + std::to_string(a) +
                                               ", " + std::to_string(b) + "]");
    }
}

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol,
                                    double abs_tol, unsigned max_depth) {
    const auto out = gauss_kronrod_unchecked(f, a, b, rel_tol, max_depth);
    check_tolerance(out, a, b, rel_tol, abs_tol);
    return out;
}

QuadratureResult integrate_piecewise(const std::function<double(double)>& f, std::span<const double> breaks,
                                     double rel_tol, double abs_tol) {
    QuadratureResult total;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (!(breaks[i + 1] > breaks[i])) continue;
        const auto part = gauss_kronrod_unchecked(f, breaks[i], breaks[i + 1], rel_tol, 15);
        total.value += part.value;
        total.error += part.error;
    }
    if (!breaks.empty()) check_tolerance(total, breaks.front(), breaks.back(), rel_tol, abs_tol);
    return total;
}

}  // namespace viewcal
