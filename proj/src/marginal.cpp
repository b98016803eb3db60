#include "viewcal/marginal.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "viewcal/quadrature.hpp"

namespace viewcal {
namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

double t_log_norm(double dof, double scale) {
    return std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) - 0.5 * std::log(dof * std::numbers::pi) -
           std::log(scale);
}

double standard_normal_quantile(double u) {
    static const boost::math::normal_distribution<double> standard;
    return boost::math::quantile(standard, u);
}

}  // namespace

std::string to_string(MarginalKind kind) {
    switch (kind) {
        case MarginalKind::gaussian: return "gaussian";
        case MarginalKind::student_t: return "student_t";
        case MarginalKind::grid: return "grid";
    }
    return "unknown";
}

MarginalDensity MarginalDensity::gaussian(double mean, double stddev) {
    require(std::isfinite(mean) && stddev > 0.0 && std::isfinite(stddev), ErrorCode::InvalidArgument,
            "gaussian marginal: need finite mean and stddev > 0");
    return gaussian(Eigen::VectorXd::Constant(1, mean), Eigen::MatrixXd::Constant(1, 1, stddev * stddev));
}

MarginalDensity MarginalDensity::gaussian(Eigen::VectorXd mean, Eigen::MatrixXd covariance) {
    const auto d = mean.size();
    require(d >= 1 && covariance.rows() == d && covariance.cols() == d, ErrorCode::InvalidArgument,
            "gaussian marginal: covariance must be d x d");
    Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (covariance + covariance.transpose()));
    require(llt.info() == Eigen::Success, ErrorCode::InvalidArgument,
            "gaussian marginal: covariance not positive definite");
    Gaussian g;
    g.mean = std::move(mean);
    g.covariance = std::move(covariance);
    g.chol = llt.matrixL();
    g.log_det = 2.0 * g.chol.diagonal().array().log().sum();
    return MarginalDensity(std::move(g));
}

MarginalDensity MarginalDensity::student_t(double dof, double location, double scale,
                                           std::optional<double> tail_index) {
    require(dof > 1.0 && std::isfinite(dof), ErrorCode::InvalidArgument, "student_t marginal: need dof > 1");
    require(scale > 0.0 && std::isfinite(scale) && std::isfinite(location), ErrorCode::InvalidArgument,
            "student_t marginal: need finite location and scale > 0");
    if (tail_index) {
        require(std::abs(*tail_index - (dof + 1.0)) <= 1e-12 * (dof + 1.0), ErrorCode::InvalidArgument,
                "student_t marginal: tail index must equal dof + 1");
    }
    MarginalDensity out(StudentT{dof, location, scale, t_log_norm(dof, scale)});
    out.tail_index_ = dof + 1.0;
    return out;
}

MarginalDensity MarginalDensity::grid(std::vector<double> knots, std::vector<double> densities) {
    require(knots.size() >= 2 && knots.size() == densities.size(), ErrorCode::InvalidArgument,
            "grid marginal: need >= 2 knots and one density per knot");
    for (std::size_t i = 0; i < knots.size(); ++i) {
        require(std::isfinite(knots[i]) && std::isfinite(densities[i]) && densities[i] >= 0.0,
                ErrorCode::InvalidArgument, "grid marginal: densities must be finite and nonnegative");
        if (i > 0) {
            require(knots[i] > knots[i - 1], ErrorCode::InvalidArgument, "grid marginal: knots must increase");
        }
    }
    Grid g{std::move(knots), std::move(densities), {}};
    g.cdf.assign(g.knots.size(), 0.0);
    for (std::size_t i = 1; i < g.knots.size(); ++i) {
        g.cdf[i] = g.cdf[i - 1] + 0.5 * (g.densities[i] + g.densities[i - 1]) * (g.knots[i] - g.knots[i - 1]);
    }
    const double mass = g.cdf.back();
    require(mass > 0.0, ErrorCode::InvalidArgument, "grid marginal: zero mass");
    for (auto& v : g.densities) v /= mass;
    for (auto& v : g.cdf) v /= mass;
    g.cdf.back() = 1.0;
    return MarginalDensity(std::move(g));
}

MarginalDensity MarginalDensity::tabulate(const MarginalDensity& source, double lo, double hi, std::size_t n) {
    require(source.dimension() == 1 && source.kind() != MarginalKind::grid, ErrorCode::InvalidArgument,
            "tabulate: source must be univariate analytic");
    require(n >= 2 && hi > lo, ErrorCode::InvalidArgument, "tabulate: bad grid");
    const double covered = source.cdf(hi) - source.cdf(lo);
    require(covered >= 0.9999, ErrorCode::InvalidArgument, "tabulate: grid covers less than 99.99% of mass");
    std::vector<double> knots(n), dens(n);
    for (std::size_t i = 0; i < n; ++i) {
        knots[i] = lo + (hi - lo) * double(i) / double(n - 1);
        dens[i] = source.density(knots[i]);
    }
    return grid(std::move(knots), std::move(dens));
}

MarginalKind MarginalDensity::kind() const {
    return std::visit(overloaded{[](const Gaussian&) { return MarginalKind::gaussian; },
                                 [](const StudentT&) { return MarginalKind::student_t; },
                                 [](const Grid&) { return MarginalKind::grid; }},
                      params_);
}

Eigen::Index MarginalDensity::dimension() const {
    if (const auto* g = std::get_if<Gaussian>(&params_)) return g->mean.size();
    return 1;
}

double MarginalDensity::log_density(double x) const {
    return std::visit(
        overloaded{
            [&](const Gaussian& g) {
                require(g.mean.size() == 1, ErrorCode::InvalidArgument, "log_density(double) on multivariate g");
                const double sd = g.chol(0, 0);
                const double r = (x - g.mean(0)) / sd;
                return -0.5 * (r * r + kLogTwoPi) - std::log(sd);
            },
            [&](const StudentT& t) {
                const double r = (x - t.location) / t.scale;
                return t.log_norm - 0.5 * (t.dof + 1.0) * std::log1p(r * r / t.dof);
            },
            [&](const Grid&) {
                const double d = density(x);
                return d > 0.0 ? std::log(d) : -std::numeric_limits<double>::infinity();
            }},
        params_);
}

double MarginalDensity::density(double x) const {
    if (const auto* g = std::get_if<Grid>(&params_)) {
        const auto& k = g->knots;
        if (x < k.front() || x > k.back()) return 0.0;
        auto it = std::upper_bound(k.begin(), k.end(), x);
        if (it == k.end()) return g->densities.back();
        const auto i = static_cast<std::size_t>(it - k.begin());
        const double t = (x - k[i - 1]) / (k[i] - k[i - 1]);
        return (1.0 - t) * g->densities[i - 1] + t * g->densities[i];
    }
    return std::exp(log_density(x));
}

double MarginalDensity::log_density(const Eigen::VectorXd& x) const {
    if (const auto* g = std::get_if<Gaussian>(&params_)) {
        require(x.size() == g->mean.size(), ErrorCode::InvalidArgument, "log_density: dimension mismatch");
        const Eigen::VectorXd w = g->chol.triangularView<Eigen::Lower>().solve(x - g->mean);
        return -0.5 * (w.squaredNorm() + g->log_det + double(x.size()) * kLogTwoPi);
    }
    require(x.size() == 1, ErrorCode::InvalidArgument, "log_density: dimension mismatch");
    return log_density(x(0));
}

double MarginalDensity::density(const Eigen::VectorXd& x) const {
    if (x.size() == 1 && std::holds_alternative<Grid>(params_)) return density(x(0));
    return std::exp(log_density(x));
}

double MarginalDensity::cdf(double x) const {
    return std::visit(
        overloaded{[&](const Gaussian& g) {
                       require(g.mean.size() == 1, ErrorCode::InvalidArgument, "cdf on multivariate g");
                       return boost::math::cdf(boost::math::normal_distribution<double>(g.mean(0), g.chol(0, 0)), x);
                   },
                   [&](const StudentT& t) {
                       return boost::math::cdf(boost::math::students_t_distribution<double>(t.dof),
                                               (x - t.location) / t.scale);
                   },
                   [&](const Grid& g) {
                       const auto& k = g.knots;
                       if (x <= k.front()) return 0.0;
                       if (x >= k.back()) return 1.0;
                       const auto i = static_cast<std::size_t>(std::upper_bound(k.begin(), k.end(), x) - k.begin());
                       const double h = x - k[i - 1];
                       const double slope = (g.densities[i] - g.densities[i - 1]) / (k[i] - k[i - 1]);
                       return g.cdf[i - 1] + g.densities[i - 1] * h + 0.5 * slope * h * h;
                   }},
        params_);
}

double MarginalDensity::quantile(double u) const {
    require(u > 0.0 && u < 1.0, ErrorCode::InvalidArgument, "quantile: u must lie in (0,1)");
    return std::visit(
        overloaded{[&](const Gaussian& g) {
                       require(g.mean.size() == 1, ErrorCode::InvalidArgument, "quantile on multivariate g");
                       return g.mean(0) + g.chol(0, 0) * standard_normal_quantile(u);
                   },
                   [&](const StudentT& t) {
                       return t.location +
                              t.scale * boost::math::quantile(boost::math::students_t_distribution<double>(t.dof), u);
                   },
                   [&](const Grid& g) {
                       // Exact inverse of the piecewise-quadratic CDF.
                       const auto& k = g.knots;
                       auto it = std::upper_bound(g.cdf.begin(), g.cdf.end(), u);
                       std::size_t i = static_cast<std::size_t>(it - g.cdf.begin());
                       i = std::clamp<std::size_t>(i, 1, k.size() - 1);
                       const double width = k[i] - k[i - 1];
                       const double d0 = g.densities[i - 1];
                       const double slope = (g.densities[i] - d0) / width;
                       const double need = u - g.cdf[i - 1];
                       double h;
                       if (std::abs(slope) * width <= 1e-14 * std::max(d0, 1e-300)) {
                           h = d0 > 0.0 ? need / d0 : 0.0;
                       } else {
                           const double disc = std::max(d0 * d0 + 2.0 * slope * need, 0.0);
                           h = 2.0 * need / (d0 + std::sqrt(disc));
                       }
                       return k[i - 1] + std::clamp(h, 0.0, width);
                   }},
        params_);
}

double MarginalDensity::variance() const {
    return std::visit(overloaded{[&](const Gaussian& g) {
                                     require(g.mean.size() == 1, ErrorCode::InvalidArgument,
                                             "variance on multivariate g");
                                     return g.covariance(0, 0);
                                 },
                                 [&](const StudentT& t) {
                                     return t.dof > 2.0 ? t.scale * t.scale * t.dof / (t.dof - 2.0)
                                                        : std::numeric_limits<double>::infinity();
                                 },
                                 [&](const Grid& g) {
                                     // exact for piecewise-linear density
                                     double m1 = 0.0, m2 = 0.0;
                                     for (std::size_t i = 1; i < g.knots.size(); ++i) {
                                         const double a = g.knots[i - 1], b = g.knots[i];
                                         const double fa = g.densities[i - 1], fb = g.densities[i];
                                         const double h = b - a;
                                         m1 += h / 6.0 * (fa * (2 * a + b) + fb * (a + 2 * b));
                                         m2 += h / 12.0 * (fa * (3 * a * a + 2 * a * b + b * b) +
                                                           fb * (a * a + 2 * a * b + 3 * b * b));
                                     }
                                     return m2 - m1 * m1;
                                 }},
                      params_);
}

std::pair<double, double> MarginalDensity::support() const {
    return std::visit(overloaded{[&](const Gaussian& g) {
                                     require(g.mean.size() == 1, ErrorCode::InvalidArgument,
                                             "support on multivariate g");
                                     const double sd = g.chol(0, 0);
                                     return std::pair{g.mean(0) - 40.0 * sd, g.mean(0) + 40.0 * sd};
                                 },
                                 [&](const StudentT& t) {
                                     return std::pair{t.location - 200.0 * t.scale, t.location + 200.0 * t.scale};
                                 },
                                 [&](const Grid& g) { return std::pair{g.knots.front(), g.knots.back()}; }},
                      params_);
}

Eigen::VectorXd MarginalDensity::mean() const {
    return std::visit(overloaded{[&](const Gaussian& g) { return Eigen::VectorXd(g.mean); },
                                 [&](const StudentT& t) { return Eigen::VectorXd::Constant(1, t.location).eval(); },
                                 [&](const Grid& g) {
                                     double m1 = 0.0;
                                     for (std::size_t i = 1; i < g.knots.size(); ++i) {
                                         const double a = g.knots[i - 1], b = g.knots[i];
                                         m1 += (b - a) / 6.0 *
                                               (g.densities[i - 1] * (2 * a + b) + g.densities[i] * (a + 2 * b));
                                     }
                                     return Eigen::VectorXd::Constant(1, m1).eval();
                                 }},
                      params_);
}

double MarginalDensity::d_log_density(double x, MarginalParameter parameter) const {
    if (const auto* t = std::get_if<StudentT>(&params_)) {
        const double r = x - t->location;
        const double n = t->dof, s = t->scale;
        const double q = n * s * s + r * r;
        switch (parameter) {
            case MarginalParameter::location: return (n + 1.0) * r / q;
            case MarginalParameter::scale: return -1.0 / s + (n + 1.0) * r * r / (s * q);
            case MarginalParameter::degrees_of_freedom: {
                using boost::math::digamma;
                const double z = r / s;
                return 0.5 * (digamma(0.5 * (n + 1.0)) - digamma(0.5 * n) - 1.0 / n - std::log1p(z * z / n) +
                              (n + 1.0) * z * z / (n * (n + z * z)));
            }
        }
    }
    if (const auto* g = std::get_if<Gaussian>(&params_); g && g->mean.size() == 1) {
        const double sd = g->chol(0, 0);
        const double r = x - g->mean(0);
        switch (parameter) {
            case MarginalParameter::location: return r / (sd * sd);
            case MarginalParameter::scale: return -1.0 / sd + r * r / (sd * sd * sd);
            case MarginalParameter::degrees_of_freedom: break;
        }
    }
    fail(ErrorCode::InvalidArgument, "d_log_density: parameter not available for this marginal kind");
}

double MarginalDensity::parameter(MarginalParameter parameter) const {
    if (const auto* t = std::get_if<StudentT>(&params_)) {
        switch (parameter) {
            case MarginalParameter::location: return t->location;
            case MarginalParameter::scale: return t->scale;
            case MarginalParameter::degrees_of_freedom: return t->dof;
        }
    }
    if (const auto* g = std::get_if<Gaussian>(&params_); g && g->mean.size() == 1) {
        if (parameter == MarginalParameter::location) return g->mean(0);
        if (parameter == MarginalParameter::scale) return g->chol(0, 0);
    }
    fail(ErrorCode::InvalidArgument, "parameter: not available for this marginal kind");
}

MarginalDensity MarginalDensity::with_parameter(MarginalParameter parameter, double value) const {
    if (const auto* t = std::get_if<StudentT>(&params_)) {
        double dof = t->dof, loc = t->location, scale = t->scale;
        switch (parameter) {
            case MarginalParameter::location: loc = value; break;
            case MarginalParameter::scale: scale = value; break;
            case MarginalParameter::degrees_of_freedom: dof = value; break;
        }
        return student_t(dof, loc, scale);
    }
    if (const auto* g = std::get_if<Gaussian>(&params_); g && g->mean.size() == 1) {
        if (parameter == MarginalParameter::location) return gaussian(value, g->chol(0, 0));
        if (parameter == MarginalParameter::scale) return gaussian(g->mean(0), value);
    }
    fail(ErrorCode::InvalidArgument, "with_parameter: not available for this marginal kind");
}

OuterNodes MarginalDensity::outer_nodes(std::size_t count) const {
    OuterNodes out;
    if (const auto* g = std::get_if<Grid>(&params_)) {
        const auto n = g->knots.size();
        out.points.resize(1, static_cast<Eigen::Index>(n));
        out.weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            const auto j = static_cast<Eigen::Index>(i);
            out.points(0, j) = g->knots[i];
            const double left = i > 0 ? g->knots[i] - g->knots[i - 1] : 0.0;
            const double right = i + 1 < n ? g->knots[i + 1] - g->knots[i] : 0.0;
            out.weights(j) = 0.5 * (left + right) * g->densities[i];
        }
        out.weights /= out.weights.sum();
        return out;
    }
    require(count >= 1, ErrorCode::InvalidArgument, "outer_nodes: count must be positive");
    const auto n = static_cast<Eigen::Index>(count);
    out.weights = Eigen::VectorXd::Constant(n, 1.0 / double(n));
    if (dimension() == 1) {
        out.points.resize(1, n);
        for (Eigen::Index i = 0; i < n; ++i) out.points(0, i) = quantile((double(i) + 0.5) / double(n));
        return out;
    }
    const auto& g = std::get<Gaussian>(params_);
    const int d = static_cast<int>(g.mean.size());
    out.points.resize(d, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd u = halton_point(static_cast<std::size_t>(i + 1), d);
        for (int k = 0; k < d; ++k) u(k) = standard_normal_quantile(u(k));
        out.points.col(i) = g.mean + g.chol * u;
    }
    return out;
}

Eigen::VectorXd MarginalDensity::sample(std::mt19937_64& rng) const {
    if (const auto* g = std::get_if<Gaussian>(&params_); g && g->mean.size() > 1) {
        std::normal_distribution<double> normal;
        Eigen::VectorXd u(g->mean.size());
        for (Eigen::Index k = 0; k < u.size(); ++k) u(k) = normal(rng);
        return g->mean + g->chol * u;
    }
    // Inverse-CDF on a uniform in the open interval (0,1).
    double u;
    do {
        u = std::generate_canonical<double, 53>(rng);
    } while (u <= 0.0 || u >= 1.0);
    return Eigen::VectorXd::Constant(1, quantile(u));
}

double trapezoid_mass(const MarginalDensity& g, std::size_t intervals) {
    require(g.dimension() == 1, ErrorCode::InvalidArgument, "trapezoid_mass: univariate only");
    if (const auto* grid = std::get_if<MarginalDensity::Grid>(&g.params())) {
        CompensatedSum sum;
        for (std::size_t i = 1; i < grid->knots.size(); ++i) {
            sum.add(0.5 * (grid->densities[i] + grid->densities[i - 1]) * (grid->knots[i] - grid->knots[i - 1]));
        }
        return sum.value();
    }
    auto [lo, hi] = g.support();
    const double h = (hi - lo) / double(intervals);
    CompensatedSum sum;
    for (std::size_t i = 0; i <= intervals; ++i) {
        const double w = (i == 0 || i == intervals) ? 0.5 : 1.0;
        sum.add(w * g.density(lo + h * double(i)));
    }
    return sum.value() * h;
}

}  // namespace viewcal
