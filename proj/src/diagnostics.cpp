#include "viewcal/diagnostics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "viewcal/random.hpp"

namespace viewcal {
namespace {

constexpr double kPivotTolerance = 1e-12;
constexpr double kFeasibilityTolerance = 1e-10;

// Phase-one revised simplex on A w = b, w >= 0, with artificial variables.
bool simplex_feasible(const Eigen::MatrixXd& a_in, Eigen::VectorXd b) {
    const Index m = a_in.rows();
    const Index n = a_in.cols();
    Eigen::MatrixXd a = a_in;
    for (Index i = 0; i < m; ++i) {
        if (b(i) < 0.0) {
            b(i) = -b(i);
            a.row(i) = -a.row(i);
        }
    }
    std::vector<Index> basis(static_cast<std::size_t>(m));
    std::iota(basis.begin(), basis.end(), n);  // artificials n..n+m-1
    Eigen::MatrixXd b_inv = Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd x_b = b;

    auto column = [&](Index j) -> Eigen::VectorXd {
        if (j < n) return a.col(j);
        return Eigen::VectorXd::Unit(m, j - n);
    };
    const int max_iterations = static_cast<int>(std::min<Index>(50 * (m + n), 200000));
    for (int it = 0; it < max_iterations; ++it) {
        if (it > 0 && it % 64 == 0) {
            Eigen::MatrixXd basis_matrix(m, m);
            for (Index i = 0; i < m; ++i) basis_matrix.col(i) = column(basis[static_cast<std::size_t>(i)]);
            b_inv = basis_matrix.partialPivLu().inverse();
            x_b = b_inv * b;
        }
        Eigen::VectorXd cost_b(m);
        for (Index i = 0; i < m; ++i) cost_b(i) = basis[static_cast<std::size_t>(i)] >= n ? 1.0 : 0.0;
        if (cost_b.dot(x_b) <= kFeasibilityTolerance) return true;
        const Eigen::RowVectorXd y = cost_b.transpose() * b_inv;
        const Eigen::RowVectorXd reduced = -(y * a);
        Index entering = -1;
        double best = -kPivotTolerance;
        for (Index j = 0; j < n; ++j) {
            if (reduced(j) < best) {
                best = reduced(j);
                entering = j;
            }
        }
        if (entering < 0) return false;
        const Eigen::VectorXd d = b_inv * a.col(entering);
        Index leaving = -1;
        double ratio = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < m; ++i) {
            if (d(i) > kPivotTolerance) {
                const double r = x_b(i) / d(i);
                if (r < ratio) {
                    ratio = r;
                    leaving = i;
                }
            }
        }
        if (leaving < 0) return false;  // unbounded direction cannot occur with the simplex row
        const double pivot = d(leaving);
        x_b -= ratio * d;
        x_b(leaving) = ratio;
        const Eigen::RowVectorXd pivot_row = b_inv.row(leaving) / pivot;
        for (Index i = 0; i < m; ++i) {
            if (i != leaving) b_inv.row(i) -= d(i) * pivot_row;
        }
        b_inv.row(leaving) = pivot_row;
        x_b = x_b.cwiseMax(0.0);
        basis[static_cast<std::size_t>(leaving)] = entering;
    }
    fail(ErrorCode::InconclusiveSample, "hull test: simplex iteration limit reached");
}

double cross(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

std::vector<Eigen::Vector2d> monotone_chain(std::vector<Eigen::Vector2d> p) {
    std::sort(p.begin(), p.end(), [](const auto& l, const auto& r) {
        return l.x() < r.x() || (l.x() == r.x() && l.y() < r.y());
    });
    p.erase(std::unique(p.begin(), p.end()), p.end());
    if (p.size() < 3) return p;
    std::vector<Eigen::Vector2d> hull(2 * p.size());
    std::size_t k = 0;
    for (const auto& q : p) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], q) <= 0.0) --k;
        hull[k++] = q;
    }
    for (std::size_t i = p.size() - 1, t = k + 1; i > 0; --i) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], p[i - 1]) <= 0.0) --k;
        hull[k++] = p[i - 1];
    }
    hull.resize(k - 1);
    return hull;
}

bool in_polygon(const std::vector<Eigen::Vector2d>& hull, const Eigen::Vector2d& q) {
    if (hull.size() == 1) return (hull[0] - q).norm() <= kPivotTolerance;
    if (hull.size() == 2) {
        const Eigen::Vector2d ab = hull[1] - hull[0];
        const double t = ab.dot(q - hull[0]) / ab.squaredNorm();
        return t >= 0.0 && t <= 1.0 && (hull[0] + t * ab - q).norm() <= kPivotTolerance;
    }
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const auto& a = hull[i];
        const auto& b = hull[(i + 1) % hull.size()];
        if (cross(a, b, q) < 0.0) return false;
    }
    return true;
}

}  // namespace

bool in_convex_hull_lp(const Eigen::MatrixXd& points, const Eigen::VectorXd& c) {
    const Index k = points.rows();
    Eigen::MatrixXd a(k + 1, points.cols());
    a.topRows(k) = points;
    a.row(k).setOnes();
    Eigen::VectorXd b(k + 1);
    b << c, 1.0;
    return simplex_feasible(a, b);
}

ExistenceStatus hull_membership(const Eigen::MatrixXd& points, const Eigen::VectorXd& c, double rel_tol) {
    const Index k = points.rows();
    require(c.size() == k, ErrorCode::InvalidArgument, "hull_membership: target dimension mismatch");
    require(points.cols() > 0, ErrorCode::InvalidArgument, "hull_membership: no sample points");
    require(points.allFinite() && c.allFinite(), ErrorCode::InvalidArgument, "hull_membership: non-finite input");
    if (k == 0) return ExistenceStatus::interior;

    Eigen::VectorXd spread = points.rowwise().maxCoeff() - points.rowwise().minCoeff();
    for (Index i = 0; i < k; ++i)
        if (!(spread(i) > 0.0)) spread(i) = std::max(1.0, std::abs(c(i)));
    // Centered at c and scaled per coordinate; c itself is the origin.
    const Eigen::MatrixXd scaled = spread.cwiseInverse().asDiagonal() * (points.colwise() - c);

    std::function<bool(const Eigen::VectorXd&)> contains;
    std::vector<Eigen::Vector2d> polygon;
    if (k == 1) {
        const double lo = scaled.minCoeff(), hi = scaled.maxCoeff();
        contains = [lo, hi](const Eigen::VectorXd& q) { return q(0) >= lo && q(0) <= hi; };
    } else if (k == 2) {
        std::vector<Eigen::Vector2d> pts(static_cast<std::size_t>(scaled.cols()));
        for (Index j = 0; j < scaled.cols(); ++j) pts[static_cast<std::size_t>(j)] = scaled.col(j);
        polygon = monotone_chain(std::move(pts));
        contains = [&polygon](const Eigen::VectorXd& q) { return in_polygon(polygon, Eigen::Vector2d(q(0), q(1))); };
    } else {
        contains = [&scaled](const Eigen::VectorXd& q) { return in_convex_hull_lp(scaled, q); };
    }

    if (!contains(Eigen::VectorXd::Zero(k))) return ExistenceStatus::outside;
    for (Index i = 0; i < k; ++i) {
        for (double sign : {-1.0, 1.0}) {
            if (!contains(sign * rel_tol * Eigen::VectorXd::Unit(k, i))) return ExistenceStatus::boundary;
        }
    }
    return ExistenceStatus::interior;
}

Eigen::MatrixXd sample_h_images(const GenericPrior& prior, const std::optional<MarginalDensity>& marginal,
                                const std::vector<MomentFunction>& moments, std::size_t n, std::uint64_t seed) {
    require(!marginal || marginal->dimension() == prior.x_dimension(), ErrorCode::InvalidArgument,
            "sample_h_images: marginal dimension mismatch");
    require(marginal || prior.x_dimension() == 0, ErrorCode::InvalidArgument,
            "sample_h_images: X block needs a marginal view");
    const Index k = static_cast<Index>(moments.size());
    Eigen::MatrixXd out(k, static_cast<Index>(n));
    StreamCursor cursor(seed);
    for (std::size_t r = 0; r < n; ++r) {
        auto& rng = cursor.at(r);
        const Eigen::VectorXd x = marginal ? marginal->sample(rng) : Eigen::VectorXd();
        const Eigen::VectorXd y = prior.sample_conditional(x, rng);
        for (Index i = 0; i < k; ++i) out(i, static_cast<Index>(r)) = moments[static_cast<std::size_t>(i)](x, y);
    }
    return out;
}

ExistenceStatus existence_check(const GenericPrior& prior, const std::optional<MarginalDensity>& marginal,
                                const std::vector<MomentFunction>& moments, const Eigen::VectorXd& targets,
                                std::size_t n_samples, std::uint64_t seed, double rel_tol) {
    return hull_membership(sample_h_images(prior, marginal, moments, n_samples, seed), targets, rel_tol);
}

IndependenceReport independence_check(const GenericPrior& prior, const std::optional<MarginalDensity>& marginal,
                                      const std::vector<MomentFunction>& moments, std::size_t n_samples,
                                      std::uint64_t seed) {
    require(n_samples > 0, ErrorCode::InvalidArgument, "independence_check: need samples");
    const Index k = static_cast<Index>(moments.size());
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(k, k);
    StreamCursor cursor(seed);
    Eigen::VectorXd h1(k), h2(k);
    for (std::size_t r = 0; r < n_samples; ++r) {
        auto& rng = cursor.at(r);
        const Eigen::VectorXd x = marginal ? marginal->sample(rng) : Eigen::VectorXd();
        const Eigen::VectorXd y1 = prior.sample_conditional(x, rng);
        const Eigen::VectorXd y2 = prior.sample_conditional(x, rng);
        for (Index i = 0; i < k; ++i) {
            h1(i) = moments[static_cast<std::size_t>(i)](x, y1);
            h2(i) = moments[static_cast<std::size_t>(i)](x, y2);
        }
        const Eigen::VectorXd d = h1 - h2;
        sum.noalias() += 0.5 * d * d.transpose();
    }
    IndependenceReport out;
    out.covariance = sum / double(n_samples);
    if (k > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.covariance, Eigen::EigenvaluesOnly);
        out.min_eigenvalue = eig.eigenvalues()(0);
    }
    return out;
}

double independence_check(const TiltedModel& model) {
    const auto state = model.evaluate(Eigen::VectorXd::Zero(model.dimension()));
    if (state.hessian.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(state.hessian, Eigen::EigenvaluesOnly);
    return eig.eigenvalues()(0);
}

}  // namespace viewcal
