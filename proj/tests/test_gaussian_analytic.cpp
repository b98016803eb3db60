#include "doctest.h"

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "support.hpp"
#include "viewcal/dual.hpp"
#include "viewcal/gaussian_analytic.hpp"
#include "viewcal/newton.hpp"
#include "viewcal/sampling.hpp"

using namespace viewcal;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

GaussianMarginalPosteriord two_asset_posterior() {
    oracle::TwoAssetCase ex;
    return build_posterior<double>(GaussianPrior<double>(ex.mean, ex.cov), LinearViewMap<double>(ex.v, 1, 2),
                                   MarginalDensity::student_t(ex.dof, ex.location, ex.scale),
                                   VectorXd::Constant(1, ex.target));
}

}  // namespace

TEST_CASE("two-asset posterior conditional law") {
    const auto post = two_asset_posterior();
    CHECK(std::abs(post.conditional_covariance()(0, 0) - 0.08506) <= 1e-3);
    CHECK(std::abs(post.intercept()(0) - 0.8735) <= 1e-3);
    CHECK(std::abs(post.gain()(0, 0) - 0.4177) <= 1e-3);
    // a + (x - E_g X) sigma_xy / sigma_xx with a = E_g X = 1.5
    CHECK(post.intercept()(0) == doctest::Approx(1.5 - 1.5 * 2.43 / 5.818).epsilon(1e-12));
    CHECK(post.mean_w()(1) == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("views equal to the prior leave it unchanged") {
    std::mt19937_64 rng(3);
    const MatrixXd s = oracle::random_spd(3, rng);
    const VectorXd mu = (VectorXd(3) << 0.2, -0.4, 1.0).finished();
    const GaussianPrior<double> prior(mu, s);
    const auto map = LinearViewMap<double>::identity(3, 1, 3);
    const auto post = build_posterior<double>(prior, map, MarginalDensity::gaussian(mu(0), std::sqrt(s(0, 0))),
                                              mu.tail(2));
    CHECK(post.lambda.cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(post.shift.cwiseAbs().maxCoeff() <= 1e-14);
    for (int i = 0; i < 10; ++i) {
        const VectorXd z = VectorXd::Random(3);
        CHECK(posterior_log_density_z(post, z) == doctest::Approx(prior.log_density(z)).epsilon(1e-12));
    }
}

TEST_CASE("random three-factor posterior: sampled means and X-marginal") {
    std::mt19937_64 rng(41);
    const GaussianPrior<double> prior((VectorXd(3) << 0.1, 0.2, -0.3).finished(), oracle::random_spd(3, rng));
    const LinearViewMap<double> map(oracle::random_well_conditioned(3, rng), 1, 3);
    const auto g = MarginalDensity::student_t(5.0, 0.4, 0.8);
    const VectorXd a = (VectorXd(2) << 0.7, -0.2).finished();
    const auto post = build_posterior<double>(prior, map, g, a);
    const auto batch = sample_posterior(post, 1000000, 77);
    const MatrixXd w = batch.z * map.matrix().transpose();
    for (int c = 0; c < 2; ++c) {
        const VectorXd col = w.col(c + 1);
        const double mean = col.mean();
        const double se = std::sqrt((col.array() - mean).square().sum() / double(col.size() - 1) / double(col.size()));
        CHECK(std::abs(mean - a(c)) <= 3.0 * se);
    }
    std::vector<double> xs(w.rows());
    for (Eigen::Index i = 0; i < w.rows(); ++i) xs[static_cast<std::size_t>(i)] = w(i, 0);
    xs.resize(100000);
    CHECK(oracle::ks_distance(xs, [](double x) { return oracle::student_t_cdf(x, 5.0, 0.4, 0.8); }) <=
          oracle::ks_critical_01(xs.size()));
}

TEST_CASE("posterior density in original coordinates") {
    const auto post = two_asset_posterior();
    // Mode point: 0.7 z1 + 0.3 z2 = 1.5 and y on the conditional mean line.
    const double x = 1.5;
    const double y = post.conditional_mean(VectorXd::Constant(1, x))(0);
    const VectorXd z = oracle::TwoAssetCase{}.v.inverse() * (VectorXd(2) << x, y).finished();
    const double expected = 3.42876 * 0.7 / std::sqrt(2.0 * std::numbers::pi) * 2.0 / (2.4120 * std::numbers::pi * std::sqrt(3.0));
    CHECK(posterior_density_z(post, z) == doctest::Approx(expected).epsilon(1e-5));
    CHECK(std::abs(0.29237 * z(0) - 0.8747 * z(1) + 0.8735) <= 1e-3);

    // identity map: z density equals the (x, y) density
    oracle::TwoAssetCase ex;
    const auto id = build_posterior<double>(GaussianPrior<double>(ex.mean, ex.cov), LinearViewMap<double>::identity(2, 1, 2),
                                            MarginalDensity::gaussian(0.5, 2.0), VectorXd::Constant(1, 0.9));
    const VectorXd p = (VectorXd(2) << 0.3, 1.2).finished();
    CHECK(posterior_log_density_z(id, p) == doctest::Approx(posterior_log_density_w(id, p)).epsilon(1e-14));
}

TEST_CASE("posterior density in z integrates to one over +-10 prior sd") {
    oracle::TwoAssetCase ex;
    const GaussianPrior<double> prior(ex.mean, ex.cov);
    const auto post = build_posterior<double>(prior, LinearViewMap<double>(ex.v, 1, 2), MarginalDensity::gaussian(1.5, 2.0),
                                              VectorXd::Constant(1, 1.5));
    const double s1 = std::sqrt(ex.cov(0, 0));
    const double s2 = std::sqrt(ex.cov(1, 1));
    const int n = 1200;
    const double h1 = 20.0 * s1 / n;
    const double h2 = 20.0 * s2 / n;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const VectorXd z = (VectorXd(2) << 1.0 - 10.0 * s1 + (i + 0.5) * h1, 1.0 - 10.0 * s2 + (j + 0.5) * h2).finished();
            total += posterior_density_z(post, z) * h1 * h2;
        }
    }
    CHECK(std::abs(total - 1.0) <= 1e-4);
}

TEST_CASE("posterior marginal of a conditional coordinate") {
    // zero correlation: unchanged Gaussian shifted to the target
    const GaussianPrior<double> indep(VectorXd::Zero(2), (MatrixXd(2, 2) << 2.0, 0.0, 0.0, 0.5).finished());
    const auto flat = build_posterior<double>(indep, LinearViewMap<double>::identity(2, 1, 2),
                                              MarginalDensity::student_t(3.0, 0.0, 1.0), VectorXd::Constant(1, 0.8));
    for (double s : {-1.0, 0.0, 0.8, 2.0})
        CHECK(posterior_marginal_y1(flat, 0, s) == doctest::Approx(oracle::normal_pdf(s, 0.8, std::sqrt(0.5))).epsilon(1e-8));

    // two-asset case: mode of Z2 near 1.5
    const auto post = two_asset_posterior();
    double best = 0.0;
    double arg = 0.0;
    for (double s = 1.0; s <= 2.0; s += 0.005) {
        const double v = posterior_marginal_z(post, 1, s);
        if (v > best) {
            best = v;
            arg = s;
        }
    }
    CHECK(std::abs(arg - 1.5) <= 0.05);

    // kernel density estimate from posterior draws
    const auto batch = sample_posterior(post, 1000000, 8);
    const VectorXd z2 = batch.z.col(1);
    const double h = 0.03;
    for (int k = 0; k < 20; ++k) {
        const double s = 0.2 + 0.13 * k;
        double kde = 0.0;
        for (Eigen::Index i = 0; i < z2.size(); ++i) kde += oracle::normal_pdf(z2(i), s, h);
        kde /= double(z2.size());
        CHECK(std::abs(kde / posterior_marginal_z(post, 1, s) - 1.0) <= 0.02);
    }
}

TEST_CASE("closed form equals the dual Newton posterior") {
    std::mt19937_64 rng(1234);
    const GaussianPrior<double> prior(VectorXd::Random(4), oracle::random_spd(4, rng));
    const LinearViewMap<double> map(oracle::random_well_conditioned(4, rng), 1, 3);
    const auto g = MarginalDensity::student_t(4.0, -0.2, 0.9);
    const ViewSet views(map, g, {MomentView::on_coordinate(2, 0.3), MomentView::on_coordinate(1, -0.6)});
    const auto closed = build_posterior(prior, views);
    const auto report = solve_lambda_newton(GaussianLinearDual(prior, views));
    REQUIRE(report.converged);
    const auto dual = posterior_with_lambda<double>(prior, map, g, report.lambda);
    for (int i = 0; i < 100; ++i) {
        const VectorXd x = VectorXd::Random(1) * 5.0;
        CHECK((closed.conditional_mean(x) - dual.conditional_mean(x)).cwiseAbs().maxCoeff() <= 1e-8);
    }
    CHECK((closed.conditional_covariance() - dual.conditional_covariance()).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("posterior X-marginal is g and the mean view holds") {
    const auto post = two_asset_posterior();
    const double sd = std::sqrt(post.conditional_covariance()(0, 0));
    for (double x = -30.0; x <= 30.0; x += 2.5) {
        const double my = post.conditional_mean(VectorXd::Constant(1, x))(0);
        const double fx = oracle::integrate(
            [&](double y) { return std::exp(posterior_log_density_w(post, (VectorXd(2) << x, y).finished())); },
            my - 15 * sd, my + 15 * sd, 1e-12);
        const double gx = oracle::student_t_pdf(x, 3.0, 1.5, 2.4120);
        CHECK(std::abs(fx - gx) <= 1e-8 * std::max(gx, 1.0));
    }
    const double pi = std::numbers::pi;
    const double ey = oracle::integrate(
        [&](double th) {
            const double x = 1.5 + 2.4120 * std::tan(th);
            const double jac = 2.4120 / (std::cos(th) * std::cos(th));
            const double my = post.conditional_mean(VectorXd::Constant(1, x))(0);
            const double inner = oracle::integrate(
                [&](double y) { return y * std::exp(posterior_log_density_w(post, (VectorXd(2) << x, y).finished())); },
                my - 15 * sd, my + 15 * sd, 1e-12);
            return inner * jac;
        },
        -pi / 2 + 1e-12, pi / 2 - 1e-12, 1e-10);
    CHECK(std::abs(ey - 1.5) <= 1e-6);
}

TEST_CASE("closed-form failures") {
    CHECK(support::error_of([&] {
              build_posterior<double>(GaussianPrior<double>(VectorXd::Zero(2), (MatrixXd(2, 2) << 0, 0, 0, 1).finished()),
                                      LinearViewMap<double>::identity(2, 1, 2), MarginalDensity::gaussian(0.0, 1.0),
                                      VectorXd::Zero(1));
          }) == ErrorCode::SingularBlock);
    // redundant conditional coordinates: Y2 = Y1 exactly
    const MatrixXd s = (MatrixXd(3, 3) << 1, 0, 0, 0, 1, 1, 0, 1, 1).finished();
    CHECK(support::error_of([&] {
              build_posterior<double>(GaussianPrior<double>(VectorXd::Zero(3), s), LinearViewMap<double>::identity(3, 1, 3),
                                      MarginalDensity::gaussian(0.0, 1.0), VectorXd::Zero(2));
          }) == ErrorCode::SingularConditionalCovariance);
}
