#include "doctest.h"

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "support.hpp"
#include "viewcal/entropy.hpp"
#include "viewcal/gaussian.hpp"
#include "viewcal/gaussian_analytic.hpp"
#include "viewcal/marginal.hpp"

using namespace viewcal;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("transform_prior reproduces the two-asset portfolio covariance") {
    oracle::TwoAssetCase ex;
    const GaussianPrior<double> prior(ex.mean, ex.cov);
    const LinearViewMap<double> map(ex.v, 1, 2);
    const auto w = transform_prior(prior, map);
    CHECK(w.mean()(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(w.mean()(1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(w.covariance()(0, 0) - 5.818) <= 1e-3);
    CHECK(std::abs(w.covariance()(0, 1) - 2.43) <= 1e-3);
    CHECK(std::abs(w.covariance()(1, 1) - 1.1) <= 1e-3);

    const auto cond = gaussian_conditional(w, 1);
    CHECK(std::abs(cond.covariance(0, 0) - 0.08506) <= 1e-3);
    CHECK(cond.covariance(0, 0) == doctest::Approx(1.1 - 2.43 * 2.43 / 5.818).epsilon(1e-12));
}

TEST_CASE("gaussian_conditional with independent blocks leaves Y untouched") {
    MatrixXd s = MatrixXd::Zero(3, 3);
    s.diagonal() << 2.0, 0.5, 3.0;
    const GaussianPrior<double> prior((VectorXd(3) << 1.0, -1.0, 2.0).finished(), s);
    const auto cond = gaussian_conditional(prior, 1);
    CHECK(cond.gain.cwiseAbs().maxCoeff() == 0.0);
    CHECK(cond.covariance(0, 0) == 0.5);
    CHECK(cond.covariance(1, 1) == 3.0);
    const VectorXd x = VectorXd::Constant(1, 7.0);
    CHECK(cond.mean(x)(0) == -1.0);
    CHECK(cond.mean(x)(1) == 2.0);
}

TEST_CASE("gaussian_conditional matches an explicit inverse Schur complement") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const MatrixXd s = oracle::random_spd(4, rng);
        const GaussianPrior<double> prior(VectorXd::Zero(4), s);
        const auto cond = gaussian_conditional(prior, 2);
        CHECK((cond.covariance - oracle::schur_complement(s, 2)).cwiseAbs().maxCoeff() <= 1e-12);
        const MatrixXd gain = s.bottomLeftCorner(2, 2) * s.topLeftCorner(2, 2).fullPivLu().inverse();
        CHECK((cond.gain - gain).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("conditional times marginal recombines to the joint Gaussian density") {
    oracle::TwoAssetCase ex;
    const GaussianPrior<double> prior(ex.mean, ex.cov);
    const auto cond = gaussian_conditional(prior, 1);
    const double sxx = ex.cov(0, 0);
    const double det = ex.cov.determinant();
    const MatrixXd inv = ex.cov.inverse();
    for (double x = -8.0; x <= 10.0; x += 0.75) {
        for (double y = -3.0; y <= 5.0; y += 0.5) {
            const double fx = oracle::normal_pdf(x, ex.mean(0), std::sqrt(sxx));
            const double fy = oracle::normal_pdf(y, cond.mean(VectorXd::Constant(1, x))(0),
                                                 std::sqrt(cond.covariance(0, 0)));
            const VectorXd d = (VectorXd(2) << x - 1.0, y - 1.0).finished();
            const double joint = std::exp(-0.5 * d.dot(inv * d)) / (2.0 * std::numbers::pi * std::sqrt(det));
            CHECK(std::abs(fx * fy - joint) <= 1e-6 * std::max(joint, 1e-300) + 1e-300);
        }
    }
}

TEST_CASE("transform_prior identity, round trip and singular maps") {
    std::mt19937_64 rng(5);
    const MatrixXd s = oracle::random_spd(4, rng);
    const VectorXd mu = (VectorXd(4) << 0.1, -0.2, 0.3, 0.4).finished();
    const GaussianPrior<double> prior(mu, s);

    const auto same = transform_prior(prior, LinearViewMap<double>::identity(4, 1, 2));
    CHECK((same.mean() - mu).cwiseAbs().maxCoeff() == 0.0);
    CHECK((same.covariance() - prior.covariance()).cwiseAbs().maxCoeff() == 0.0);

    const LinearViewMap<double> map(oracle::random_well_conditioned(4, rng), 1, 3);
    const auto back = transform_prior(transform_prior(prior, map), map.inverted());
    CHECK((back.mean() - mu).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((back.covariance() - prior.covariance()).cwiseAbs().maxCoeff() <= 1e-10);

    MatrixXd singular = MatrixXd::Identity(3, 3);
    singular.row(2) = singular.row(0) + singular.row(1);
    CHECK(support::error_of([&] { LinearViewMap<double>(singular, 1, 2); }) == ErrorCode::SingularMap);
}

TEST_CASE("transform_prior agrees with mapped Monte Carlo draws") {
    std::mt19937_64 rng(2024);
    const int n = 3;
    const MatrixXd s = oracle::random_spd(n, rng);
    const VectorXd mu = (VectorXd(n) << 0.5, -1.0, 2.0).finished();
    const MatrixXd v = oracle::random_well_conditioned(n, rng);
    const auto w = transform_prior(GaussianPrior<double>(mu, s), LinearViewMap<double>(v, 1, 2));

    const MatrixXd l = s.llt().matrixL();
    std::normal_distribution<double> nd;
    const int draws = 1000000;
    VectorXd sum = VectorXd::Zero(n);
    MatrixXd outer = MatrixXd::Zero(n, n);
    VectorXd u(n);
    for (int i = 0; i < draws; ++i) {
        for (int j = 0; j < n; ++j) u(j) = nd(rng);
        const VectorXd z = v * (mu + l * u);
        sum += z;
        outer += z * z.transpose();
    }
    const VectorXd mean = sum / draws;
    const MatrixXd cov = outer / draws - mean * mean.transpose();
    const MatrixXd& sw = w.covariance();
    for (int i = 0; i < n; ++i) {
        CHECK(std::abs(mean(i) - w.mean()(i)) <= 3.0 * std::sqrt(sw(i, i) / draws));
        for (int j = 0; j < n; ++j) {
            const double se = std::sqrt((sw(i, i) * sw(j, j) + sw(i, j) * sw(i, j)) / draws);
            CHECK(std::abs(cov(i, j) - sw(i, j)) <= 3.0 * se);
        }
    }
}

TEST_CASE("prior validation") {
    MatrixXd asym = MatrixXd::Identity(2, 2);
    asym(0, 1) = 0.5;
    CHECK(support::error_of([&] { GaussianPrior<double>(VectorXd::Zero(2), asym); }) == ErrorCode::InvalidArgument);
    MatrixXd indefinite = (MatrixXd(2, 2) << 1.0, 2.0, 2.0, 1.0).finished();
    CHECK(support::error_of([&] { GaussianPrior<double>(VectorXd::Zero(2), indefinite); }) ==
          ErrorCode::InvalidArgument);
    MatrixXd rank_one = (MatrixXd(2, 2) << 1.0, 1.0, 1.0, 1.0).finished();
    const GaussianPrior<double> degenerate(VectorXd::Zero(2), rank_one);
    CHECK(support::error_of([&] { gaussian_conditional(degenerate, 1); }) == std::nullopt);
    MatrixXd zero_block = MatrixXd::Zero(2, 2);
    zero_block(1, 1) = 1.0;
    CHECK(support::error_of([&] { gaussian_conditional(GaussianPrior<double>(VectorXd::Zero(2), zero_block), 1); }) ==
          ErrorCode::SingularBlock);

    CHECK(support::error_of([] { FactorVector(VectorXd::Zero(2), {"a"}); }) == ErrorCode::InvalidArgument);
    VectorXd bad = VectorXd::Zero(2);
    bad(1) = std::numeric_limits<double>::quiet_NaN();
    CHECK(support::error_of([&] { FactorVector{bad}; }) == ErrorCode::InvalidArgument);
    const FactorVector named(VectorXd::Zero(2));
    CHECK(named.labels == std::vector<std::string>{"z1", "z2"});
}

TEST_CASE("marginal densities evaluate the published formulas") {
    const auto t = MarginalDensity::student_t(3.0, 1.5, 2.4120);
    const double mode = 2.0 / (2.4120 * std::numbers::pi * std::sqrt(3.0));
    CHECK(t.density(1.5) == doctest::Approx(mode).epsilon(1e-13));
    CHECK(std::abs(t.density(1.5) - 0.15231) <= 1e-4);
    for (double x : {-20.0, -3.0, 0.0, 4.0, 50.0})
        CHECK(t.density(x) == doctest::Approx(oracle::student_t_pdf(x, 3.0, 1.5, 2.4120)).epsilon(1e-12));

    const auto n01 = MarginalDensity::gaussian(0.0, 1.0);
    CHECK(n01.density(0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-14));

    const auto grid = MarginalDensity::tabulate(t, -400.0, 400.0, 80001);
    for (double x : {-5.0, 0.3, 1.5, 2.0, 9.1})
        CHECK(std::abs(grid.density(x) - t.density(x)) <= 1e-4);
    CHECK(grid.density(-401.0) == 0.0);
    CHECK(grid.density(401.0) == 0.0);
}

TEST_CASE("marginal densities integrate to one over their support") {
    const auto t = MarginalDensity::student_t(3.0, 1.5, 2.4120);
    std::vector<MarginalDensity> kinds{MarginalDensity::gaussian(0.2, 0.7), t,
                                       MarginalDensity::student_t(6.0, 0.0035, 0.0219),
                                       MarginalDensity::tabulate(t, -500.0, 500.0, 5001),
                                       MarginalDensity::grid({0.0, 1.0, 2.0, 3.0}, {0.0, 2.0, 2.0, 0.0})};
    for (const auto& g : kinds) CHECK(std::abs(trapezoid_mass(g) - 1.0) <= 1e-6);
}

TEST_CASE("marginal validation and tail index") {
    CHECK(MarginalDensity::student_t(3.0, 0.0, 1.0, 4.0).tail_index() == 4.0);
    CHECK(support::error_of([] { MarginalDensity::student_t(3.0, 0.0, 1.0, 3.0); }) == ErrorCode::InvalidArgument);
    CHECK(support::error_of([] { MarginalDensity::student_t(1.0, 0.0, 1.0); }) == ErrorCode::InvalidArgument);
    CHECK(support::error_of([] { MarginalDensity::student_t(3.0, 0.0, -1.0); }) == ErrorCode::InvalidArgument);
    CHECK(support::error_of([] { MarginalDensity::grid({0.0, 1.0, 1.0}, {1.0, 1.0, 1.0}); }) ==
          ErrorCode::InvalidArgument);
    CHECK(support::error_of([] { MarginalDensity::grid({0.0, 1.0, 2.0}, {1.0, -1.0, 1.0}); }) ==
          ErrorCode::InvalidArgument);
    const auto t = MarginalDensity::student_t(3.0, 0.0, 1.0);
    CHECK(support::error_of([&] { MarginalDensity::tabulate(t, -3.0, 3.0, 101); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("relative entropy examples") {
    const Eigen::VectorXd p = (Eigen::VectorXd(3) << 0.2, 0.3, 0.5).finished();
    CHECK(relative_entropy_discrete(p, p) == 0.0);
    CHECK(support::error_of([&] {
              relative_entropy_discrete(p, (Eigen::VectorXd(3) << 0.5, 0.5, 0.0).finished());
          }) == ErrorCode::DivergentEntropy);

    for (double m : {0.0, 0.5, 1.0, 2.0}) {
        const double d = relative_entropy_1d([](double x) { return -0.5 * x * x - 0.5 * std::log(2 * std::numbers::pi); },
                                             [m](double x) {
                                                 return -0.5 * (x - m) * (x - m) - 0.5 * std::log(2 * std::numbers::pi);
                                             },
                                             -40.0, 40.0);
        CHECK(std::abs(d - 0.5 * m * m) <= 1e-3);
        CHECK(d >= -1e-12);
    }

    const auto g = MarginalDensity::gaussian((VectorXd(2) << 0.3, -0.1).finished(),
                                             (MatrixXd(2, 2) << 1.0, 0.2, 0.2, 0.5).finished());
    const VectorXd m0 = (VectorXd(2) << 0.0, 0.0).finished();
    const MatrixXd s0 = (MatrixXd(2, 2) << 2.0, -0.3, -0.3, 1.0).finished();
    CHECK(marginal_relative_entropy(g, m0, s0) ==
          doctest::Approx(oracle::gaussian_kl((VectorXd(2) << 0.3, -0.1).finished(),
                                              (MatrixXd(2, 2) << 1.0, 0.2, 0.2, 0.5).finished(), m0, s0))
              .epsilon(1e-12));

    const auto t = MarginalDensity::student_t(3.0, 1.5, 2.4120);
    const double brute = oracle::integrate(
        [&](double th) {
            const double x = 1.5 + 2.4120 * std::tan(th);
            const double jac = 2.4120 / (std::cos(th) * std::cos(th));
            const double pt = oracle::student_t_pdf(x, 3.0, 1.5, 2.4120);
            const double log_q = -0.5 * (x - 1.0) * (x - 1.0) / 5.818 - 0.5 * std::log(2.0 * std::numbers::pi * 5.818);
            return pt > 0.0 ? pt * (std::log(pt) - log_q) * jac : 0.0;
        },
        -std::numbers::pi / 2 + 1e-9, std::numbers::pi / 2 - 1e-9, 1e-10);
    CHECK(marginal_relative_entropy(t, VectorXd::Constant(1, 1.0), MatrixXd::Constant(1, 1, 5.818)) ==
          doctest::Approx(brute).epsilon(1e-6));
}

TEST_CASE("two-asset posterior relative entropy agrees with a grid brute force") {
    oracle::TwoAssetCase ex;
    const GaussianPrior<double> prior(ex.mean, ex.cov);
    const LinearViewMap<double> map(ex.v, 1, 2);
    const auto post = build_posterior<double>(prior, map, MarginalDensity::student_t(ex.dof, ex.location, ex.scale),
                                              VectorXd::Constant(1, ex.target));
    const double engine = relative_entropy(post);
    CHECK(engine > 0.0);

    // Grid in (x, y): x = loc + scale tan(theta), uniform theta; y uniform over +-12 conditional sd.
    const double sd = std::sqrt(post.conditional_covariance()(0, 0));
    const MatrixXd inv = transform_prior(prior, map).covariance().inverse();
    const double det = transform_prior(prior, map).covariance().determinant();
    const int nt = 4000;
    const int ny = 400;
    const double h_th = std::numbers::pi / nt;
    double total = 0.0;
    for (int i = 0; i < nt; ++i) {
        const double th = -std::numbers::pi / 2 + (i + 0.5) * h_th;
        const double x = ex.location + ex.scale * std::tan(th);
        const double jac = ex.scale / (std::cos(th) * std::cos(th));
        const double gx = oracle::student_t_pdf(x, ex.dof, ex.location, ex.scale);
        const double my = post.conditional_mean(VectorXd::Constant(1, x))(0);
        const double hy = 24.0 * sd / ny;
        for (int j = 0; j < ny; ++j) {
            const double y = my - 12.0 * sd + (j + 0.5) * hy;
            const double p = gx * oracle::normal_pdf(y, my, sd);
            const VectorXd d = (VectorXd(2) << x - 1.0, y - 1.0).finished();
            const double log_q = -0.5 * d.dot(inv * d) - std::log(2.0 * std::numbers::pi * std::sqrt(det));
            if (p > 0.0) total += p * (std::log(p) - log_q) * jac * h_th * hy;
        }
    }
    CHECK(std::abs(engine - total) <= 1e-2);
}
