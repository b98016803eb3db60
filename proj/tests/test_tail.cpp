#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "support.hpp"
#include "viewcal/tail.hpp"

using namespace viewcal;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

GaussianMarginalPosteriord bivariate(double sxx, double sxy, double syy, const MarginalDensity& g, double target = 0.0) {
    const GaussianPrior<double> prior(VectorXd::Zero(2), (MatrixXd(2, 2) << sxx, sxy, sxy, syy).finished());
    return build_posterior<double>(prior, LinearViewMap<double>::identity(2, 1, 2), g, VectorXd::Constant(1, target));
}

GaussianMarginalPosteriord two_asset() {
    oracle::TwoAssetCase ex;
    return build_posterior<double>(GaussianPrior<double>(ex.mean, ex.cov), LinearViewMap<double>(ex.v, 1, 2),
                                   MarginalDensity::student_t(ex.dof, ex.location, ex.scale), VectorXd::Constant(1, 1.5));
}

}  // namespace

TEST_CASE("tail hypothesis check") {
    const auto t3 = check_assumption(MarginalDensity::student_t(3.0, 0.0, 1.0));
    CHECK(t3.status == TailAdmissibility::admissible);
    REQUIRE(t3.alpha.has_value());
    CHECK(*t3.alpha == 4.0);
    CHECK(check_assumption(MarginalDensity::gaussian(0.0, 1.0)).status == TailAdmissibility::inadmissible);
    CHECK(check_assumption(MarginalDensity::grid({0.0, 1.0, 2.0}, {0.0, 1.0, 0.0})).status == TailAdmissibility::unknown);
}

TEST_CASE("probe schedule doubles up to s_max") {
    const auto pts = probe_schedule(4939.776, 10);
    REQUIRE(pts.size() == 10);
    for (int j = 2; j <= 11; ++j) CHECK(pts[static_cast<std::size_t>(j - 2)] == doctest::Approx(std::ldexp(2.412, j)).epsilon(1e-14));
}

TEST_CASE("two-asset tail ratio approaches |sigma_xy / sigma_xx|^3") {
    const auto rep = tail_ratio_probe(two_asset(), 0);
    CHECK(rep.alpha == 4.0);
    CHECK(rep.target_ratio == doctest::Approx(std::pow(2.43 / 5.818, 3.0)).epsilon(1e-12));
    CHECK(std::abs(rep.target_ratio - 0.07286) <= 1e-4);
    REQUIRE(rep.probe_points.size() == 10);
    CHECK(rep.probe_points.back() == doctest::Approx(2048.0 * 2.4120).epsilon(1e-14));
    REQUIRE_FALSE(rep.measured_ratios.empty());
    CHECK(std::abs(rep.measured_ratios.back() / rep.target_ratio - 1.0) <= 0.05);
    CHECK(rep.converged);
}

TEST_CASE("unit regression coefficient gives a unit ratio") {
    const auto post = bivariate(2.0, 2.0, 3.0, MarginalDensity::student_t(3.0, 0.0, 1.0));
    const auto rep = tail_ratio_probe(post, 0);
    CHECK(rep.target_ratio == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(rep.measured_ratios.back() - 1.0) <= 0.05);
}

TEST_CASE("ratio trends toward the target") {
    const double b = 0.5;
    const auto g = MarginalDensity::student_t(4.0, 0.0, 1.0);
    const auto post = bivariate(1.0, b, 1.0, g);
    const double target = std::pow(b, 4.0);
    const auto r = tail_ratio_profile(post, 0, {50.0, 100.0, 200.0});
    REQUIRE(r.size() == 3);
    CHECK(std::abs(r[1] - target) <= std::abs(r[0] - target));
    CHECK(std::abs(r[2] - target) <= std::abs(r[1] - target));
    CHECK(std::abs(r[2] / target - 1.0) <= 0.1);
}

TEST_CASE("scale covariance of the probe") {
    const auto base = bivariate(1.0, 0.6, 1.0, MarginalDensity::student_t(3.0, 0.0, 1.0));
    const auto wide = bivariate(1.0, 0.6, 1.0, MarginalDensity::student_t(3.0, 0.0, 10.0));
    const auto a = tail_ratio_probe(base, 0);
    const auto b = tail_ratio_probe(wide, 0);
    CHECK(b.probe_points.back() == doctest::Approx(10.0 * a.probe_points.back()).epsilon(1e-14));
    CHECK(a.target_ratio == doctest::Approx(b.target_ratio).epsilon(1e-14));
    CHECK(std::abs(b.measured_ratios.back() / b.target_ratio - 1.0) <= 0.05);
}

TEST_CASE("tail probe failures") {
    const auto g = MarginalDensity::student_t(3.0, 0.0, 1.0);
    const auto flat = bivariate(1.0, 0.0, 1.0, g);
    CHECK(support::error_of([&] { tail_ratio_probe(flat, 0); }) == ErrorCode::ZeroCorrelation);
    // without the check the ratio decays to zero
    const auto r = tail_ratio_profile(flat, 0, probe_schedule(2048.0, 10));
    CHECK(r.back() < 1e-6);
    CHECK(r.back() < r.front());

    const auto gauss = bivariate(1.0, 0.5, 1.0, MarginalDensity::gaussian(0.0, 1.0));
    CHECK(support::error_of([&] { tail_ratio_probe(gauss, 0); }) == ErrorCode::InadmissibleTail);
    const auto grid = bivariate(1.0, 0.5, 1.0, MarginalDensity::grid({-1.0, 0.0, 1.0}, {0.0, 1.0, 0.0}));
    CHECK(support::error_of([&] { tail_ratio_probe(grid, 0); }) == ErrorCode::InadmissibleTail);
}
