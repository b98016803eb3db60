#include "doctest.h"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "support.hpp"
#include "viewcal/price_series.hpp"
#include "viewcal/runner.hpp"

using namespace viewcal;
using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace fs = std::filesystem;

namespace {

const fs::path kSpecs = fs::path(VIEWCAL_SOURCE_DIR) / "specs";

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("viewcal_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::vector<double>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

std::vector<fs::path> listing(const fs::path& d) {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(d)) out.push_back(e.path().filename());
    std::sort(out.begin(), out.end());
    return out;
}

std::string iso(int day) {
    using namespace std::chrono;
    const year_month_day d{sys_days{year{2000} / January / 3} + days{day}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(d.year()), unsigned(d.month()), unsigned(d.day()));
    return buf;
}

std::string price_csv_iso(const MatrixXd& prices) {
    std::ostringstream s;
    s.precision(17);
    s << "date";
    for (Eigen::Index c = 0; c < prices.cols(); ++c) s << ",f" << c;
    s << "\n";
    for (Eigen::Index r = 0; r < prices.rows(); ++r) {
        s << iso(static_cast<int>(r));
        for (Eigen::Index c = 0; c < prices.cols(); ++c) s << "," << prices(r, c);
        s << "\n";
    }
    return s.str();
}

MatrixXd prices_from_returns(const MatrixXd& returns) {
    MatrixXd p(returns.rows() + 1, returns.cols());
    p.row(0).setConstant(100.0);
    for (Eigen::Index r = 0; r < returns.rows(); ++r) p.row(r + 1) = p.row(r).array() * (1.0 + returns.row(r).array());
    return p;
}

}  // namespace

TEST_CASE("two-asset spec: posterior X density is the view") {
    const auto out = fresh_dir("two_asset");
    std::ostringstream log;
    RunOptions opt;
    opt.out_dir = out;
    const auto res = run_spec_file(kSpecs / "two_asset_t_view.json", opt, log);
    REQUIRE(res.exit_code == kExitOk);
    const auto rows = read_csv(out / "density_x.csv");
    REQUIRE(rows.size() == 331);
    for (const auto& r : rows) {
        const double t = oracle::student_t_pdf(r[0], 3.0, 1.5, 2.4120);
        CHECK(std::abs(r[2] - t) <= 1e-10);
        CHECK(r[1] == doctest::Approx(oracle::normal_pdf(r[0], 1.0, std::sqrt(5.818))).epsilon(1e-10));
    }
    CHECK(fs::exists(out / "density_z2.csv"));
    CHECK(fs::exists(out / "tail.csv"));
    CHECK(fs::exists(out / "sensitivities.json"));
    CHECK(fs::exists(out / "calibration.json"));
}

TEST_CASE("six-index spec with a t view: VaR table") {
    const auto out = fresh_dir("six_index_ab");
    std::ostringstream log;
    RunOptions opt;
    opt.out_dir = out;
    REQUIRE(run_spec_file(kSpecs / "six_index_view_ab.json", opt, log).exit_code == kExitOk);
    const auto rows = read_csv(out / "var.csv");
    const std::vector<double> levels{0.9975, 0.995, 0.9925, 0.95, 0.75, 0.5};
    REQUIRE(rows.size() == levels.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i][0] == levels[i]);
        CHECK(rows[i][1] > 0.0);
        CHECK(rows[i][2] > 0.0);
        if (i > 0) CHECK(rows[i][1] < rows[i - 1][1]);
    }
}

TEST_CASE("malformed spec exits with a validation code and writes nothing") {
    const auto out = fresh_dir("malformed");
    const std::string text = slurp(kSpecs / "two_asset_t_view.json");
    std::string bad = text;
    bad.replace(bad.find("\"k1\": 1"), 7, "\"k1\": 3");
    const fs::path spec = out / "bad.json";
    std::ofstream(spec) << bad;
    const auto target = out / "reports";
    fs::create_directories(target);
    std::ostringstream log;
    RunOptions opt;
    opt.out_dir = target;
    const auto res = run_spec_file(spec, opt, log);
    CHECK(res.exit_code == kExitValidation);
    CHECK(listing(target).empty());
    CHECK(log.str().find("Validation") != std::string::npos);

    const std::string cmd = std::string(VIEWCAL_CLI) + " calibrate --spec " + spec.string() + " --out " +
                            target.string() + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(status) == kExitValidation);
    CHECK(listing(target).empty());
}

TEST_CASE("reruns are byte-identical") {
    const auto a = fresh_dir("rerun_a");
    const auto b = fresh_dir("rerun_b");
    std::ostringstream log;
    for (const auto& spec : {"two_asset_t_view.json", "six_index_view_ab.json"}) {
        RunOptions oa, ob;
        oa.out_dir = a;
        ob.out_dir = b;
        oa.samples = ob.samples = 20000;
        REQUIRE(run_spec_file(kSpecs / spec, oa, log).exit_code == kExitOk);
        REQUIRE(run_spec_file(kSpecs / spec, ob, log).exit_code == kExitOk);
        const auto files = listing(a);
        CHECK(files == listing(b));
        for (const auto& f : files) CHECK(slurp(a / f) == slurp(b / f));
    }
}

TEST_CASE("non-convergence writes only the calibration report") {
    const auto out = fresh_dir("not_converged");
    std::string text = slurp(kSpecs / "options_replica.json");
    text.replace(text.find("\"outer_nodes\": 4000"), 19, "\"outer_nodes\": 300, \"max_iterations\": 1");
    const fs::path spec = out / "spec.json";
    std::ofstream(spec) << text;
    const auto target = out / "reports";
    fs::create_directories(target);
    std::ostringstream log;
    RunOptions opt;
    opt.out_dir = target;
    const auto res = run_spec_file(spec, opt, log);
    CHECK(res.exit_code == kExitNotConverged);
    CHECK(listing(target) == std::vector<fs::path>{"calibration.json"});
    CHECK(slurp(target / "calibration.json").find("\"converged\": false") != std::string::npos);
    CHECK(log.str().find("NotConverged") != std::string::npos);
}

TEST_CASE("prior estimation from prices") {
    SUBCASE("constant prices") {
        MatrixXd p = MatrixXd::Constant(40, 3, 50.0);
        std::istringstream in(price_csv_iso(p));
        const auto prior = estimate_prior(read_price_csv(in, Frequency::weekly));
        CHECK(prior.mean().cwiseAbs().maxCoeff() == 0.0);
        CHECK(prior.covariance().cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("generated returns recover the generator within 3 SE") {
        const VectorXd mu = (VectorXd(2) << 0.002, -0.001).finished();
        const MatrixXd sigma = (MatrixXd(2, 2) << 4e-4, 1e-4, 1e-4, 2.5e-4).finished();
        const Eigen::LLT<MatrixXd> chol(sigma);
        std::mt19937_64 rng(99);
        std::normal_distribution<double> nd;
        const int n = 10000;
        MatrixXd r(n, 2);
        for (int i = 0; i < n; ++i) {
            VectorXd e(2);
            e << nd(rng), nd(rng);
            r.row(i) = (mu + chol.matrixL() * e).transpose();
        }
        std::istringstream in(price_csv_iso(prices_from_returns(r)));
        const auto prior = estimate_prior(read_price_csv(in, Frequency::weekly));
        for (int i = 0; i < 2; ++i) {
            CHECK(std::abs(prior.mean()(i) - mu(i)) <= 3.0 * std::sqrt(sigma(i, i) / n));
            for (int j = 0; j < 2; ++j) {
                const double se = std::sqrt((sigma(i, i) * sigma(j, j) + sigma(i, j) * sigma(i, j)) / (n - 1));
                CHECK(std::abs(prior.covariance()(i, j) - sigma(i, j)) <= 3.0 * se);
            }
        }
    }
    SUBCASE("moment-matched six-index fixture") {
        oracle::SixIndexCase ex;
        std::mt19937_64 rng(7);
        std::normal_distribution<double> nd;
        const int n = 260;
        MatrixXd r(n, 6);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < 6; ++j) r(i, j) = nd(rng);
        r.rowwise() -= r.colwise().mean();
        const MatrixXd s = r.transpose() * r / double(n - 1);
        const MatrixXd whiten = Eigen::LLT<MatrixXd>(s).matrixL().solve(MatrixXd::Identity(6, 6));
        const MatrixXd target_l = Eigen::LLT<MatrixXd>(ex.cov).matrixL();
        MatrixXd matched = (target_l * whiten * r.transpose()).transpose();
        matched.rowwise() += ex.mean.transpose();
        const auto prior = estimate_prior(matched);
        CHECK((prior.mean() - ex.mean).cwiseAbs().maxCoeff() <= 1e-15);
        CHECK((prior.covariance() - ex.cov).cwiseAbs().maxCoeff() <= 1e-15);
        std::istringstream in(price_csv_iso(prices_from_returns(matched)));
        const auto from_csv = estimate_prior(read_price_csv(in, Frequency::weekly), ReturnKind::simple);
        CHECK((from_csv.mean() - ex.mean).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((from_csv.covariance() - ex.cov).cwiseAbs().maxCoeff() <= 1e-12);
    }
    SUBCASE("too few returns") {
        std::istringstream in(price_csv_iso(MatrixXd::Constant(30, 2, 10.0)));
        const auto series = read_price_csv(in, Frequency::weekly);
        CHECK(support::error_of([&] { estimate_prior(series); }) == ErrorCode::InsufficientData);
    }
    SUBCASE("rows with gaps are dropped with a warning") {
        std::string csv = price_csv_iso(MatrixXd::Constant(40, 2, 10.0));
        const auto pos = csv.find(iso(5));
        const auto comma = csv.find(',', pos);
        csv.replace(comma, csv.find(',', comma + 1) - comma, ",");
        std::istringstream in(csv);
        std::ostringstream warn;
        const auto series = read_price_csv(in, Frequency::weekly, &warn);
        CHECK(series.dropped_rows == 1);
        CHECK(series.prices.rows() == 39);
        CHECK_FALSE(warn.str().empty());
    }
    SUBCASE("dates must increase") {
        std::string csv = "date,a\n2001-01-08,1\n2001-01-01,2\n";
        std::istringstream in(csv);
        CHECK(support::error_of([&] { read_price_csv(in, Frequency::weekly); }) == ErrorCode::Validation);
    }
    SUBCASE("log returns") {
        MatrixXd p(3, 1);
        p << 1.0, 2.0, 1.0;
        std::istringstream in(price_csv_iso(p));
        const auto series = read_price_csv(in, Frequency::daily);
        const MatrixXd lr = period_returns(series, ReturnKind::log);
        CHECK(lr(0, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
        CHECK(period_returns(series, ReturnKind::simple)(1, 0) == doctest::Approx(-0.5).epsilon(1e-15));
    }
}

TEST_CASE("number formatting round-trips") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1.0) == "1");
    CHECK(format_number(-2.5e-300) == "-2.5e-300");
    for (double v : {1.0 / 3.0, std::sqrt(2.0) * 1e10, 5e-324, 1.7976931348623157e308}) {
        const auto s = format_number(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
        CHECK(s.find(',') == std::string::npos);
    }
}
