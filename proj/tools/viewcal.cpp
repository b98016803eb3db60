#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>

#include "viewcal/price_series.hpp"
#include "viewcal/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"viewcal: minimum relative entropy calibration of factor models to views"};
    app.require_subcommand(1);

    auto* calibrate = app.add_subcommand("calibrate", "Run the tasks of a view specification");
    std::string spec_path;
    viewcal::RunOptions options;
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    std::string out_dir = ".";
    calibrate->add_option("--spec", spec_path, "Spec file (JSON)")->required();
    calibrate->add_option("--out", out_dir, "Output directory");
    auto* seed_opt = calibrate->add_option("--seed", seed, "RNG seed for sampling tasks and diagnostics");
    auto* samples_opt = calibrate->add_option("--samples", samples, "Monte Carlo sample count for var tasks");

    auto* estimate = app.add_subcommand("estimate-prior", "Estimate a Gaussian prior from a price CSV");
    std::string csv_path, frequency = "weekly", return_kind = "simple";
    estimate->add_option("--csv", csv_path, "Price CSV with a date column")->required();
    estimate->add_option("--frequency", frequency, "daily or weekly");
    estimate->add_option("--return-kind", return_kind, "simple or log");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : viewcal::kExitValidation;
    }

    if (*calibrate) {
        options.out_dir = out_dir;
        if (*seed_opt) options.seed = seed;
        if (*samples_opt) options.samples = samples;
        const auto result = viewcal::run_spec_file(spec_path, options, std::cerr);
        for (const auto& [name, content] : result.files) std::cout << (options.out_dir / name).string() << "\n";
        return result.exit_code;
    }
    try {
        const auto series = viewcal::read_price_csv(csv_path, viewcal::frequency_from_string(frequency), &std::cerr);
        const auto prior = viewcal::estimate_prior(series, viewcal::return_kind_from_string(return_kind));
        nlohmann::ordered_json j;
        j["factors"] = series.labels;
        j["mean"] = std::vector<double>(prior.mean().data(), prior.mean().data() + prior.dimension());
        nlohmann::ordered_json cov = nlohmann::ordered_json::array();
        for (Eigen::Index r = 0; r < prior.dimension(); ++r) {
            std::vector<double> row(static_cast<std::size_t>(prior.dimension()));
            for (Eigen::Index c = 0; c < prior.dimension(); ++c) row[static_cast<std::size_t>(c)] = prior.covariance()(r, c);
            cov.push_back(row);
        }
        j["covariance"] = cov;
        j["observations"] = series.prices.rows() - 1;
        std::cout << j.dump(2) << "\n";
    } catch (const viewcal::Error& e) {
        std::cerr << "error: code=" << viewcal::to_string(e.code()) << " message=" << e.what() << "\n";
        return e.code() == viewcal::ErrorCode::Validation ? viewcal::kExitValidation : viewcal::kExitFailure;
    }
    return 0;
}
