#include "viewcal/price_series.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace viewcal {

Frequency frequency_from_string(const std::string& s) {
    if (s == "daily") return Frequency::daily;
    if (s == "weekly") return Frequency::weekly;
    fail(ErrorCode::Validation, "frequency must be 'daily' or 'weekly', got '" + s + "'");
}

ReturnKind return_kind_from_string(const std::string& s) {
    if (s == "simple") return ReturnKind::simple;
    if (s == "log") return ReturnKind::log;
    fail(ErrorCode::Validation, "return_kind must be 'simple' or 'log', got '" + s + "'");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool is_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (s[i] < '0' || s[i] > '9') return false;
    const int month = std::stoi(s.substr(5, 2));
    const int day = std::stoi(s.substr(8, 2));
    return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

}  // namespace

PriceSeries read_price_csv(std::istream& in, Frequency frequency, std::ostream* warnings) {
    PriceSeries series;
    series.frequency = frequency;
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::Validation, "price CSV: missing header");
    auto header = split_csv_line(line);
    require(header.size() >= 2 && header[0] == "date", ErrorCode::Validation,
            "price CSV: header must start with 'date' followed by factor names");
    series.labels.assign(header.begin() + 1, header.end());
    const std::size_t n = series.labels.size();
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto cells = split_csv_line(line);
        require(!cells.empty() && is_iso_date(cells[0]), ErrorCode::Validation,
                "price CSV line " + std::to_string(line_no) + ": expected an ISO-8601 date");
        std::vector<double> values(n);
        bool ok = cells.size() == n + 1;
        for (std::size_t i = 0; ok && i < n; ++i) ok = parse_double(cells[i + 1], values[i]);
        if (!ok) {
            ++series.dropped_rows;
            if (warnings) *warnings << "warning: price CSV line " << line_no << " has missing cells; dropped\n";
            continue;
        }
        for (double v : values)
            require(v > 0.0, ErrorCode::Validation, "price CSV line " + std::to_string(line_no) + ": prices must be positive");
        require(series.dates.empty() || cells[0] > series.dates.back(), ErrorCode::Validation,
                "price CSV line " + std::to_string(line_no) + ": dates must be strictly increasing");
        series.dates.push_back(cells[0]);
        rows.push_back(std::move(values));
    }
    series.prices.resize(static_cast<Index>(rows.size()), static_cast<Index>(n));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < n; ++c) series.prices(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    return series;
}

PriceSeries read_price_csv(const std::string& path, Frequency frequency, std::ostream* warnings) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::Io, "cannot open price CSV '" + path + "'");
    return read_price_csv(in, frequency, warnings);
}

Eigen::MatrixXd period_returns(const PriceSeries& series, ReturnKind kind) {
    const Index t = series.prices.rows();
    if (t < 2) return Eigen::MatrixXd(0, series.prices.cols());
    const Eigen::ArrayXXd ratio = series.prices.bottomRows(t - 1).array() / series.prices.topRows(t - 1).array();
    return kind == ReturnKind::simple ? Eigen::MatrixXd(ratio - 1.0) : Eigen::MatrixXd(ratio.log());
}

GaussianPrior<double> estimate_prior(const Eigen::MatrixXd& returns) {
    const Index n = returns.rows();
    require(n >= 30, ErrorCode::InsufficientData,
            "estimate_prior: need at least 30 return observations, got " + std::to_string(n));
    const Eigen::VectorXd mean = returns.colwise().mean().transpose();
    const Eigen::MatrixXd centered = returns.rowwise() - mean.transpose();
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / double(n - 1);
    return GaussianPrior<double>(mean, symmetrized<double>(cov));
}

GaussianPrior<double> estimate_prior(const PriceSeries& series, ReturnKind kind) {
    return estimate_prior(period_returns(series, kind));
}

}  // namespace viewcal
