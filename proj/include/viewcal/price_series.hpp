#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

#include "viewcal/gaussian.hpp"

namespace viewcal {

enum class Frequency { daily, weekly };
enum class ReturnKind { simple, log };

Frequency frequency_from_string(const std::string& s);
ReturnKind return_kind_from_string(const std::string& s);

/// Prices per factor on strictly increasing ISO-8601 dates.
struct PriceSeries {
    std::vector<std::string> dates;
    std::vector<std::string> labels;
    Eigen::MatrixXd prices;  ///< rows = dates, columns = factors
    Frequency frequency = Frequency::weekly;
    std::size_t dropped_rows = 0;
};

/// Reads `date,<factor>...` CSV. Rows with empty or unparsable cells are
/// dropped and counted; non-increasing dates or non-positive prices fail.
PriceSeries read_price_csv(std::istream& in, Frequency frequency, std::ostream* warnings = nullptr);
PriceSeries read_price_csv(const std::string& path, Frequency frequency, std::ostream* warnings = nullptr);

/// Per-period returns, one row per consecutive pair of dates.
Eigen::MatrixXd period_returns(const PriceSeries& series, ReturnKind kind);

/// Sample mean and unbiased sample covariance of the returns; needs at least
/// 30 observations.
GaussianPrior<double> estimate_prior(const PriceSeries& series, ReturnKind kind = ReturnKind::simple);
GaussianPrior<double> estimate_prior(const Eigen::MatrixXd& returns);

}  // namespace viewcal
