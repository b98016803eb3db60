#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "viewcal/generic_prior.hpp"
#include "viewcal/marginal.hpp"
#include "viewcal/var.hpp"
#include "viewcal/views.hpp"

namespace viewcal {

inline constexpr int kSchemaVersion = 1;

/// Payoff of the original factors: call/put on one factor (optionally read as
/// a log return from spot), a linear combination, or a constant.
struct PayoffSpec {
    enum class Type { call, put, linear, constant };
    Type type = Type::constant;
    Index factor = 0;
    double spot = 1.0;
    double strike = 0.0;
    bool log_return = false;  ///< price = spot * exp(z_factor), else price = z_factor
    Eigen::VectorXd weights;
    double value = 1.0;

    FactorFunction function() const;
};

struct MomentSpec {
    std::optional<Index> coord;  ///< index into W = V z
    std::optional<PayoffSpec> payoff;
    double target = 0.0;
    std::string name;
};

struct SolverSpec {
    double tolerance = 1e-8;
    int max_iterations = 100;
    std::size_t outer_nodes = 10000;
    ConditionalRule rule;
    std::size_t existence_samples = 100000;
    std::uint64_t seed = 20240601;
};

struct CalibrateTask {};
struct VarTask {
    std::vector<double> levels;
    double notional = 1e6;
    Eigen::VectorXd weights;
    std::size_t n_samples = 100000;
    std::uint64_t seed = 1;
    VarConvention convention = VarConvention::upper_quantile;
};
struct PriceTask {
    std::string name;
    PayoffSpec payoff;
    double discount = 0.0;
};
struct TailTask {
    Index coord = 1;  ///< W coordinate of the probed Y
    std::optional<double> s_max;
    int n_points = 10;
};
struct SensitivityTask {
    std::string name;
    std::optional<Eigen::VectorXd> linear;  ///< r = l^T z
    std::optional<PayoffSpec> payoff;
    std::optional<MarginalParameter> alpha;
};
struct DensityTask {
    std::string name;
    Eigen::VectorXd functional;  ///< density of l^T z
    double lo = 0.0;
    double hi = 0.0;
    int points = 401;
};
using Task = std::variant<CalibrateTask, VarTask, PriceTask, TailTask, SensitivityTask, DensityTask>;

struct RunSpec {
    int schema_version = kSchemaVersion;
    std::string name;
    std::vector<std::string> labels;
    GaussianPrior<double> prior{Eigen::VectorXd(0), Eigen::MatrixXd(0, 0)};
    LinearViewMap<double> view_map{Eigen::MatrixXd(0, 0), 0, 0};
    std::optional<MarginalDensity> marginal;
    std::vector<MomentSpec> moments;
    SolverSpec solver;
    std::vector<Task> tasks;

    ViewSet views() const;
    /// True when every moment view is a W coordinate (closed-form path).
    bool linear() const;
};

/// Parses and validates a spec document; relative CSV paths resolve against
/// `base_dir`. All failures are reported as ErrorCode::Validation.
RunSpec parse_spec(const std::string& json_text, const std::filesystem::path& base_dir = {});
RunSpec load_spec(const std::filesystem::path& path);

}  // namespace viewcal
