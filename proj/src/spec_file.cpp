#include "viewcal/spec_file.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "viewcal/price_series.hpp"

namespace viewcal {

using nlohmann::json;

FactorFunction PayoffSpec::function() const {
    switch (type) {
        case Type::call:
        case Type::put: {
            const bool call = type == Type::call;
            const Index i = factor;
            const double s0 = spot, k = strike;
            const bool lr = log_return;
            return [=](const Eigen::VectorXd& z) {
                const double price = lr ? s0 * std::exp(z(i)) : z(i);
                return std::max(0.0, call ? price - k : k - price);
            };
        }
        case Type::linear: {
            const Eigen::VectorXd w = weights;
            return [w](const Eigen::VectorXd& z) { return w.dot(z); };
        }
        case Type::constant: {
            const double v = value;
            return [v](const Eigen::VectorXd&) { return v; };
        }
    }
    return {};
}

namespace {

[[noreturn]] void invalid(const std::string& where, const std::string& what) {
    fail(ErrorCode::Validation, where + ": " + what);
}

const json& member(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) invalid(where, std::string("missing field '") + key + "'");
    return j.at(key);
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) invalid(where, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) invalid(where, "expected a finite number");
    return v;
}

double number_or(const json& j, const char* key, double fallback, const std::string& where) {
    return j.contains(key) ? number(j.at(key), where + "." + key) : fallback;
}

std::uint64_t unsigned_or(const json& j, const char* key, std::uint64_t fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        invalid(where + "." + key, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

Index index_value(const json& j, const std::string& where) {
    if (!j.is_number_integer()) invalid(where, "expected an integer index");
    const auto v = j.get<std::int64_t>();
    if (v < 0) invalid(where, "expected a non-negative index");
    return static_cast<Index>(v);
}

std::string string_or(const json& j, const char* key, const std::string& fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_string()) invalid(where + "." + key, "expected a string");
    return j.at(key).get<std::string>();
}

Eigen::VectorXd vector_value(const json& j, const std::string& where) {
    if (!j.is_array()) invalid(where, "expected an array of numbers");
    Eigen::VectorXd v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = number(j[i], where + "[" + std::to_string(i) + "]");
    return v;
}

Eigen::MatrixXd matrix_value(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) invalid(where, "expected a non-empty array of rows");
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    Eigen::MatrixXd m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        const auto row = vector_value(j[r], where + "[" + std::to_string(r) + "]");
        if (static_cast<std::size_t>(row.size()) != cols) invalid(where, "rows have different lengths");
        m.row(static_cast<Index>(r)) = row.transpose();
    }
    return m;
}

PayoffSpec parse_payoff(const json& j, Index n, const std::string& where) {
    PayoffSpec p;
    const std::string type = string_or(j, "type", "", where);
    if (type == "call" || type == "put") {
        p.type = type == "call" ? PayoffSpec::Type::call : PayoffSpec::Type::put;
        p.factor = index_value(member(j, "factor", where), where + ".factor");
        if (p.factor >= n) invalid(where + ".factor", "factor index out of range");
        p.strike = number(member(j, "strike", where), where + ".strike");
        p.log_return = j.value("log_return", false);
        p.spot = number_or(j, "spot", 1.0, where);
        if (p.log_return && !(p.spot > 0.0)) invalid(where + ".spot", "spot must be positive for log-return payoffs");
    } else if (type == "linear") {
        p.type = PayoffSpec::Type::linear;
        p.weights = vector_value(member(j, "weights", where), where + ".weights");
        if (p.weights.size() != n) invalid(where + ".weights", "need one weight per factor");
    } else if (type == "constant") {
        p.type = PayoffSpec::Type::constant;
        p.value = number(member(j, "value", where), where + ".value");
    } else {
        invalid(where + ".type", "payoff type must be call, put, linear or constant");
    }
    return p;
}

GaussianPrior<double> parse_prior(const json& j, const std::filesystem::path& base_dir, std::vector<std::string>& labels) {
    const std::string where = "prior";
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    if (j.contains("estimate_from")) {
        const auto path = base_dir / string_or(j, "estimate_from", "", where);
        const auto frequency = frequency_from_string(string_or(j, "frequency", "weekly", where));
        const auto kind = return_kind_from_string(string_or(j, "return_kind", "simple", where));
        std::ostringstream warnings;
        PriceSeries series;
        try {
            series = read_price_csv(path.string(), frequency, &warnings);
        } catch (const Error& e) {
            invalid(where + ".estimate_from", e.what());
        }
        const auto est = estimate_prior(series, kind);
        mean = est.mean();
        cov = est.covariance();
        if (labels.empty()) labels = series.labels;
    } else {
        mean = vector_value(member(j, "mean", where), where + ".mean");
        cov = matrix_value(member(j, "covariance", where), where + ".covariance");
    }
    const double horizon = number_or(j, "horizon", 1.0, where);
    if (!(horizon > 0.0)) invalid(where + ".horizon", "must be positive");
    mean *= number_or(j, "mean_scale", 1.0, where) * horizon;
    cov *= number_or(j, "covariance_scale", 1.0, where) * horizon;
    if (cov.rows() != mean.size() || cov.cols() != mean.size()) invalid(where, "covariance must be N x N");
    return GaussianPrior<double>(mean, cov);
}

std::optional<MarginalDensity> parse_marginal(const json& j) {
    const std::string where = "marginal";
    const std::string kind = string_or(j, "kind", "", where);
    if (kind == "none") return std::nullopt;
    if (kind == "gaussian") {
        if (j.contains("covariance")) {
            return MarginalDensity::gaussian(vector_value(member(j, "mean", where), where + ".mean"),
                                             matrix_value(j.at("covariance"), where + ".covariance"));
        }
        return MarginalDensity::gaussian(number(member(j, "mean", where), where + ".mean"),
                                         number(member(j, "stddev", where), where + ".stddev"));
    }
    if (kind == "student_t") {
        std::optional<double> tail;
        if (j.contains("tail_index")) tail = number(j.at("tail_index"), where + ".tail_index");
        return MarginalDensity::student_t(number(member(j, "degrees_of_freedom", where), where + ".degrees_of_freedom"),
                                          number(member(j, "location", where), where + ".location"),
                                          number(member(j, "scale", where), where + ".scale"), tail);
    }
    if (kind == "grid") {
        const auto knots = vector_value(member(j, "knots", where), where + ".knots");
        const auto dens = vector_value(member(j, "densities", where), where + ".densities");
        return MarginalDensity::grid(std::vector<double>(knots.data(), knots.data() + knots.size()),
                                     std::vector<double>(dens.data(), dens.data() + dens.size()));
    }
    invalid(where + ".kind", "must be gaussian, student_t, grid or none");
}

std::optional<MarginalParameter> parse_parameter(const json& j, const std::string& where) {
    if (!j.contains("alpha")) return std::nullopt;
    const std::string p = string_or(j, "alpha", "", where);
    if (p == "location") return MarginalParameter::location;
    if (p == "scale") return MarginalParameter::scale;
    if (p == "degrees_of_freedom") return MarginalParameter::degrees_of_freedom;
    invalid(where + ".alpha", "must be location, scale or degrees_of_freedom");
}

Task parse_task(const json& j, const RunSpec& spec, std::size_t index) {
    const std::string where = "tasks[" + std::to_string(index) + "]";
    const Index n = spec.prior.dimension();
    const std::string type = string_or(j, "type", "", where);
    if (type == "calibrate") return CalibrateTask{};
    if (type == "var") {
        VarTask t;
        const auto levels = vector_value(member(j, "levels", where), where + ".levels");
        for (Index i = 0; i < levels.size(); ++i) {
            if (!(levels(i) > 0.0 && levels(i) < 1.0)) invalid(where + ".levels", "levels must lie in (0, 1)");
            t.levels.push_back(levels(i));
        }
        t.notional = number_or(j, "notional", 1e6, where);
        t.weights = j.contains("weights") ? vector_value(j.at("weights"), where + ".weights")
                                          : Eigen::VectorXd::Constant(n, 1.0 / double(n));
        if (t.weights.size() != n) invalid(where + ".weights", "need one weight per factor");
        t.n_samples = unsigned_or(j, "n_samples", 100000, where);
        t.seed = unsigned_or(j, "seed", 1, where);
        t.convention = var_convention_from_string(string_or(j, "convention", "upper_quantile", where));
        return t;
    }
    if (type == "price") {
        PriceTask t;
        t.name = string_or(j, "name", "price" + std::to_string(index), where);
        t.payoff = parse_payoff(member(j, "payoff", where), n, where + ".payoff");
        t.discount = number_or(j, "discount", 0.0, where);
        return t;
    }
    if (type == "tail") {
        TailTask t;
        t.coord = index_value(member(j, "coord", where), where + ".coord");
        if (t.coord < spec.view_map.k1() || t.coord >= n || spec.view_map.k1() != 1)
            invalid(where + ".coord", "tail probe needs k1 == 1 and a conditional coordinate");
        if (j.contains("s_max")) t.s_max = number(j.at("s_max"), where + ".s_max");
        t.n_points = static_cast<int>(unsigned_or(j, "n_points", 10, where));
        if (t.n_points < 1) invalid(where + ".n_points", "must be positive");
        return t;
    }
    if (type == "sensitivities") {
        SensitivityTask t;
        t.name = string_or(j, "name", "r", where);
        const auto& r = member(j, "r", where);
        if (r.contains("linear")) {
            t.linear = vector_value(r.at("linear"), where + ".r.linear");
            if (t.linear->size() != n) invalid(where + ".r.linear", "need one weight per factor");
        } else {
            t.payoff = parse_payoff(member(r, "payoff", where + ".r"), n, where + ".r.payoff");
        }
        t.alpha = parse_parameter(j, where);
        if (t.alpha && (!spec.marginal || spec.marginal->dimension() != 1 || spec.marginal->kind() == MarginalKind::grid))
            invalid(where + ".alpha", "needs a univariate analytic marginal view");
        return t;
    }
    if (type == "density") {
        DensityTask t;
        t.name = string_or(j, "name", "", where);
        if (t.name.empty() || t.name.find_first_of("/\\. ") != std::string::npos)
            invalid(where + ".name", "needs a plain file-name stem");
        if (j.contains("factor")) {
            const Index f = index_value(j.at("factor"), where + ".factor");
            if (f >= n) invalid(where + ".factor", "factor index out of range");
            t.functional = Eigen::VectorXd::Unit(n, f);
        } else {
            t.functional = vector_value(member(j, "functional", where), where + ".functional");
            if (t.functional.size() != n) invalid(where + ".functional", "need one weight per factor");
        }
        t.lo = number(member(j, "lo", where), where + ".lo");
        t.hi = number(member(j, "hi", where), where + ".hi");
        if (!(t.hi > t.lo)) invalid(where, "need lo < hi");
        t.points = static_cast<int>(unsigned_or(j, "points", 401, where));
        if (t.points < 2) invalid(where + ".points", "need at least two points");
        if (spec.view_map.k1() > 1) invalid(where, "density output needs k1 <= 1");
        return t;
    }
    invalid(where + ".type", "unknown task type '" + type + "'");
}

RunSpec parse_document(const json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) invalid("spec", "top level must be an object");
    if (!doc.contains("schema_version")) invalid("spec", "missing schema_version");
    RunSpec spec;
    spec.schema_version = static_cast<int>(index_value(doc.at("schema_version"), "schema_version"));
    if (spec.schema_version != kSchemaVersion)
        invalid("schema_version", "unsupported version " + std::to_string(spec.schema_version));
    spec.name = string_or(doc, "name", "run", "spec");
    if (doc.contains("factors")) {
        for (const auto& f : doc.at("factors")) {
            if (!f.is_string()) invalid("factors", "expected names");
            spec.labels.push_back(f.get<std::string>());
        }
    }
    spec.prior = parse_prior(member(doc, "prior", "spec"), base_dir, spec.labels);
    const Index n = spec.prior.dimension();
    if (n == 0) invalid("prior", "empty factor vector");
    if (spec.labels.empty())
        for (Index i = 0; i < n; ++i) spec.labels.push_back("z" + std::to_string(i + 1));
    if (static_cast<Index>(spec.labels.size()) != n) invalid("factors", "one name per prior coordinate required");

    spec.marginal = parse_marginal(member(doc, "marginal", "spec"));
    const Index k1 = spec.marginal ? spec.marginal->dimension() : 0;

    const auto& moments = doc.contains("moments") ? doc.at("moments") : json::array();
    if (!moments.is_array()) invalid("moments", "expected an array");
    for (std::size_t i = 0; i < moments.size(); ++i) {
        const std::string where = "moments[" + std::to_string(i) + "]";
        MomentSpec m;
        m.target = number(member(moments[i], "target", where), where + ".target");
        m.name = string_or(moments[i], "name", "", where);
        if (moments[i].contains("coord")) {
            m.coord = index_value(moments[i].at("coord"), where + ".coord");
        } else {
            m.payoff = parse_payoff(member(moments[i], "payoff", where), n, where + ".payoff");
        }
        spec.moments.push_back(std::move(m));
    }

    Index k2 = k1;
    if (spec.linear()) k2 = k1 + static_cast<Index>(spec.moments.size());
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    if (doc.contains("view_map")) {
        const auto& vm = doc.at("view_map");
        if (vm.contains("rows")) v = matrix_value(vm.at("rows"), "view_map.rows");
        if (vm.contains("k1") && index_value(vm.at("k1"), "view_map.k1") != k1)
            invalid("view_map.k1", "must equal the marginal view dimension");
        if (vm.contains("k2")) k2 = index_value(vm.at("k2"), "view_map.k2");
    }
    if (v.rows() != n || v.cols() != n) invalid("view_map.rows", "V must be N x N");
    if (k1 > n) invalid("marginal", "marginal dimension exceeds the factor count");
    if (k2 < k1 || k2 > n) invalid("view_map.k2", "need k1 <= k2 <= N");
    spec.view_map = LinearViewMap<double>(v, k1, k2);

    if (doc.contains("solver")) {
        const auto& s = doc.at("solver");
        spec.solver.tolerance = number_or(s, "tolerance", spec.solver.tolerance, "solver");
        spec.solver.max_iterations = static_cast<int>(unsigned_or(s, "max_iterations", 100, "solver"));
        spec.solver.outer_nodes = unsigned_or(s, "outer_nodes", 10000, "solver");
        spec.solver.existence_samples = unsigned_or(s, "existence_samples", 100000, "solver");
        spec.solver.seed = unsigned_or(s, "seed", spec.solver.seed, "solver");
        const std::string rule = string_or(s, "inner_rule", "gauss_hermite", "solver");
        if (rule == "composite_legendre") spec.solver.rule.kind = ConditionalRule::Kind::composite_legendre;
        else if (rule != "gauss_hermite") invalid("solver.inner_rule", "must be gauss_hermite or composite_legendre");
        spec.solver.rule.gauss_hermite_order = static_cast<int>(unsigned_or(s, "gauss_hermite_order", 0, "solver"));
        spec.solver.rule.legendre_panels = static_cast<int>(unsigned_or(s, "legendre_panels", 200, "solver"));
        if (spec.solver.outer_nodes == 0) invalid("solver.outer_nodes", "must be positive");
        if (!(spec.solver.tolerance > 0.0)) invalid("solver.tolerance", "must be positive");
    }

    // Cross-checks through the library's own validation.
    (void)spec.views();

    const auto& tasks = doc.contains("tasks") ? doc.at("tasks") : json::array({json{{"type", "calibrate"}}});
    if (!tasks.is_array()) invalid("tasks", "expected an array");
    for (std::size_t i = 0; i < tasks.size(); ++i) spec.tasks.push_back(parse_task(tasks[i], spec, i));
    return spec;
}

}  // namespace

bool RunSpec::linear() const {
    for (const auto& m : moments)
        if (!m.coord) return false;
    return true;
}

ViewSet RunSpec::views() const {
    std::vector<MomentView> out;
    for (const auto& m : moments) {
        if (m.coord) out.push_back(MomentView::on_coordinate(*m.coord, m.target, m.name));
        else out.push_back(MomentView::on_function(m.payoff->function(), m.target, m.name));
    }
    return ViewSet(view_map, marginal, std::move(out));
}

RunSpec parse_spec(const std::string& json_text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        fail(ErrorCode::Validation, std::string("spec is not valid JSON: ") + e.what());
    }
    try {
        return parse_document(doc, base_dir);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Validation) throw;
        fail(ErrorCode::Validation, e.what());
    } catch (const json::exception& e) {
        fail(ErrorCode::Validation, e.what());
    }
}

RunSpec load_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in.good()) fail(ErrorCode::Validation, "cannot read spec file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_spec(ss.str(), path.parent_path());
}

}  // namespace viewcal
