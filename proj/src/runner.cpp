#include "viewcal/runner.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "viewcal/diagnostics.hpp"
#include "viewcal/entropy.hpp"
#include "viewcal/gaussian_analytic.hpp"
#include "viewcal/newton.hpp"
#include "viewcal/posterior.hpp"
#include "viewcal/pricing.hpp"
#include "viewcal/sampling.hpp"
#include "viewcal/sensitivity.hpp"
#include "viewcal/tail.hpp"
#include "viewcal/var.hpp"

namespace viewcal {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_atomic(const std::filesystem::path& dir, const std::string& name, const std::string& content) {
    std::filesystem::create_directories(dir);
    const auto target = dir / name;
    const auto tmp = dir / ("." + name + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        require(out.good(), ErrorCode::Io, "cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        require(out.good(), ErrorCode::Io, "write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, target);
}

namespace {

ordered_json to_json(const Eigen::VectorXd& v) {
    ordered_json a = ordered_json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

ordered_json to_json(const Eigen::MatrixXd& m) {
    ordered_json a = ordered_json::array();
    for (Index r = 0; r < m.rows(); ++r) a.push_back(to_json(Eigen::VectorXd(m.row(r).transpose())));
    return a;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

// Everything shared by the tasks once calibration is done.
struct Calibrated {
    const RunSpec& spec;
    ViewSet views;
    CalibrationReport report;
    Eigen::VectorXd lambda_list;  // in moment order
    std::optional<GaussianMarginalPosteriord> closed;
    std::shared_ptr<const TiltedModel> model;
    std::optional<TiltedPosterior> tilted;
    ordered_json calibration;
    ordered_json prices = ordered_json::array();
    ordered_json sensitivities = ordered_json::array();

    Index k1() const { return spec.view_map.k1(); }

    // Model on quadrature nodes (built lazily for the closed-form path).
    const TiltedPosterior& tilted_posterior() {
        if (!tilted) {
            if (!model) model = TiltedModel::from_views(spec.prior, views, spec.solver.rule, spec.solver.outer_nodes);
            tilted.emplace(model, lambda_list);
        }
        return *tilted;
    }

    MomentFunction to_xy(const FactorFunction& f) const {
        const auto map = spec.view_map;
        return [f, map](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
            Eigen::VectorXd w(x.size() + y.size());
            w << x, y;
            return f(map.backward(w));
        };
    }
};

Calibrated calibrate(const RunSpec& spec, std::uint64_t seed) {
    Calibrated c{spec, spec.views(), {}, {}, {}, {}, {}, {}};
    const auto& views = c.views;
    const Index k1 = spec.view_map.k1();
    NewtonOptions newton;
    newton.tolerance = spec.solver.tolerance;
    newton.max_iterations = spec.solver.max_iterations;

    const auto w_prior = transform_prior(spec.prior, spec.view_map);
    std::string method;
    if (spec.linear()) {
        method = "closed_form";
        GaussianLinearDual dual(spec.prior, views);
        c.report = solve_lambda_newton(dual, newton);
        c.closed = build_posterior(spec.prior, views);
        // Coordinate order to moment order.
        c.lambda_list.resize(views.moment_count());
        Eigen::VectorXd residuals(views.moment_count());
        for (Index i = 0; i < views.moment_count(); ++i) {
            const Index j = *views.moments()[static_cast<std::size_t>(i)].coordinate - k1;
            c.lambda_list(i) = c.report.lambda(j);
            residuals(i) = c.report.residuals(j);
        }
        c.report.residuals = residuals;
    } else {
        method = "dual_quadrature";
        c.model = TiltedModel::from_views(spec.prior, views, spec.solver.rule, spec.solver.outer_nodes);
        c.report = solve_lambda_newton(*c.model, newton);
        c.lambda_list = c.report.lambda;
        c.tilted.emplace(c.model, c.lambda_list);
    }

    if (views.moment_count() > 0 && spec.solver.existence_samples > 0) {
        const auto prior = GenericPrior::from_gaussian(w_prior, k1, spec.solver.rule);
        c.report.existence = existence_check(prior, views.marginal(), moment_functions(views), views.targets(),
                                             spec.solver.existence_samples, seed);
    }

    auto& j = c.calibration;
    j["schema_version"] = kSchemaVersion;
    j["name"] = spec.name;
    j["method"] = method;
    j["factors"] = spec.labels;
    j["k1"] = spec.view_map.k1();
    j["k2"] = spec.view_map.k2();
    j["marginal"] = spec.marginal ? to_string(spec.marginal->kind()) : std::string("none");
    ordered_json names = ordered_json::array();
    for (const auto& m : views.moments()) names.push_back(m.name);
    j["moment_names"] = names;
    j["targets"] = to_json(views.targets());
    j["lambda"] = to_json(c.lambda_list);
    j["residuals"] = to_json(c.report.residuals);
    j["max_residual"] = c.report.max_residual();
    j["iterations"] = c.report.iterations;
    j["converged"] = c.report.converged;
    j["dual_value"] = c.report.dual_value;
    j["existence"] = to_string(c.report.existence);
    if (c.report.independence) j["independence_min_eigenvalue"] = *c.report.independence;
    j["gradient_fallback"] = c.report.gradient_fallback;
    if (!c.report.converged) j["message"] = c.report.message;
    if (c.closed && c.report.converged) {
        const auto& post = *c.closed;
        ordered_json p;
        p["conditional_intercept"] = to_json(post.intercept());
        p["conditional_gain"] = to_json(post.gain());
        p["conditional_covariance"] = to_json(post.conditional_covariance());
        p["marginal_mean"] = to_json(post.marginal_mean);
        p["mean_z"] = to_json(Eigen::VectorXd(spec.view_map.backward(post.mean_w())));
        j["posterior"] = p;
        j["relative_entropy"] = relative_entropy(post);
    } else if (c.tilted && c.report.converged) {
        double marginal = 0.0;
        if (k1 > 0) {
            marginal = marginal_relative_entropy(*spec.marginal, w_prior.mean().head(k1),
                                                 w_prior.covariance().topLeftCorner(k1, k1));
        }
        j["relative_entropy"] = relative_entropy(*c.tilted, marginal);
    }
    return c;
}

std::string var_csv(const VarReport& r) {
    std::string out = "level,var,std_error\n";
    for (std::size_t i = 0; i < r.levels.size(); ++i) {
        out += format_number(r.levels[i]) + "," + format_number(r.var_values[i]) + "," +
               format_number(r.std_errors[i]) + "\n";
    }
    return out;
}

void run_var(Calibrated& c, const VarTask& task, const RunOptions& options, std::map<std::string, std::string>& files) {
    const std::size_t n = options.samples.value_or(task.n_samples);
    const std::uint64_t seed = options.seed.value_or(task.seed);
    const SampleBatch batch = c.closed ? sample_posterior(*c.closed, n, seed) : sample_posterior(c.tilted_posterior(), n, seed);
    VarOptions vo;
    vo.convention = task.convention;
    const auto report = estimate_var(batch, task.weights, task.notional, task.levels, vo);
    files["var.csv"] = var_csv(report);
}

void run_price(Calibrated& c, const PriceTask& task) {
    const auto payoff = task.payoff.function();
    const PriceResult r = c.closed ? price_option(*c.closed, payoff, task.discount)
                                   : price_option(c.tilted_posterior(), c.to_xy(payoff), task.discount);
    ordered_json p;
    p["name"] = task.name;
    p["price"] = r.price;
    p["std_error"] = r.std_error;
    p["method"] = r.method;
    p["discount"] = task.discount;
    c.prices.push_back(p);
}

void run_tail(Calibrated& c, const TailTask& task, std::map<std::string, std::string>& files) {
    require(c.closed.has_value(), ErrorCode::Validation, "tail probe needs coordinate moment views");
    const auto report = tail_ratio_probe(*c.closed, task.coord - c.k1(), task.s_max, task.n_points);
    std::string out = "s,measured_ratio,target_ratio\n";
    for (std::size_t i = 0; i < report.probe_points.size(); ++i) {
        out += format_number(report.probe_points[i]) + "," + format_number(report.measured_ratios[i]) + "," +
               format_number(report.target_ratio) + "\n";
    }
    files["tail.csv"] = out;
    ordered_json t;
    t["coord"] = task.coord;
    t["alpha"] = report.alpha;
    t["target_ratio"] = report.target_ratio;
    t["final_ratio"] = report.measured_ratios.back();
    t["converged"] = report.converged;
    t["truncated"] = report.truncated;
    c.calibration["tail"] = t;
}

void run_sensitivities(Calibrated& c, const SensitivityTask& task) {
    SensitivityReport r;
    if (c.closed && task.linear) {
        const Eigen::VectorXd l_w = c.spec.view_map.inverse().transpose() * *task.linear;
        r = sensitivities(*c.closed, l_w, task.alpha);
        // Coordinate order to moment order.
        const auto& moments = c.views.moments();
        Eigen::VectorXd d(r.d_pi_d_c.size()), cov(r.cov_r_h.size());
        Eigen::MatrixXd v(r.v.rows(), r.v.cols()), u(r.u.rows(), r.u.cols());
        for (std::size_t a = 0; a < moments.size(); ++a) {
            const Index ia = *moments[a].coordinate - c.k1();
            d(static_cast<Index>(a)) = r.d_pi_d_c(ia);
            cov(static_cast<Index>(a)) = r.cov_r_h(ia);
            for (std::size_t b = 0; b < moments.size(); ++b) {
                const Index ib = *moments[b].coordinate - c.k1();
                v(static_cast<Index>(a), static_cast<Index>(b)) = r.v(ia, ib);
                u(static_cast<Index>(a), static_cast<Index>(b)) = r.u(ia, ib);
            }
        }
        r.d_pi_d_c = d;
        r.cov_r_h = cov;
        r.v = v;
        r.u = u;
    } else {
        FactorFunction f;
        if (task.linear) {
            const Eigen::VectorXd l = *task.linear;
            f = [l](const Eigen::VectorXd& z) { return l.dot(z); };
        } else {
            f = task.payoff->function();
        }
        r = sensitivities(c.tilted_posterior(), c.to_xy(f), task.alpha);
    }
    ordered_json s;
    s["name"] = task.name;
    s["value"] = r.value;
    s["d_pi_d_c"] = to_json(r.d_pi_d_c);
    s["cov_r_h"] = to_json(r.cov_r_h);
    s["v"] = to_json(r.v);
    s["u"] = to_json(r.u);
    if (r.d_pi_d_alpha) s["d_pi_d_alpha"] = *r.d_pi_d_alpha;
    c.sensitivities.push_back(s);
}

void run_density(Calibrated& c, const DensityTask& task, std::map<std::string, std::string>& files) {
    require(c.closed.has_value(), ErrorCode::Validation, "density output needs coordinate moment views");
    const auto& post = *c.closed;
    const Eigen::VectorXd l_w = c.spec.view_map.inverse().transpose() * task.functional;
    std::string out = "s,prior_density,posterior_density\n";
    for (int i = 0; i < task.points; ++i) {
        const double s = task.lo + (task.hi - task.lo) * i / double(task.points - 1);
        const double prior = prior_linear_density(c.spec.prior, task.functional, s);
        double posterior = 0.0;
        if (c.k1() == 1) {
            posterior = std::exp(posterior_linear_marginal_log(post, l_w, s));
        } else {
            const Eigen::VectorXd l_y = l_w.tail(post.dimension() - c.k1());
            posterior = std::exp(normal_log_pdf(s, l_w.dot(post.mean_w()), l_y.dot(post.conditional_covariance() * l_y)));
        }
        out += format_number(s) + "," + format_number(prior) + "," + format_number(posterior) + "\n";
    }
    files["density_" + task.name + ".csv"] = out;
}

std::string task_name(const Task& t) {
    static const char* names[] = {"calibrate", "var", "price", "tail", "sensitivities", "density"};
    return names[t.index()];
}

void commit(const RunOptions& options, const std::map<std::string, std::string>& files) {
    for (const auto& [name, content] : files) write_atomic(options.out_dir, name, content);
}

}  // namespace

RunResult run(const RunSpec& spec, const RunOptions& options, std::ostream& log) {
    RunResult result;
    std::map<std::string, std::string> files;
    const std::uint64_t seed = options.seed.value_or(spec.solver.seed);
    std::optional<Calibrated> c;
    try {
        c.emplace(calibrate(spec, seed));
    } catch (const Error& e) {
        log << "error: task=calibrate code=" << to_string(e.code()) << " message=" << e.what() << "\n";
        result.exit_code = e.code() == ErrorCode::Validation ? kExitValidation : kExitFailure;
        result.message = e.what();
        return result;
    }
    if (!c->report.converged) {
        files["calibration.json"] = dump(c->calibration);
        commit(options, files);
        log << "error: task=calibrate code=NotConverged message=" << c->report.message << "\n";
        result.exit_code = kExitNotConverged;
        result.files = std::move(files);
        result.message = c->report.message;
        return result;
    }
    for (const auto& task : spec.tasks) {
        try {
            std::visit(
                [&](const auto& t) {
                    using T = std::decay_t<decltype(t)>;
                    if constexpr (std::is_same_v<T, VarTask>) run_var(*c, t, options, files);
                    else if constexpr (std::is_same_v<T, PriceTask>) run_price(*c, t);
                    else if constexpr (std::is_same_v<T, TailTask>) run_tail(*c, t, files);
                    else if constexpr (std::is_same_v<T, SensitivityTask>) run_sensitivities(*c, t);
                    else if constexpr (std::is_same_v<T, DensityTask>) run_density(*c, t, files);
                },
                task);
        } catch (const Error& e) {
            log << "error: task=" << task_name(task) << " code=" << to_string(e.code()) << " message=" << e.what()
                << "\n";
            result.exit_code = e.code() == ErrorCode::Validation ? kExitValidation : kExitFailure;
            result.message = e.what();
            return result;
        }
    }
    if (!c->prices.empty()) c->calibration["prices"] = c->prices;
    files["calibration.json"] = dump(c->calibration);
    if (!c->sensitivities.empty()) {
        ordered_json s;
        s["schema_version"] = kSchemaVersion;
        s["name"] = spec.name;
        s["moment_names"] = c->calibration["moment_names"];
        s["results"] = c->sensitivities;
        files["sensitivities.json"] = dump(s);
    }
    commit(options, files);
    result.files = std::move(files);
    return result;
}

RunResult run_spec_file(const std::filesystem::path& spec_path, const RunOptions& options, std::ostream& log) {
    RunSpec spec;
    try {
        spec = load_spec(spec_path);
    } catch (const Error& e) {
        log << "error: task=validate code=" << to_string(e.code()) << " message=" << e.what() << "\n";
        RunResult r;
        r.exit_code = kExitValidation;
        r.message = e.what();
        return r;
    }
    return run(spec, options, log);
}

}  // namespace viewcal
