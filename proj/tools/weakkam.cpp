#include "weakkam/errors.hpp"
#include "weakkam/experiment.hpp"
#include "weakkam/green.hpp"
#include "weakkam/io.hpp"
#include "weakkam/lo_solver.hpp"
#include "weakkam/pendulum_oracle.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace {

using namespace weakkam;
using nlohmann::json;

enum Exit { kOk = 0, kProperty = 1, kConfig = 2, kNumerical = 3 };

std::string read_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config", "cannot open " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

Vec to_vec(const std::vector<double>& v) {
    Vec out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
    return out;
}

std::vector<double> from_vec(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json matrix_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        rows.push_back(r);
    }
    return rows;
}

// solve / discounted

struct SolveArgs {
    std::string config;
    std::string model = "pendulum";
    std::vector<double> c;
    int n = 128;
    double tau = 0.02;
    double lambda = 0.0;
    std::string alpha = "auto";
    double fix_tol = 1e-4;
    int max_iters = 200000;
    double vel_bound = 0.0;
    int refine_iters = 40;
    bool cubic = false;
    double u0_amplitude = 0.0;
    double max_residual = 0.0;
    std::string out = "u.csv";
};

void add_solve_options(CLI::App* cmd, SolveArgs& a, bool discounted) {
    cmd->add_option("--config", a.config, "JSON file with any of the fields below; flags override it");
    cmd->add_option("--model", a.model, "pendulum | free | free:<d> | mechanical:<terms>");
    cmd->add_option("--c", a.c, "cohomology vector (one value per dimension)");
    cmd->add_option("--n", a.n, "grid points per axis");
    cmd->add_option("--tau", a.tau, "time step");
    cmd->add_option("--lambda", a.lambda, discounted ? "discount rate (> 0)" : "discount rate (0: weak-KAM)");
    cmd->add_option("--alpha", a.alpha, "additive constant, or 'auto' to estimate the critical value");
    cmd->add_option("--fix-tol", a.fix_tol, "sup-norm fixed-point tolerance");
    cmd->add_option("--max-iters", a.max_iters, "iteration cap");
    cmd->add_option("--vel-bound", a.vel_bound, "speed cap replacing the a-priori velocity bound");
    cmd->add_option("--refine-iters", a.refine_iters, "Brent iteration cap per refined cell");
    cmd->add_flag("--cubic", a.cubic, "cubic interpolation inside refined cells (d = 1)");
    cmd->add_option("--u0-amplitude", a.u0_amplitude, "initial field a cos(2 pi theta_1)");
    cmd->add_option("--max-residual", a.max_residual, "exit 1 when the sup HJ residual exceeds this (0: off)");
    cmd->add_option("--out", a.out, "output grid file (.csv text, anything else binary)");
}

// JSON fields first, then explicitly given flags
SolverConfig solve_config(const CLI::App* cmd, SolveArgs& a, std::string& model) {
    json j = json::object();
    if (!a.config.empty()) {
        try {
            j = json::parse(read_file(a.config));
        } catch (const json::exception& e) {
            throw ConfigError("config", e.what());
        }
        if (!j.is_object()) throw ConfigError("config", "must be a JSON object");
    }
    auto given = [&](const char* flag) { return cmd->count(flag) > 0; };
    SolverConfig cfg;
    model = a.model;
    bool alpha_auto = true;
    double alpha = 0.0;
    static const std::map<std::string, std::string> flag_of{
        {"model", "--model"},         {"c", "--c"},
        {"n", "--n"},                 {"tau", "--tau"},
        {"lambda", "--lambda"},       {"alpha", "--alpha"},
        {"fix_tol", "--fix-tol"},     {"max_iters", "--max-iters"},
        {"vel_bound_override", "--vel-bound"}, {"refine_iters", "--refine-iters"},
        {"cubic", "--cubic"},         {"u0_amplitude", "--u0-amplitude"}};
    for (const auto& [key, v] : j.items()) {
        const auto f = flag_of.find(key);
        if (f != flag_of.end() && given(f->second.c_str())) continue;
        try {
            if (key == "model") model = v.get<std::string>();
            else if (key == "c") a.c = v.is_array() ? v.get<std::vector<double>>() : std::vector<double>{v.get<double>()};
            else if (key == "n") a.n = v.get<int>();
            else if (key == "tau") a.tau = v.get<double>();
            else if (key == "lambda") a.lambda = v.get<double>();
            else if (key == "alpha") {
                alpha_auto = v.is_string() && v.get<std::string>() == "auto";
                if (!alpha_auto) alpha = v.get<double>();
            } else if (key == "fix_tol") a.fix_tol = v.get<double>();
            else if (key == "max_iters") a.max_iters = v.get<int>();
            else if (key == "vel_bound_override") a.vel_bound = v.get<double>();
            else if (key == "refine_iters") a.refine_iters = v.get<int>();
            else if (key == "cubic") a.cubic = v.get<bool>();
            else if (key == "u0_amplitude") a.u0_amplitude = v.get<double>();
            else if (key == "quad_order") cfg.quad_order = v.get<int>();
            else if (key == "alpha_tol") cfg.alpha_tol = v.get<double>();
            else if (key == "alpha_drift_tol") cfg.alpha_drift_tol = v.get<double>();
            else throw ConfigError(key, "unknown key");
        } catch (const json::exception& e) {
            throw ConfigError(key, std::string("bad value: ") + e.what());
        }
    }
    if (given("--alpha")) {
        alpha_auto = a.alpha == "auto";
        if (!alpha_auto) {
            char* end = nullptr;
            alpha = std::strtod(a.alpha.c_str(), &end);
            if (end == a.alpha.c_str() || *end != '\0') throw ConfigError("alpha", "must be a number or 'auto'");
        }
    }
    cfg.n = a.n;
    cfg.tau = a.tau;
    cfg.lambda = a.lambda;
    if (!a.c.empty()) cfg.c = to_vec(a.c);
    cfg.alpha = alpha;
    cfg.alpha_auto = alpha_auto;
    cfg.fix_tol = a.fix_tol;
    cfg.max_iters = a.max_iters;
    if (a.vel_bound != 0.0) cfg.vel_bound_override = a.vel_bound;
    cfg.refine_iters = a.refine_iters;
    cfg.cubic = a.cubic;
    return cfg;
}

int cmd_solve(const CLI::App* cmd, SolveArgs& a, bool discounted) {
    std::string model_spec;
    SolverConfig cfg = solve_config(cmd, a, model_spec);
    const auto model = model_from_spec(model_spec);
    cfg.validate(model.dim);
    if (cfg.c.size() != 0 && cfg.c.size() != model.dim) throw ConfigError("c", "needs one value per dimension");
    if (discounted && !(cfg.lambda > 0.0)) throw ConfigError("lambda", "discounted needs lambda > 0");

    GridFunction u0(cfg.n, model.dim);
    for (std::size_t i = 0; i < u0.size(); ++i) u0[i] = a.u0_amplitude * std::cos(2.0 * M_PI * u0.point(i)[0]);
    SolveStats stats;
    const GridFunction u =
        cfg.lambda > 0.0 ? solve_discounted(model, cfg, &u0, &stats) : solve_weak_kam(model, cfg, u0, &stats);
    io::save_grid(u, a.out);

    const auto r = hj_residual(model, u, cfg.lambda, cfg.c_vector(model.dim), stats.alpha);
    json rep;
    rep["model"] = model_spec;
    rep["out"] = a.out;
    rep["n"] = cfg.n;
    rep["c"] = from_vec(cfg.c_vector(model.dim));
    rep["lambda"] = cfg.lambda;
    rep["alpha"] = stats.alpha;
    rep["iterations"] = stats.iterations;
    rep["last_change"] = stats.last_change;
    rep["residual_sup"] = r.sup;
    rep["residual_points"] = r.evaluated;
    rep["oscillation"] = u.max() - u.min();
    std::cout << rep.dump(2) << '\n';
    {
        std::ofstream os(a.out + ".report.json");
        os << rep.dump(2) << '\n';
    }
    if (a.max_residual > 0.0 && !(r.sup <= a.max_residual)) {
        std::cerr << "HJ residual " << r.sup << " exceeds " << a.max_residual << '\n';
        return kProperty;
    }
    return kOk;
}

// green

struct GreenArgs {
    std::string model = "pendulum";
    std::vector<double> q{0.0};
    std::vector<double> p{0.0};
    double lambda = 0.0;
    bool plus = false;
    bool minus = false;
    double t = 0.0;
    std::vector<double> heights;
    bool monotonicity = false;
    std::vector<double> times{0.5, 1.0, 2.0, 4.0};
    std::vector<double> windows;
    std::vector<double> given;
    double conjugate = 0.0;
    bool assert_props = false;
    double tol = 1e-6;
    double t_max = 16384.0;
    double slack = 1e-7;
};

int cmd_green(GreenArgs& a) {
    const auto model = model_from_spec(a.model);
    if (static_cast<int>(a.q.size()) != model.dim || static_cast<int>(a.p.size()) != model.dim) {
        throw ConfigError("q", "--q and --p need one value per dimension");
    }
    const PhasePoint x{wrap_torus(to_vec(a.q)), to_vec(a.p)};
    GreenOptions opts;
    opts.tol = a.tol;
    opts.t_max = a.t_max;
    opts.monotonicity_slack = a.slack;

    json rep;
    bool ok = true;
    bool any = false;
    auto limit = [&](const char* key, const GreenResult& g) {
        json r;
        r["height"] = matrix_json(g.height);
        r["converged"] = g.converged;
        r["t_used"] = g.t_used;
        r["cauchy_gap"] = g.cauchy_gap;
        r["monotone"] = g.monotone;
        rep[key] = r;
        ok = ok && g.converged && g.monotone;
        any = true;
    };
    std::optional<GreenResult> gp, gm;
    if (a.plus) {
        gp = green_plus(model, x, a.lambda, opts);
        limit("plus", *gp);
    }
    if (a.minus) {
        gm = green_minus(model, x, a.lambda, opts);
        limit("minus", *gm);
    }
    if (gp && gm && gp->converged && gm->converged) {
        const double gap = min_eigenvalue_sym(gp->height - gm->height);
        rep["plus_minus_min_eig"] = gap;
        ok = ok && gap >= -a.tol;
    }
    if (a.t != 0.0) {
        if (!(a.t > 0.0)) throw ConfigError("t", "must be > 0");
        rep["t"] = a.t;
        rep["height_t"] = matrix_json(height_of_pushed_vertical(model, x, a.t, a.lambda, opts));
        any = true;
    }
    if (!a.heights.empty()) {
        json hs = json::array();
        for (double s : a.heights) {
            const auto ph = pushed_vertical_height(model, x, s, a.lambda, opts);
            hs.push_back({{"sigma", s}, {"height", matrix_json(ph.S)}, {"min_abs_det", ph.min_abs_det}});
        }
        rep["heights"] = hs;
        any = true;
    }
    if (a.monotonicity) {
        MonotonicityReport m;
        if (!a.windows.empty() || !a.given.empty()) {
            // order check on supplied scalar heights
            if (a.windows.size() != a.given.size()) throw ConfigError("given", "needs one height per window");
            std::vector<HeightMatrix> hs;
            for (double h : a.given) hs.push_back(Mat::Constant(1, 1, h));
            m = check_height_order(a.windows, hs, a.slack);
        } else {
            m = monotonicity_check(model, x, a.lambda, a.times, opts);
        }
        rep["monotonicity"] = {{"pass", m.pass}, {"worst_violation", m.worst_violation}, {"violations", m.violations}};
        ok = ok && m.pass;
        any = true;
    }
    if (a.conjugate != 0.0) {
        const auto c = detect_conjugate_points(model, x, a.lambda, a.conjugate, 1e-8, opts);
        rep["conjugate"] = {{"times", c.times}, {"min_abs_det", c.min_abs_det}};
        any = true;
    }
    if (!any) throw ConfigError("green", "choose at least one of --plus, --minus, --t, --heights, --monotonicity, --conjugate");
    std::cout << rep.dump(2) << '\n';
    if (a.assert_props && !ok) {
        std::cerr << "green property violated\n";
        return kProperty;
    }
    return kOk;
}

// experiment

struct ExperimentArgs {
    std::string preset;
    std::string config;
    std::string out;
    int n = 0;
    std::uint64_t seed = 0;
    int workers = 0;
    std::vector<double> values;
    std::vector<std::string> metrics;
    double budget = 0.0;
    std::vector<std::string> decreasing;
    bool print_spec = false;
};

int cmd_experiment(const CLI::App* cmd, ExperimentArgs& a) {
    experiment::ExperimentSpec spec;
    if (!a.config.empty()) {
        spec = experiment::from_json(read_file(a.config));
    } else if (!a.preset.empty()) {
        spec = experiment::preset(a.preset);
    } else {
        throw ConfigError("preset", "give --preset or --config");
    }
    if (!a.out.empty()) spec.output_dir = a.out;
    if (cmd->count("--n")) spec.n = a.n;
    if (cmd->count("--seed")) spec.seed = a.seed;
    if (cmd->count("--workers")) spec.workers = a.workers;
    if (!a.values.empty()) spec.values = a.values;
    if (!a.metrics.empty()) spec.metrics = a.metrics;
    if (cmd->count("--budget")) spec.budget_seconds = a.budget;
    spec.validate();
    if (a.print_spec) {
        std::cout << json::parse(experiment::to_json(spec)).dump(2) << '\n';
        return kOk;
    }
    for (const auto& m : a.decreasing) {
        if (std::find(spec.metrics.begin(), spec.metrics.end(), m) == spec.metrics.end()) {
            throw ConfigError("assert-decreasing", "metric '" + m + "' is not recorded");
        }
    }

    const auto man = experiment::run(spec);
    const auto csv = experiment::write_outputs(spec, man);
    std::cout << experiment::csv_text(spec, man);
    std::cerr << "wrote " << csv << " (" << man.total_seconds << " s, budget " << man.budget_seconds << " s)\n";

    bool failed = false;
    for (const auto& row : man.rows) failed = failed || row.status != "ok";
    if (failed) {
        std::cerr << "some sweep points failed\n";
        return kNumerical;
    }
    bool ok = man.total_seconds <= man.budget_seconds;
    if (!ok) std::cerr << "run exceeded its budget\n";
    for (const auto& m : a.decreasing) {
        const auto k = static_cast<std::size_t>(std::find(spec.metrics.begin(), spec.metrics.end(), m) -
                                                spec.metrics.begin());
        for (std::size_t r = 1; r < man.rows.size(); ++r) {
            if (!(man.rows[r].metrics[k] < man.rows[r - 1].metrics[k])) {
                std::cerr << "metric " << m << " is not strictly decreasing at row " << r << '\n';
                ok = false;
            }
        }
    }
    return ok ? kOk : kProperty;
}

// oracle

struct OracleArgs {
    double I = pendulum::kIPlus + 0.01;
    int samples = 100;
    bool gaps = false;
    double eps = 0.05;
};

int cmd_oracle(OracleArgs& a) {
    const auto curve = pendulum::curve_of_I(a.I);
    std::printf("# I %s e %s c(e) %s\n", io::format_double(curve.I).c_str(), io::format_double(curve.e).c_str(),
                io::format_double(pendulum::c_of_e(curve.e)).c_str());
    if (a.gaps) {
        const auto w = pendulum::oracle_sup_d2_gap(a.I);
        std::printf("# sup_d2 %s at q %s d21 %s measure_exceed(%g) %s\n", io::format_double(w.value).c_str(),
                    io::format_double(w.q).c_str(), io::format_double(pendulum::oracle_d21_gap(a.I)).c_str(), a.eps,
                    io::format_double(pendulum::oracle_measure_exceed(a.I, a.eps)).c_str());
    }
    std::printf("q,u,du,d2u\n");
    for (int k = 0; k < a.samples; ++k) {
        // cell midpoints keep the separatrix singularity at q = 0 off the sample set
        const double q = (k + 0.5) / a.samples;
        std::printf("%s,%s,%s,%s\n", io::format_double(q).c_str(), io::format_double(pendulum::oracle_u(a.I, q)).c_str(),
                    io::format_double(pendulum::oracle_du(a.I, q)).c_str(),
                    io::format_double(pendulum::oracle_d2u(a.I, q)).c_str());
    }
    return kOk;
}

const char* kCsvHelp =
    "CSV columns: <sweep variable>, one column per requested metric, status.\n"
    "  C0             sup |u - ref| modulo constants\n"
    "  hausdorff      Hausdorff distance between graph clouds {(theta, c + du)}\n"
    "  fiberwise      sup over the cloud of |p - (c + dref)(theta)|\n"
    "  d21            integral of |D^2u - D^2ref| (spectral norm)\n"
    "  measure_exceed measure of {D^2u - D^2ref >= eps}\n"
    "  sup_d2         max |D^2u - D^2ref|\n"
    "status is 'ok' or 'failed: <reason>'. Also written: <name>_<metric>.dat (two columns)\n"
    "and <name>_manifest.json (config hash, version, rows, wall-clock per point).";

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weak-KAM toolkit: Lax-Oleinik solvers, Green bundles, pendulum closed forms"};
    app.require_subcommand(1);
    app.set_version_flag("--version", weakkam::experiment::version());

    SolveArgs solve_args;
    auto* solve = app.add_subcommand("solve", "weak-KAM (lambda = 0) or discounted fixed point");
    add_solve_options(solve, solve_args, false);

    SolveArgs disc_args;
    disc_args.lambda = 0.1;
    disc_args.fix_tol = 1e-7;
    auto* disc = app.add_subcommand("discounted", "discounted fixed point (lambda > 0)");
    add_solve_options(disc, disc_args, true);

    GreenArgs green_args;
    auto* green = app.add_subcommand("green", "Green bundle heights, monotonicity and conjugate points");
    green->add_option("--model", green_args.model, "model spec");
    green->add_option("--q", green_args.q, "base point");
    green->add_option("--p", green_args.p, "momentum");
    green->add_option("--lambda", green_args.lambda, "discount rate");
    green->add_flag("--plus", green_args.plus, "limit G_+");
    green->add_flag("--minus", green_args.minus, "limit G_-");
    green->add_option("--t", green_args.t, "height of G_t for this t > 0");
    green->add_option("--heights", green_args.heights, "heights at these signed windows");
    green->add_flag("--monotonicity", green_args.monotonicity, "check the order of heights at windows +-times");
    green->add_option("--times", green_args.times, "window lengths for --monotonicity");
    green->add_option("--windows", green_args.windows, "signed windows of supplied heights (with --given)");
    green->add_option("--given", green_args.given, "supplied scalar heights to order-check");
    green->add_option("--conjugate", green_args.conjugate, "conjugate times of the vertical over [0, T]");
    green->add_flag("--assert", green_args.assert_props, "exit 1 on a property violation");
    green->add_option("--tol", green_args.tol, "Cauchy tolerance of the G_+- limits");
    green->add_option("--t-max", green_args.t_max, "longest window of the G_+- limits");
    green->add_option("--slack", green_args.slack, "eigenvalue slack of the order checks");

    ExperimentArgs exp_args;
    auto* exp = app.add_subcommand("experiment", "parameter sweeps with CSV, plot data and manifest");
    exp->add_option("--preset", exp_args.preset, "discounted-pendulum | cohom-pendulum | lo-iteration | lo-pendulum");
    exp->add_option("--config", exp_args.config, "JSON spec (may name a \"preset\" to start from)");
    exp->add_option("--out", exp_args.out, "output directory");
    exp->add_option("--n", exp_args.n, "grid points per axis");
    exp->add_option("--seed", exp_args.seed, "seed of the sampling-based metrics");
    exp->add_option("--workers", exp_args.workers, "sweep points computed concurrently");
    exp->add_option("--values", exp_args.values, "sweep list");
    exp->add_option("--metrics", exp_args.metrics, "metric names");
    exp->add_option("--budget", exp_args.budget, "wall-clock budget in seconds");
    exp->add_option("--assert-decreasing", exp_args.decreasing, "exit 1 unless this metric column strictly decreases");
    exp->add_flag("--print-spec", exp_args.print_spec, "print the resolved spec and exit");
    exp->footer(kCsvHelp);

    OracleArgs oracle_args;
    auto* oracle = app.add_subcommand("oracle", "pendulum closed forms u_I, u_I', u_I'' as CSV");
    oracle->add_option("--I", oracle_args.I, "cohomology I >= 4/pi");
    oracle->add_option("--samples", oracle_args.samples, "number of cell-midpoint samples")->check(CLI::PositiveNumber);
    oracle->add_flag("--gaps", oracle_args.gaps, "also print the gaps to the separatrix solution");
    oracle->add_option("--eps", oracle_args.eps, "threshold of the measure gap");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*solve) return cmd_solve(solve, solve_args, false);
        if (*disc) return cmd_solve(disc, disc_args, true);
        if (*green) return cmd_green(green_args);
        if (*exp) return cmd_experiment(exp, exp_args);
        if (*oracle) return cmd_oracle(oracle_args);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfig;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    }
    return kOk;
}
