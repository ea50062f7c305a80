#include "weakkam/experiment.hpp"
#include "weakkam/errors.hpp"
#include "weakkam/io.hpp"
#include "weakkam/pendulum_oracle.hpp"
#include "weakkam/semiconcave.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#ifndef WEAKKAM_VERSION
#define WEAKKAM_VERSION "0.0.0"
#endif

namespace weakkam::experiment {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const char* sweep_name(SweepKind k) {
    switch (k) {
        case SweepKind::lambda: return "lambda";
        case SweepKind::t: return "t";
        case SweepKind::I: return "I";
    }
    return "?";
}

SweepKind sweep_of(const std::string& s) {
    if (s == "lambda") return SweepKind::lambda;
    if (s == "t") return SweepKind::t;
    if (s == "I") return SweepKind::I;
    throw ConfigError("sweep", "must be lambda, t or I (got '" + s + "')");
}

double pi() { return std::acos(-1.0); }

GridFunction cosine_field(int n, int d, double a) {
    GridFunction u(n, d);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = a * std::cos(2.0 * pi() * u.point(i)[0]);
    return u;
}

GridFunction oracle_grid(double I, int n) {
    GridFunction u(n, 1);
    const auto s = pendulum::sample_u(I, n);
    for (int i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] = s[static_cast<std::size_t>(i)];
    return u;
}

// reference field with its exact or numeric graph
struct Reference {
    GridFunction u;
    GraphCloud cloud;
    GridSection section;
    SymField hess;
};

Reference oracle_reference(double I, int n) {
    Reference r;
    r.u = oracle_grid(I, n);
    r.cloud.dim = 1;
    r.cloud.source_tag = "oracle";
    r.section.n = n;
    r.section.d = 1;
    for (int i = 0; i < n; ++i) {
        const double q = static_cast<double>(i) / n;
        Vec th(1), p(1);
        th[0] = q;
        p[0] = I + pendulum::oracle_du(I, q);
        r.cloud.add(th, p);
        r.section.values.push_back(p);
    }
    r.hess = numeric_hessian(r.u);
    return r;
}

Reference numeric_reference(const GridFunction& u, const Vec& c) {
    Reference r;
    r.u = u;
    const auto g = numeric_gradient(u);
    r.cloud = graph_cloud(u, g, c, "solver");
    r.section.n = u.n();
    r.section.d = u.dim();
    for (std::size_t i = 0; i < u.size(); ++i) r.section.values.push_back(c + g.grad[i]);
    r.hess = numeric_hessian(u);
    return r;
}

GraphCloud limit_cloud(const GraphCloud& cloud, std::size_t limit, std::uint64_t seed) {
    if (cloud.size() <= limit) return cloud;
    std::vector<std::size_t> idx(cloud.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(limit);
    std::sort(idx.begin(), idx.end());
    GraphCloud out;
    out.dim = cloud.dim;
    out.source_tag = cloud.source_tag;
    for (auto i : idx) out.add(cloud.theta[i], cloud.p[i]);
    return out;
}

double sup_d2(const SymField& a, const SymField& b) {
    double best = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a.alexandrov[i] || !b.alexandrov[i]) continue;
        best = std::max(best, spectral_norm_sym(a.hess[i] - b.hess[i]));
    }
    return best;
}

std::vector<double> grid_metrics(const ExperimentSpec& spec, const GridFunction& u, const Vec& c,
                                 const Reference& ref) {
    std::vector<double> out;
    std::optional<SymField> hess;
    auto hessian = [&]() -> const SymField& {
        if (!hess) hess = numeric_hessian(u);
        return *hess;
    };
    for (const auto& m : spec.metrics) {
        if (m == "C0") {
            out.push_back(sup_distance_mod_constants(u, ref.u));
        } else if (m == "hausdorff") {
            const auto A = limit_cloud(graph_cloud(u, c), spec.cloud_limit, spec.seed);
            const auto B = limit_cloud(ref.cloud, spec.cloud_limit, spec.seed + 1);
            out.push_back(hausdorff_distance(A, B));
        } else if (m == "fiberwise") {
            out.push_back(fiberwise_sup_distance(graph_cloud(u, c), ref.section));
        } else if (m == "d21") {
            out.push_back(d21_distance(hessian(), ref.hess).value);
        } else if (m == "measure_exceed") {
            out.push_back(leb_measure_exceed(hessian(), ref.hess, spec.eps).value);
        } else {
            out.push_back(sup_d2(hessian(), ref.hess));
        }
    }
    return out;
}

std::vector<double> oracle_cohomology_metrics(const ExperimentSpec& spec, double I) {
    std::vector<double> out;
    const double Ip = pendulum::kIPlus;
    for (const auto& m : spec.metrics) {
        if (m == "d21") {
            out.push_back(pendulum::oracle_d21_gap(I));
        } else if (m == "sup_d2") {
            out.push_back(pendulum::oracle_sup_d2_gap(I).value);
        } else if (m == "measure_exceed") {
            out.push_back(pendulum::oracle_measure_exceed(I, spec.eps));
        } else if (m == "C0") {
            out.push_back(sup_distance_mod_constants(oracle_grid(I, spec.n), oracle_grid(Ip, spec.n)));
        } else {
            const auto a = oracle_reference(I, spec.n);
            const auto b = oracle_reference(Ip, spec.n);
            out.push_back(m == "hausdorff" ? hausdorff_distance(a.cloud, b.cloud)
                                           : fiberwise_sup_distance(a.cloud, b.section));
        }
    }
    return out;
}

bool is_pendulum(const ExperimentSpec& spec) { return spec.model == "pendulum"; }

}  // namespace

const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names{"C0", "hausdorff", "fiberwise", "d21", "measure_exceed", "sup_d2"};
    return names;
}

void ExperimentSpec::validate() const {
    if (name.empty() || !std::all_of(name.begin(), name.end(), [](char ch) {
            return std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_';
        })) {
        throw ConfigError("name", "must be a non-empty [A-Za-z0-9_-] string");
    }
    const auto m = model_from_spec(model);
    if (values.empty()) throw ConfigError("values", "sweep list is empty");
    for (double v : values) {
        if (!std::isfinite(v)) throw ConfigError("values", "must be finite");
    }
    if (values.size() > 1) {
        const bool up = values[1] > values[0];
        for (std::size_t i = 1; i < values.size(); ++i) {
            if (up ? !(values[i] > values[i - 1]) : !(values[i] < values[i - 1])) {
                throw ConfigError("values", "sweep list must be strictly monotone");
            }
        }
    }
    if (metrics.empty()) throw ConfigError("metrics", "at least one metric is required");
    std::set<std::string> seen;
    for (const auto& mm : metrics) {
        if (std::find(metric_names().begin(), metric_names().end(), mm) == metric_names().end()) {
            throw ConfigError("metrics", "unknown metric '" + mm + "'");
        }
        if (!seen.insert(mm).second) throw ConfigError("metrics", "duplicate metric '" + mm + "'");
    }
    if (n < 8) throw ConfigError("n", "must be >= 8");
    if (!(tau > 0.0)) throw ConfigError("tau", "must be > 0");
    if (!(lambda >= 0.0)) throw ConfigError("lambda", "must be >= 0");
    if (!std::isfinite(c)) throw ConfigError("c", "must be finite");
    if (alpha && !std::isfinite(*alpha)) throw ConfigError("alpha", "must be finite");
    if (reference != "oracle" && reference != "solver") throw ConfigError("reference", "must be oracle or solver");
    if (field != "oracle" && field != "solver") throw ConfigError("field", "must be oracle or solver");
    if (!(eps > 0.0)) throw ConfigError("eps", "must be > 0");
    if (cloud_limit < 1) throw ConfigError("cloud_limit", "must be >= 1");
    if (workers < 1) throw ConfigError("workers", "must be >= 1");
    if (!(budget_seconds > 0.0)) throw ConfigError("budget_seconds", "must be > 0");
    if (output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
    if (m.dim != 1 && (cubic || reference == "oracle")) {
        throw ConfigError(cubic ? "cubic" : "reference", "only available for d = 1");
    }
    switch (sweep) {
        case SweepKind::lambda:
            for (double v : values) {
                if (!(v > 0.0)) throw ConfigError("values", "lambda sweep values must be > 0");
            }
            break;
        case SweepKind::t:
            for (double v : values) {
                if (!(v >= tau)) throw ConfigError("values", "t sweep values must be >= tau");
            }
            break;
        case SweepKind::I:
            if (m.dim != 1) throw ConfigError("sweep", "I sweeps need a one-dimensional model");
            for (double v : values) {
                if (!(v >= pendulum::kIPlus)) throw ConfigError("values", "I sweep values must be >= 4/pi");
            }
            if (!is_pendulum(*this)) throw ConfigError("model", "I sweeps use the pendulum closed forms");
            break;
    }
    if (reference == "oracle") {
        if (!is_pendulum(*this)) throw ConfigError("reference", "oracle reference needs the pendulum model");
        if (sweep != SweepKind::I && !(c >= pendulum::kIPlus)) {
            throw ConfigError("c", "oracle reference needs c >= 4/pi");
        }
        if (sweep != SweepKind::I && lambda > 0.0) {
            throw ConfigError("lambda", "oracle reference is the undiscounted solution");
        }
    }
    solver_config().validate(m.dim);
}

SolverConfig ExperimentSpec::solver_config() const {
    SolverConfig cfg;
    cfg.n = n;
    cfg.tau = tau;
    cfg.lambda = lambda;
    cfg.c = Vec::Constant(1, c);
    cfg.alpha = alpha.value_or(0.0);
    cfg.fix_tol = fix_tol;
    cfg.max_iters = max_iters;
    cfg.vel_bound_override = vel_bound_override;
    cfg.cubic = cubic;
    return cfg;
}

std::vector<std::string> preset_names() {
    return {"discounted-pendulum", "cohom-pendulum", "lo-iteration", "lo-pendulum"};
}

ExperimentSpec preset(const std::string& name) {
    ExperimentSpec s;
    s.name = name;
    if (name == "discounted-pendulum") {
        s.model = "pendulum";
        s.sweep = SweepKind::lambda;
        s.values = {0.2, 0.1, 0.05, 0.025};
        s.n = 400;
        s.c = 1.5;
        s.metrics = {"hausdorff", "C0"};
        s.vel_bound_override = 6.0;
        s.budget_seconds = 300.0;
    } else if (name == "cohom-pendulum") {
        s.model = "pendulum";
        s.sweep = SweepKind::I;
        const double Ip = pendulum::kIPlus;
        s.values = {Ip + 0.1, Ip + 0.03, Ip + 0.01, Ip + 0.003};
        s.n = 400;
        s.field = "oracle";
        s.metrics = {"d21", "sup_d2", "measure_exceed", "C0"};
        s.budget_seconds = 30.0;
    } else if (name == "lo-iteration") {
        s.model = "free";
        s.sweep = SweepKind::t;
        s.values = {0.5, 1.0, 2.0, 4.0, 8.0};
        s.n = 128;
        s.c = 0.3;
        s.u0_amplitude = 0.3;
        s.reference = "solver";
        s.fix_tol = 1e-10;
        s.metrics = {"C0", "hausdorff"};
        s.budget_seconds = 60.0;
    } else if (name == "lo-pendulum") {
        s.model = "pendulum";
        s.sweep = SweepKind::t;
        s.values = {1.0, 2.0, 4.0, 8.0, 16.0};
        s.n = 400;
        s.c = 1.5;
        s.u0_amplitude = 0.1;
        s.cubic = true;
        s.vel_bound_override = 6.0;
        s.metrics = {"C0", "hausdorff", "d21"};
        s.budget_seconds = 120.0;
    } else {
        throw ConfigError("preset", "unknown preset '" + name + "'");
    }
    s.output_dir = "out/" + name;
    return s;
}

std::string to_json(const ExperimentSpec& s) {
    json j;
    j["name"] = s.name;
    j["model"] = s.model;
    j["sweep"] = sweep_name(s.sweep);
    j["values"] = s.values;
    j["n"] = s.n;
    j["tau"] = s.tau;
    j["c"] = s.c;
    j["lambda"] = s.lambda;
    j["alpha"] = s.alpha ? json(*s.alpha) : json(nullptr);
    j["metrics"] = s.metrics;
    j["output_dir"] = s.output_dir;
    j["seed"] = s.seed;
    j["reference"] = s.reference;
    j["field"] = s.field;
    j["u0_amplitude"] = s.u0_amplitude;
    j["fix_tol"] = s.fix_tol;
    j["max_iters"] = s.max_iters;
    j["vel_bound_override"] = s.vel_bound_override ? json(*s.vel_bound_override) : json(nullptr);
    j["cubic"] = s.cubic;
    j["eps"] = s.eps;
    j["cloud_limit"] = s.cloud_limit;
    j["workers"] = s.workers;
    j["budget_seconds"] = s.budget_seconds;
    return j.dump();
}

ExperimentSpec from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError("json", e.what());
    }
    if (!j.is_object()) throw ConfigError("json", "experiment spec must be an object");
    ExperimentSpec s;
    // a preset name as base lets a spec file override only a few fields
    if (j.contains("preset")) s = preset(j.at("preset").get<std::string>());
    for (const auto& [key, v] : j.items()) {
        try {
            if (key == "preset") continue;
            else if (key == "name") s.name = v.get<std::string>();
            else if (key == "model") s.model = v.get<std::string>();
            else if (key == "sweep") s.sweep = sweep_of(v.get<std::string>());
            else if (key == "values") s.values = v.get<std::vector<double>>();
            else if (key == "n") s.n = v.get<int>();
            else if (key == "tau") s.tau = v.get<double>();
            else if (key == "c") s.c = v.get<double>();
            else if (key == "lambda") s.lambda = v.get<double>();
            else if (key == "alpha") s.alpha = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
            else if (key == "metrics") s.metrics = v.get<std::vector<std::string>>();
            else if (key == "output_dir") s.output_dir = v.get<std::string>();
            else if (key == "seed") s.seed = v.get<std::uint64_t>();
            else if (key == "reference") s.reference = v.get<std::string>();
            else if (key == "field") s.field = v.get<std::string>();
            else if (key == "u0_amplitude") s.u0_amplitude = v.get<double>();
            else if (key == "fix_tol") s.fix_tol = v.get<double>();
            else if (key == "max_iters") s.max_iters = v.get<int>();
            else if (key == "vel_bound_override")
                s.vel_bound_override = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
            else if (key == "cubic") s.cubic = v.get<bool>();
            else if (key == "eps") s.eps = v.get<double>();
            else if (key == "cloud_limit") s.cloud_limit = v.get<std::size_t>();
            else if (key == "workers") s.workers = v.get<int>();
            else if (key == "budget_seconds") s.budget_seconds = v.get<double>();
            else throw ConfigError(key, "unknown key");
        } catch (const json::exception& e) {
            throw ConfigError(key, std::string("bad value: ") + e.what());
        }
    }
    return s;
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

const char* version() { return WEAKKAM_VERSION; }

RunManifest run(const ExperimentSpec& spec) {
    spec.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const auto model = model_from_spec(spec.model);
    SolverConfig base = spec.solver_config();
    const Vec c = base.c_vector(model.dim);

    const bool oracle_level = spec.sweep == SweepKind::I && spec.field == "oracle";
    if (spec.sweep == SweepKind::lambda && !spec.alpha) {
        base.alpha = estimate_alpha(model, base);
    }

    std::optional<Reference> ref;
    if (!oracle_level) {
        if (spec.reference == "oracle") {
            ref = oracle_reference(spec.sweep == SweepKind::I ? pendulum::kIPlus : spec.c, spec.n);
        } else {
            SolverConfig wk = base;
            wk.lambda = 0.0;
            if (spec.sweep == SweepKind::I) wk.c = Vec::Constant(1, pendulum::kIPlus);
            wk.alpha_auto = !spec.alpha;
            ref = numeric_reference(solve_weak_kam(model, wk, cosine_field(spec.n, model.dim, 0.0)),
                                    wk.c_vector(model.dim));
        }
    }

    RunManifest man;
    man.config_hash = fnv1a_hex(to_json(spec));
    man.version = version();
    man.budget_seconds = spec.budget_seconds;
    man.rows.resize(spec.values.size());
    const auto P = static_cast<std::ptrdiff_t>(spec.values.size());

#pragma omp parallel for schedule(dynamic, 1) num_threads(spec.workers) if (spec.workers > 1)
    for (std::ptrdiff_t k = 0; k < P; ++k) {
        auto& row = man.rows[static_cast<std::size_t>(k)];
        row.x = spec.values[static_cast<std::size_t>(k)];
        const auto s0 = std::chrono::steady_clock::now();
        try {
            if (oracle_level) {
                row.metrics = oracle_cohomology_metrics(spec, row.x);
            } else {
                SolverConfig cfg = base;
                GridFunction u0 = cosine_field(spec.n, model.dim, spec.u0_amplitude);
                GridFunction u;
                Vec cc = c;
                switch (spec.sweep) {
                    case SweepKind::lambda:
                        cfg.lambda = row.x;
                        u = solve_discounted(model, cfg, &u0);
                        break;
                    case SweepKind::t: {
                        const LaxOleinikOperator T(model, cfg);
                        const int steps = static_cast<int>(std::lround(row.x / cfg.tau));
                        u = u0;
                        for (int s = 0; s < steps; ++s) u = T.apply(u);
                        break;
                    }
                    case SweepKind::I:
                        cfg.c = Vec::Constant(1, row.x);
                        cfg.lambda = 0.0;
                        cfg.alpha_auto = !spec.alpha;
                        cc = cfg.c;
                        u = solve_weak_kam(model, cfg, u0);
                        break;
                }
                row.metrics = grid_metrics(spec, u, cc, *ref);
            }
        } catch (const std::exception& e) {
            row.metrics.assign(spec.metrics.size(), kNaN);
            row.status = std::string("failed: ") + e.what();
        }
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - s0).count();
    }
    man.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return man;
}

std::string csv_text(const ExperimentSpec& spec, const RunManifest& man) {
    std::ostringstream os;
    os << sweep_name(spec.sweep);
    for (const auto& m : spec.metrics) os << ',' << m;
    os << ",status\n";
    for (const auto& row : man.rows) {
        os << io::format_double(row.x);
        for (double v : row.metrics) os << ',' << io::format_double(v);
        std::string st = row.status;
        std::replace(st.begin(), st.end(), ',', ';');
        std::replace(st.begin(), st.end(), '\n', ' ');
        os << ',' << st << '\n';
    }
    return os.str();
}

std::string write_outputs(const ExperimentSpec& spec, const RunManifest& man) {
    namespace fs = std::filesystem;
    const fs::path dir(spec.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InputError("cannot create " + dir.string() + ": " + ec.message());

    auto write = [](const fs::path& p, const std::string& text) {
        std::ofstream os(p, std::ios::binary);
        os << text;
        if (!os) throw InputError("write failed for " + p.string());
    };

    const fs::path csv = dir / (spec.name + ".csv");
    write(csv, csv_text(spec, man));

    for (std::size_t m = 0; m < spec.metrics.size(); ++m) {
        std::ostringstream os;
        os << "# " << sweep_name(spec.sweep) << ' ' << spec.metrics[m] << '\n';
        for (const auto& row : man.rows) {
            if (row.status != "ok") continue;
            os << io::format_double(row.x) << ' ' << io::format_double(row.metrics[m]) << '\n';
        }
        write(dir / (spec.name + "_" + spec.metrics[m] + ".dat"), os.str());
    }

    json j;
    j["name"] = spec.name;
    j["config_hash"] = man.config_hash;
    j["version"] = man.version;
    j["spec"] = json::parse(to_json(spec));
    j["rows"] = json::array();
    for (const auto& row : man.rows) {
        json r;
        r[sweep_name(spec.sweep)] = row.x;
        json mm;
        for (std::size_t m = 0; m < spec.metrics.size(); ++m) {
            const double v = row.metrics[m];
            mm[spec.metrics[m]] = std::isfinite(v) ? json(v) : json(nullptr);
        }
        r["metrics"] = mm;
        r["status"] = row.status;
        r["seconds"] = row.seconds;
        j["rows"].push_back(r);
    }
    j["total_seconds"] = man.total_seconds;
    j["budget_seconds"] = man.budget_seconds;
    j["within_budget"] = man.total_seconds <= man.budget_seconds;
    write(dir / (spec.name + "_manifest.json"), j.dump(2) + "\n");
    return csv.string();
}

}  // namespace weakkam::experiment
