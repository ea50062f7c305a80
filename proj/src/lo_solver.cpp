#include "weakkam/errors.hpp"
#include "weakkam/green.hpp"
#include "weakkam/lo_solver.hpp"
#include "weakkam/semiconcave.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace weakkam {

GridFunction lo_step(const HamiltonianModel& model, const GridFunction& u, const SolverConfig& config) {
    if (u.n() != config.n) throw ConfigError("n", "does not match the grid function");
    return LaxOleinikOperator(model, config).apply(u);
}

GridFunction symmetric_lo_step(const HamiltonianModel& model, const GridFunction& u, const SolverConfig& config) {
    SolverConfig rev = config;
    // (L - c.v)(q, -v) = L~(q, v) + c.v
    rev.c = -config.c_vector(model.dim);
    return -lo_step(reversed(model), -u, rev);
}

namespace {

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

SolverConfig with_alpha(const HamiltonianModel& model, const SolverConfig& config) {
    SolverConfig cfg = config;
    if (cfg.alpha_auto) {
        cfg.alpha = estimate_alpha(model, config);
        cfg.alpha_auto = false;
    }
    return cfg;
}

}  // namespace

double estimate_alpha(const HamiltonianModel& model, const SolverConfig& config) {
    SolverConfig cfg = config;
    cfg.lambda = 0.0;
    cfg.alpha = 0.0;
    cfg.alpha_auto = false;
    cfg.validate(model.dim);
    const LaxOleinikOperator T(model, cfg);

    // The per-step decrement oscillates while the transient is carried around the torus, so it is
    // averaged over the doubling windows (N / 2, N] and the window averages are compared instead.
    const int first = std::max(2, static_cast<int>(std::ceil(2.0 / cfg.tau)));
    GridFunction u(cfg.n, model.dim);
    double total = 0.0;  // mean(u_N) - mean(u_0) before normalization
    double total_half = 0.0;
    double prev_rate = std::numeric_limits<double>::quiet_NaN();
    int checkpoint = first;
    for (int it = 1; it <= cfg.max_iters; ++it) {
        GridFunction w = T.apply(u);
        const double mw = w.mean();
        total += mw - u.mean();
        w += -mw;
        u = std::move(w);
        if (it == checkpoint / 2) total_half = total;
        if (it == checkpoint) {
            const double rate = -(total - total_half) / ((it - it / 2) * cfg.tau);
            if (std::isfinite(prev_rate) && std::abs(rate - prev_rate) <= cfg.alpha_tol) return rate;
            prev_rate = rate;
            checkpoint *= 2;
            if (checkpoint / 2 == it) total_half = total;
        }
    }
    const double last = -(total - total_half) / (std::max(1, cfg.max_iters - checkpoint / 2) * cfg.tau);
    throw EstimationError(std::min(prev_rate, last), std::max(prev_rate, last),
                          "critical value estimate did not stabilize");
}

GridFunction solve_discounted(const HamiltonianModel& model, const SolverConfig& config, const GridFunction* u0,
                              SolveStats* stats) {
    config.validate(model.dim);
    if (!(config.lambda > 0.0)) throw ConfigError("lambda", "discounted solve needs lambda > 0");
    const SolverConfig cfg = with_alpha(model, config);
    const LaxOleinikOperator T(model, cfg);

    GridFunction u = u0 ? *u0 : GridFunction(cfg.n, model.dim);
    if (u.n() != cfg.n || u.dim() != model.dim) throw InputError("initial field does not match the grid");
    double prev_change = std::numeric_limits<double>::infinity();
    int increases = 0;
    for (int it = 1; it <= cfg.max_iters; ++it) {
        GridFunction w = T.apply(u);
        const double change = sup_distance(w, u);
        u = std::move(w);
        if (stats) {
            stats->iterations = it;
            stats->last_change = change;
            stats->alpha = cfg.alpha;
        }
        if (change <= cfg.fix_tol) {
            u.meta = {cfg.c_vector(model.dim), cfg.lambda, cfg.alpha};
            return u;
        }
        increases = change > prev_change ? increases + 1 : 0;
        if (increases >= 10) throw SolverError("discounted iteration is not contracting");
        prev_change = change;
    }
    throw SolverError("discounted iteration hit max_iters");
}

GridFunction solve_weak_kam(const HamiltonianModel& model, const SolverConfig& config, const GridFunction& u0,
                            SolveStats* stats) {
    config.validate(model.dim);
    if (config.lambda != 0.0) throw ConfigError("lambda", "weak-KAM solve needs lambda = 0");
    const SolverConfig cfg = with_alpha(model, config);
    const LaxOleinikOperator T(model, cfg);

    if (u0.n() != cfg.n || u0.dim() != model.dim) throw InputError("initial field does not match the grid");
    GridFunction u = u0;
    u += -u.mean();
    for (int it = 1; it <= cfg.max_iters; ++it) {
        GridFunction w = T.apply(u);
        const double mw = w.mean();
        // u has zero mean, so mw is the mean increment
        const double rate = mw / cfg.tau;
        w += -mw;
        const double change = sup_distance(w, u);
        u = std::move(w);
        if (stats) {
            stats->iterations = it;
            stats->last_change = change;
            stats->alpha = cfg.alpha;
            stats->drift_rate = rate;
        }
        if (change <= cfg.fix_tol) {
            if (std::abs(rate) > cfg.alpha_drift_tol) {
                throw AlphaMismatchError(rate, "weak-KAM iterates drift: alpha does not match the critical value");
            }
            u.meta = {cfg.c_vector(model.dim), 0.0, cfg.alpha};
            return u;
        }
    }
    throw SolverError("weak-KAM iteration hit max_iters");
}

PhasePath backward_characteristic(const HamiltonianModel& model, const GridFunction& u, const Vec& q, double t,
                                  double lambda, const Vec& c, const CharacteristicOptions& opts) {
    if (u.dim() != model.dim || q.size() != model.dim) throw InputError("dimension mismatch");
    if (!(t >= 0.0)) throw InputError("characteristic duration must be >= 0");
    const int d = model.dim;
    const Vec cc = c.size() == 0 ? Vec(Vec::Zero(d)) : c;
    const auto g = numeric_gradient(u);

    // multilinear interpolation of the central-difference gradient over the enclosing cell
    MultiIndex base{};
    std::array<double, kMaxDim> frac{};
    for (int a = 0; a < d; ++a) {
        const double x = wrap_unit(q[a]) * u.n();
        const double fl = std::floor(x);
        base[static_cast<std::size_t>(a)] = static_cast<int>(fl);
        frac[static_cast<std::size_t>(a)] = x - fl;
    }
    Vec du = Vec::Zero(d);
    for (int corner = 0; corner < (1 << d); ++corner) {
        MultiIndex idx = base;
        double w = 1.0;
        for (int a = 0; a < d; ++a) {
            const auto ua = static_cast<std::size_t>(a);
            if (corner & (1 << a)) {
                idx[ua] += 1;
                w *= frac[ua];
            } else {
                w *= 1.0 - frac[ua];
            }
        }
        if (w == 0.0) continue;
        const auto i = u.flat_index(idx);
        if (!g.reliable[i]) throw NonDifferentiablePointError("u has a kink next to the requested point");
        du += w * g.grad[i];
    }

    const PhasePoint x{wrap_torus(q), cc + du};
    if (t == 0.0) return PhasePath{{0.0}, {x}};
    FlowParams params;
    params.lambda = lambda;
    params.dt_max = opts.dt_max;
    params.tol = opts.flow_tol;
    const int samples = opts.samples > 0 ? opts.samples : std::max(1, static_cast<int>(std::ceil(100.0 * t)));
    return sample_flow(model, x, -t, params, samples);
}

ResidualField hj_residual(const HamiltonianModel& model, const GridFunction& u, double lambda, const Vec& c,
                          double alpha) {
    if (u.dim() != model.dim) throw InputError("dimension mismatch");
    const Vec cc = c.size() == 0 ? Vec(Vec::Zero(u.dim())) : c;
    const auto g = numeric_gradient(u);
    ResidualField r;
    r.residual.assign(u.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!g.reliable[i]) continue;
        const double res = lambda * u[i] + model.eval_H(u.point(i), cc + g.grad[i]) - alpha;
        r.residual[i] = res;
        r.sup = std::max(r.sup, std::abs(res));
        ++r.evaluated;
    }
    return r;
}

InequalityReport hessian_green_inequality_check(const HamiltonianModel& model, const GridFunction& u0, double t,
                                                const SolverConfig& config, const InequalityOptions& opts) {
    config.validate(model.dim);
    if (!(t >= 3.0 * config.tau)) throw InputError("inequality check needs t >= 3 tau");
    if (opts.stride < 1) throw ConfigError("stride", "must be >= 1");
    const SolverConfig cfg = with_alpha(model, config);
    const LaxOleinikOperator T(model, cfg);
    const int steps = static_cast<int>(std::lround(t / cfg.tau));
    const double t_eff = steps * cfg.tau;

    InequalityReport rep;
    rep.u_t = u0;
    for (int k = 0; k < steps; ++k) rep.u_t = T.apply(rep.u_t);

    const auto grad = numeric_gradient(rep.u_t);
    const auto hess = numeric_hessian(rep.u_t);
    const Vec cc = cfg.c_vector(model.dim);

    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < rep.u_t.size(); i += opts.stride) {
        if (hess.alexandrov[i] && grad.reliable[i]) candidates.push_back(i);
    }
    std::vector<double> disc;
    disc.reserve(candidates.size());
    for (auto i : candidates) disc.push_back(hess.discrepancy[i]);
    rep.grid_bound = median(disc) + rep.u_t.spacing();
    rep.tol = opts.tol ? *opts.tol : 5.0 * rep.grid_bound;

    std::vector<double> margin(candidates.size(), std::numeric_limits<double>::quiet_NaN());
    const auto M = static_cast<std::ptrdiff_t>(candidates.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t k = 0; k < M; ++k) {
        const auto i = candidates[static_cast<std::size_t>(k)];
        const PhasePoint x{rep.u_t.point(i), cc + grad.grad[i]};
        try {
            const Mat S = opts.height_scale * height_of_pushed_vertical(model, x, t_eff, cfg.lambda);
            margin[static_cast<std::size_t>(k)] = min_eigenvalue_sym(S - hess.hess[i]);
        } catch (const ConjugatePointError&) {
        }
    }
    rep.worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        if (std::isnan(margin[k])) {
            ++rep.excluded;
            continue;
        }
        ++rep.samples;
        rep.worst = std::min(rep.worst, margin[k]);
        if (margin[k] < -rep.tol) rep.violating.push_back(candidates[k]);
    }
    if (rep.samples == 0) rep.worst = 0.0;
    return rep;
}

}  // namespace weakkam
