#include "weakkam/dynamics.hpp"
#include "weakkam/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace weakkam {

std::pair<Vec, Vec> legendre(const HamiltonianModel& model, const PhasePoint& x) {
    const auto g = model.eval_grad(x.q, x.p);
    if (!g.dp.allFinite()) throw EvaluationError("non-finite H_p in Legendre map");
    return {x.q, g.dp};
}

PhasePoint legendre_inverse(const HamiltonianModel& model, const Vec& q, const Vec& v) {
    Vec p = model.eval_Lv(q, v);
    if (!p.allFinite()) throw EvaluationError("non-finite L_v in inverse Legendre map");
    return {q, p};
}

PhasePath sample_flow(const HamiltonianModel& model, const PhasePoint& x, double t, const FlowParams& params,
                      int samples) {
    if (samples < 1) throw InputError("sample_flow needs at least one interval");
    PhasePath path;
    path.times.reserve(static_cast<std::size_t>(samples) + 1);
    path.points.reserve(static_cast<std::size_t>(samples) + 1);
    PhasePoint cur{wrap_torus(x.q), x.p};
    path.times.push_back(0.0);
    path.points.push_back(cur);
    const double dt = t / samples;
    for (int i = 1; i <= samples; ++i) {
        cur = integrate_flow(model, cur, dt, params);
        path.times.push_back(i * dt);
        path.points.push_back(cur);
    }
    return path;
}

double euler_lagrange_residual(const HamiltonianModel& model, const std::vector<Vec>& q, const std::vector<Vec>& v,
                               double dt, double lambda) {
    if (q.size() != v.size()) throw InputError("position and velocity samples differ in length");
    if (q.size() < 5) throw InputError("Euler-Lagrange residual needs at least 5 nodes");
    if (!(dt > 0.0)) throw InputError("time step must be positive");

    std::vector<Vec> Lv(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) Lv[i] = model.eval_Lv(q[i], v[i]);

    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < q.size(); ++i) {
        // L_q(q, v) = -H_q(q, L_v(q, v))
        const Vec Lq = -model.eval_grad(q[i], Lv[i]).dq;
        const Vec r = (Lv[i + 1] - Lv[i - 1]) / (2.0 * dt) - Lq + lambda * Lv[i];
        worst = std::max(worst, r.norm());
    }
    return worst;
}

namespace {

// Unit directions used for the max / min of L over spheres in velocity space.
std::vector<Vec> sphere_directions(int d) {
    std::vector<Vec> dirs;
    if (d == 1) {
        dirs.push_back(Vec::Constant(1, 1.0));
        dirs.push_back(Vec::Constant(1, -1.0));
        return dirs;
    }
    if (d == 2) {
        for (int k = 0; k < 64; ++k) {
            const double a = 2.0 * std::numbers::pi * k / 64.0;
            Vec e(2);
            e << std::cos(a), std::sin(a);
            dirs.push_back(e);
        }
        return dirs;
    }
    for (int i = 0; i < d; ++i) {
        Vec e = Vec::Zero(d);
        e[i] = 1.0;
        dirs.push_back(e);
        dirs.push_back(-e);
    }
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    for (int k = 0; k < 128; ++k) {
        Vec e(d);
        for (int i = 0; i < d; ++i) e[i] = g(rng);
        dirs.push_back(e / e.norm());
    }
    return dirs;
}

std::vector<Vec> q_grid(int d, int per_axis) {
    const int m = d <= 2 ? per_axis : std::min(per_axis, 8);
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(m);
    std::vector<Vec> pts;
    pts.reserve(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        Vec q(d);
        std::size_t r = idx;
        for (int i = 0; i < d; ++i) {
            q[i] = static_cast<double>(r % static_cast<std::size_t>(m)) / m;
            r /= static_cast<std::size_t>(m);
        }
        pts.push_back(q);
    }
    return pts;
}

}  // namespace

double velocity_bound_raw(const HamiltonianModel& model, double t, const VelocityBoundOptions& opts) {
    if (!(t > 0.0) || !std::isfinite(t)) throw InputError("velocity bound horizon must be positive");
    const int d = model.dim;
    const Vec c = opts.c.size() == 0 ? Vec(Vec::Zero(d)) : opts.c;
    if (c.size() != d) throw InputError("cohomology vector has wrong dimension");

    const auto dirs = sphere_directions(d);
    const auto qs = q_grid(d, std::max(opts.q_samples, 2));
    auto Lc = [&](const Vec& q, const Vec& v) {
        const double val = model.eval_L(q, v) - c.dot(v) + opts.alpha;
        if (!std::isfinite(val)) throw EvaluationError("non-finite Lagrangian in velocity bound");
        return val;
    };

    const double diam = std::sqrt(static_cast<double>(d)) / 2.0;
    const double v0 = diam / t;
    double ML = 0.0;
    for (const auto& q : qs)
        for (const auto& e : dirs) ML = std::max(ML, Lc(q, v0 * e));

    const double eps = 0.1 * (1.0 + ML);
    const double threshold = (ML + eps) * (1.0 + std::exp((opts.lambda + eps) * t)) + eps;

    for (double R = 2.0 * v0; R <= opts.cap; R *= 2.0) {
        double lowest = std::numeric_limits<double>::infinity();
        for (const auto& q : qs)
            for (const auto& e : dirs) lowest = std::min(lowest, Lc(q, R * e));
        if (lowest >= threshold) return R;
    }
    throw UnboundedModelError("velocity bound search exceeded cap " + std::to_string(opts.cap));
}

double velocity_bound(const HamiltonianModel& model, double t, const VelocityBoundOptions& opts) {
    if (!(t > 0.0) || !std::isfinite(t)) throw InputError("velocity bound horizon must be positive");
    double best = std::numeric_limits<double>::infinity();
    for (int k = -80;; ++k) {
        const double anchor = std::exp2(k / 8.0);
        if (anchor > t) break;
        try {
            best = std::min(best, velocity_bound_raw(model, anchor, opts));
        } catch (const UnboundedModelError&) {
            // long anchors overflow the exponential threshold; shorter ones already bound the speed
            if (std::isfinite(best)) break;
        }
    }
    return std::isfinite(best) ? best : velocity_bound_raw(model, t, opts);
}

}  // namespace weakkam
