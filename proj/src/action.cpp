#include "weakkam/errors.hpp"
#include "weakkam/lo_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace weakkam {

namespace {

struct GaussRule {
    int order;
    std::array<double, 5> x;  ///< nodes on [-1, 1]
    std::array<double, 5> w;
};

const GaussRule& gauss_rule(int order) {
    static const std::array<GaussRule, 5> rules{{
        {1, {0.0}, {2.0}},
        {2, {-0.57735026918962576, 0.57735026918962576}, {1.0, 1.0}},
        {3, {-0.77459666924148338, 0.0, 0.77459666924148338},
         {0.55555555555555556, 0.88888888888888889, 0.55555555555555556}},
        {4, {-0.86113631159405258, -0.33998104358485626, 0.33998104358485626, 0.86113631159405258},
         {0.34785484513745386, 0.65214515486254614, 0.65214515486254614, 0.34785484513745386}},
        {5, {-0.90617984593866399, -0.53846931010664404, 0.0, 0.53846931010664404, 0.90617984593866399},
         {0.23692688505618909, 0.47862867049936647, 0.56888888888888889, 0.47862867049936647,
          0.23692688505618909}},
    }};
    if (order < 1 || order > 5) throw ConfigError("quad_order", "must be between 1 and 5");
    return rules[static_cast<std::size_t>(order - 1)];
}

}  // namespace

void SolverConfig::validate(int dim) const {
    if (n < 16) throw ConfigError("n", "must be >= 16");
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("tau", "must be finite and > 0");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda", "must be finite and >= 0");
    if (c.size() != 0 && c.size() != dim) throw ConfigError("c", "length must match the model dimension");
    if (c.size() != 0 && !c.allFinite()) throw ConfigError("c", "must be finite");
    if (!std::isfinite(alpha)) throw ConfigError("alpha", "must be finite");
    if (!(fix_tol > 0.0)) throw ConfigError("fix_tol", "must be > 0");
    if (max_iters < 1) throw ConfigError("max_iters", "must be >= 1");
    if (vel_bound_override && !(*vel_bound_override > 0.0)) {
        throw ConfigError("vel_bound_override", "must be > 0");
    }
    if (quad_order < 1 || quad_order > 5) throw ConfigError("quad_order", "must be between 1 and 5");
    if (refine_iters < 0) throw ConfigError("refine_iters", "must be >= 0");
    if (cubic && dim != 1) throw ConfigError("cubic", "cubic interpolation is only available for d = 1");
    if (!(alpha_drift_tol > 0.0)) throw ConfigError("alpha_drift_tol", "must be > 0");
    if (!(alpha_tol > 0.0)) throw ConfigError("alpha_tol", "must be > 0");
}

Vec SolverConfig::c_vector(int dim) const { return c.size() == 0 ? Vec(Vec::Zero(dim)) : c; }

ActionKernel make_kernel(const HamiltonianModel& model, const SolverConfig& config) {
    config.validate(model.dim);
    ActionKernel k;
    k.tau = config.tau;
    k.quad_order = config.quad_order;
    k.refine_iters = config.refine_iters;
    if (config.vel_bound_override) {
        k.radius = *config.vel_bound_override;
    } else {
        VelocityBoundOptions vb;
        vb.lambda = config.lambda;
        vb.c = config.c_vector(model.dim);
        vb.alpha = config.alpha;
        k.radius = velocity_bound(model, config.tau, vb);
    }
    const double h = 1.0 / config.n;
    k.radius = std::max(k.radius, h / config.tau);
    return k;
}

double segment_action(const HamiltonianModel& model, const Vec& q1, const Vec& delta, double tau, double lambda,
                      const Vec& c, double alpha, int order) {
    const auto& rule = gauss_rule(order);
    const Vec v = delta / tau;
    const double drift = c.dot(v);
    double acc = 0.0;
    for (int k = 0; k < rule.order; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        // s in [-tau, 0]
        const double s = 0.5 * tau * (rule.x[uk] - 1.0);
        const Vec q = q1 + (s / tau) * delta;
        const double L = model.eval_L(q, v);
        acc += rule.w[uk] * std::exp(lambda * s) * (L - drift + alpha);
    }
    const double a = 0.5 * tau * acc;
    if (!std::isfinite(a)) throw EvaluationError("non-finite one-step action");
    return a;
}

double one_step_action(const HamiltonianModel& model, const ActionKernel& kernel, const Vec& q0, const Vec& q1,
                       double lambda, const Vec& c, double alpha) {
    const Vec delta = nearest_image(Vec(q1 - q0));
    if (delta.norm() > kernel.radius * kernel.tau * (1.0 + 1e-12)) return std::numeric_limits<double>::infinity();
    const Vec cc = c.size() == 0 ? Vec(Vec::Zero(q0.size())) : c;
    return segment_action(model, q1, delta, kernel.tau, lambda, cc, alpha, kernel.quad_order);
}

}  // namespace weakkam
