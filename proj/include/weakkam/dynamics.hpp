#pragma once

#include "weakkam/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace weakkam {

struct HamiltonianGradient {
    Vec dq;  ///< dH/dq
    Vec dp;  ///< dH/dp
};

/// Second derivatives. `qp(i, j)` is d2H / dq_i dp_j, so the (p, q) block is `qp.transpose()`.
struct HamiltonianHessian {
    Mat qq;
    Mat qp;
    Mat pp;
};

/// Evaluator bundle for a Tonelli Hamiltonian on T^d x R^d and its Legendre-dual Lagrangian.
struct HamiltonianModel {
    int dim = 1;
    std::function<double(const Vec& q, const Vec& p)> eval_H;
    std::function<HamiltonianGradient(const Vec& q, const Vec& p)> eval_grad;
    std::function<HamiltonianHessian(const Vec& q, const Vec& p)> eval_hess;
    std::function<double(const Vec& q, const Vec& v)> eval_L;
    std::function<Vec(const Vec& q, const Vec& v)> eval_Lv;
    std::string kind_tag = "custom";
};

/// One term a*cos(2 pi k.q) + b*sin(2 pi k.q) of a truncated Fourier potential.
struct FourierTerm {
    std::vector<int> k;
    double a = 0.0;
    double b = 0.0;
};

/// V(q) = sum of FourierTerm over a d-dimensional torus.
struct FourierPotential {
    int dim = 1;
    std::vector<FourierTerm> terms;

    double value(const Vec& q) const;
    Vec gradient(const Vec& q) const;
    Mat hessian(const Vec& q) const;
};

/// H = |p|^2 / 2 + V(q).
HamiltonianModel mechanical_model(FourierPotential potential, std::string tag = "mechanical");
/// H = p^2 / 2 + cos(2 pi q), d = 1.
HamiltonianModel pendulum_model();
/// H = |p|^2 / 2.
HamiltonianModel free_model(int dim = 1);

/// Built-in model by name: "pendulum", "free", "free:<d>", "mechanical:<terms>".
///
/// `<terms>` is a comma-separated list of `k=a:b` with `k` an integer (d = 1) or
/// `k1xk2x...` (d > 1). Example: "mechanical:1=1:0" is the pendulum and
/// "mechanical:1x0=1:0,0x1=0.5:0" a separable 2D potential.
HamiltonianModel model_from_spec(const std::string& spec);

/// H~(q, p) = H(q, -p), i.e. the velocity-reversed Lagrangian L~(q, v) = L(q, -v).
HamiltonianModel reversed(const HamiltonianModel& model);

/// Result of sampling the Tonelli / Legendre invariants of a model.
struct ModelCheck {
    bool convex = true;             ///< H_pp Cholesky succeeded everywhere
    double legendre_error = 0.0;    ///< max |L_v(q, H_p(q, p)) - p|
    double symmetry_error = 0.0;    ///< max asymmetry of H_qq, H_pp
    int samples = 0;
};

ModelCheck validate_model(const HamiltonianModel& model, int samples = 200, unsigned seed = 1,
                          double p_range = 3.0);

/// Legendre map (q, p) -> (q, H_p(q, p)).
std::pair<Vec, Vec> legendre(const HamiltonianModel& model, const PhasePoint& x);
/// Inverse Legendre map (q, v) -> (q, L_v(q, v)).
PhasePoint legendre_inverse(const HamiltonianModel& model, const Vec& q, const Vec& v);

struct FlowParams {
    double lambda = 0.0;   ///< discount rate
    double dt_max = 0.05;  ///< largest integrator step
    double tol = 1e-10;    ///< local error per unit time

    void validate() const;
};

/// phi_t^lambda(x) for the conformal flow q' = H_p, p' = -H_q - lambda p. Negative t integrates backward.
PhasePoint integrate_flow(const HamiltonianModel& model, const PhasePoint& x, double t,
                          const FlowParams& params);

/// Flow plus variational equation for a d-column frame:
/// X' = H_pq X + H_pp Y,  Y' = -H_qq X - H_qp Y - lambda Y.
std::pair<PhasePoint, TangentFrame> integrate_with_tangent(const HamiltonianModel& model,
                                                           const PhasePoint& x, double t,
                                                           const FlowParams& params,
                                                           const TangentFrame& frame);

/// Sampled phase path, `times[i]` relative to the starting point.
struct PhasePath {
    std::vector<double> times;
    std::vector<PhasePoint> points;
};

/// Integrate and record `samples + 1` equally spaced states on [0, t].
PhasePath sample_flow(const HamiltonianModel& model, const PhasePoint& x, double t,
                      const FlowParams& params, int samples);

/// Max over interior nodes of | d/dt L_v - L_q + lambda L_v | on a uniformly sampled curve.
/// `q[i]`, `v[i]` are the position and velocity at time i * dt.
double euler_lagrange_residual(const HamiltonianModel& model, const std::vector<Vec>& q,
                               const std::vector<Vec>& v, double dt, double lambda);

struct VelocityBoundOptions {
    double lambda = 0.0;
    Vec c;                    ///< constant 1-form; empty means zero
    double alpha = 0.0;       ///< additive constant of the modified Lagrangian
    int q_samples = 32;       ///< grid points per axis for the max / min over q
    double cap = 1e6;         ///< give up beyond this speed
};

/// Speed bound for minimizers of the (modified) action over horizons >= t.
///
/// Follows the a-priori compactness argument: M_L is the max of the modified
/// Lagrangian on the ball of radius diam / t, eps = 0.1 (1 + M_L), and the speed
/// is doubled from 2 diam / t until L exceeds (M_L + eps)(1 + e^{(lambda + eps) t}) + eps
/// at every sampled q. Since sub-arcs of minimizers are minimizers, the bound for
/// horizon t is the minimum of that raw bound over the fixed anchors 2^{k/8} <= t,
/// which makes it non-increasing in t.
double velocity_bound(const HamiltonianModel& model, double t, const VelocityBoundOptions& opts = {});

/// The raw (single-horizon) bound used by velocity_bound.
double velocity_bound_raw(const HamiltonianModel& model, double t, const VelocityBoundOptions& opts = {});

}  // namespace weakkam
