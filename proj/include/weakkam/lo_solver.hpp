#pragma once

#include "weakkam/dynamics.hpp"
#include "weakkam/grid.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

namespace weakkam {

struct SolverConfig {
    int n = 128;                 ///< grid points per axis
    double tau = 0.02;           ///< semigroup time step
    double lambda = 0.0;         ///< discount rate
    Vec c;                       ///< cohomology vector (empty = zero)
    double alpha = 0.0;          ///< additive constant of the modified Lagrangian
    bool alpha_auto = false;     ///< solvers replace `alpha` by estimate_alpha first
    double fix_tol = 1e-8;       ///< sup-norm fixed-point tolerance
    int max_iters = 200000;
    std::optional<double> vel_bound_override;  ///< speed cap replacing velocity_bound(tau)
    int quad_order = 3;          ///< Gauss-Legendre points per segment (1..5)
    int refine_iters = 40;       ///< Brent iteration cap per refined cell (0 disables refinement)
    bool cubic = false;          ///< cubic instead of linear interpolation inside refined cells (d = 1 only)
    double alpha_tol = 2e-4;     ///< agreement of consecutive window averages in estimate_alpha
    double alpha_drift_tol = 5e-3;  ///< accepted |mean(Tu - u)| / tau at a weak-KAM fixed point

    /// Throws ConfigError naming the first invalid field.
    void validate(int dim) const;
    Vec c_vector(int dim) const;
};

/// Discretization of the one-step action.
struct ActionKernel {
    double tau = 0.0;
    int quad_order = 3;
    double radius = 0.0;     ///< speed bound; candidates satisfy |displacement| <= radius * tau
    int refine_iters = 40;
};

/// Kernel for a config: radius from velocity_bound(tau) (or the override), at least h / tau.
ActionKernel make_kernel(const HamiltonianModel& model, const SolverConfig& config);

/// Modified action along q(s) = q1 + s delta / tau, s in [-tau, 0], with the given quadrature order:
/// integral of e^{lambda s} [L(q, v) - c.v + alpha].
double segment_action(const HamiltonianModel& model, const Vec& q1, const Vec& delta, double tau, double lambda,
                      const Vec& c, double alpha, int order);

/// Action of the straight nearest-image segment from q0 to q1, +inf beyond the kernel radius.
double one_step_action(const HamiltonianModel& model, const ActionKernel& kernel, const Vec& q0, const Vec& q1,
                       double lambda, const Vec& c, double alpha);

/// Discrete (discounted, cohomology-modified) Lax-Oleinik step on a fixed grid.
///
/// For every grid point q the objective e^{-lambda tau} u(y) + A(y, q) is scanned over
/// all lattice points y in the velocity ball (u linear between nodes). In d = 1 each cell
/// whose node values come within the curvature bound of the best node is then minimized
/// by Brent's method; in higher dimension a few coordinate sweeps polish the best node.
class LaxOleinikOperator {
public:
    LaxOleinikOperator(const HamiltonianModel& model, const SolverConfig& config);

    GridFunction apply(const GridFunction& u) const;
    /// Single-threaded reference, bit-identical to apply.
    GridFunction apply_serial(const GridFunction& u) const;

    const ActionKernel& kernel() const { return kernel_; }
    double discount() const { return discount_; }
    int n() const { return n_; }
    int offsets_per_axis() const { return 2 * reach_ + 1; }
    bool table_cached() const { return !table_.empty(); }

private:
    double minimize_at(const GridFunction& u, std::size_t i, std::vector<double>& row) const;
    void fill_row(std::size_t i, std::vector<double>& row) const;
    double action(const Vec& q1, const Vec& delta) const;

    HamiltonianModel model_;
    SolverConfig config_;
    ActionKernel kernel_;
    Vec c_;
    int n_ = 0;
    int d_ = 1;
    int reach_ = 0;               ///< lattice offsets per axis and side
    std::size_t row_len_ = 0;     ///< (2 reach + 1)^d
    double discount_ = 1.0;
    std::vector<double> table_;   ///< row per grid point, empty when computed on the fly
    GridFunction shape_;
};

/// One step T_tau. Builds the operator each call; solvers reuse one operator instead.
GridFunction lo_step(const HamiltonianModel& model, const GridFunction& u, const SolverConfig& config);

/// -T~(-u) with the velocity-reversed Lagrangian.
GridFunction symmetric_lo_step(const HamiltonianModel& model, const GridFunction& u, const SolverConfig& config);

/// Critical value from the mean decrement of the operator with alpha = 0, lambda = 0, averaged
/// over doubling windows of steps until consecutive window averages agree within alpha_tol.
double estimate_alpha(const HamiltonianModel& model, const SolverConfig& config);

struct SolveStats {
    int iterations = 0;
    double last_change = 0.0;
    double alpha = 0.0;       ///< the alpha used (after auto-estimation)
    double drift_rate = 0.0;  ///< final mean(Tu - u) / tau (weak-KAM solve)
};

/// Fixed point of the discounted operator, iterated from u0 (zero when absent).
GridFunction solve_discounted(const HamiltonianModel& model, const SolverConfig& config,
                              const GridFunction* u0 = nullptr, SolveStats* stats = nullptr);

/// Mean-normalized fixed point of the lambda = 0 operator starting from u0.
GridFunction solve_weak_kam(const HamiltonianModel& model, const SolverConfig& config, const GridFunction& u0,
                            SolveStats* stats = nullptr);

struct CharacteristicOptions {
    int samples = 0;          ///< path intervals; 0 picks about 100 per unit time
    double dt_max = 0.01;
    double flow_tol = 1e-10;
};

/// Backward orbit of (q, c + du(q)) over [-t, 0]. du is interpolated from central differences;
/// throws NonDifferentiablePointError when a surrounding node is a kink.
PhasePath backward_characteristic(const HamiltonianModel& model, const GridFunction& u, const Vec& q, double t,
                                  double lambda, const Vec& c, const CharacteristicOptions& opts = {});

struct ResidualField {
    std::vector<double> residual;  ///< NaN where the gradient is unreliable
    double sup = 0.0;
    std::size_t evaluated = 0;
};

/// lambda u + H(theta, c + du) - alpha at reliable gradient points.
ResidualField hj_residual(const HamiltonianModel& model, const GridFunction& u, double lambda, const Vec& c,
                          double alpha);

struct InequalityOptions {
    std::optional<double> tol;  ///< unset: 5 x grid_bound
    double height_scale = 1.0;  ///< multiplies the Green heights (negative controls)
    std::size_t stride = 1;     ///< every stride-th grid point is a candidate sample
};

struct InequalityReport {
    GridFunction u_t;
    std::size_t samples = 0;         ///< Alexandrov and reliable-gradient points checked
    std::size_t excluded = 0;        ///< dropped for conjugate points
    std::vector<std::size_t> violating;
    double tol = 0.0;
    double grid_bound = 0.0;
    double worst = 0.0;              ///< most negative eigenvalue of H(G_t) - D^2u_t
    double pass_fraction() const {
        return samples == 0 ? 0.0 : 1.0 - static_cast<double>(violating.size()) / static_cast<double>(samples);
    }
};

/// Iterates round(t / tau) steps from u0 and checks D^2 u_t <= H(G_t(q, c + du_t(q))) + tol.
/// grid_bound is the median over checked samples of |D_h - D_2h| plus h, the scale of the
/// second-difference error.
InequalityReport hessian_green_inequality_check(const HamiltonianModel& model, const GridFunction& u0, double t,
                                                const SolverConfig& config, const InequalityOptions& opts = {});

}  // namespace weakkam
