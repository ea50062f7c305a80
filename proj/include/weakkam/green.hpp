#pragma once

#include "weakkam/dynamics.hpp"
#include "weakkam/grid.hpp"

#include <string>
#include <vector>

namespace weakkam {

/// Symmetric height of a Lagrangian plane transverse to the vertical.
using HeightMatrix = Mat;

/// Height of G_sigma(x) = D phi_sigma V(phi_{-sigma}(x)) for a signed window sigma != 0.
struct PushedHeight {
    HeightMatrix S;
    double asymmetry = 0.0;    ///< max |S - S^T| before symmetrization
    double min_abs_det = 0.0;  ///< smallest |det| of the vertical block seen on the window
};

/// Integration controls shared by the Green computations.
struct GreenOptions {
    double t_start = 1.0;      ///< first window of the doubling schedule
    double t_max = 16384.0;    ///< last window
    double tol = 1e-6;         ///< Cauchy gap declaring convergence
    double dt_max = 0.05;
    double flow_tol = 1e-10;
    double monotonicity_slack = 1e-7;
};

struct GreenResult {
    HeightMatrix height;
    double t_used = 0.0;
    bool converged = false;
    double cauchy_gap = 0.0;
    bool monotone = true;  ///< heights moved toward the limit at every doubling
    std::vector<double> windows;
    std::vector<HeightMatrix> heights;
};

struct ConjugateReport {
    std::vector<double> times;
    double min_abs_det = 0.0;  ///< over accepted steps after the first
};

/// Pushed-vertical height for a signed window. The linearized flow is integrated from x
/// over -sigma and the plane pulled back to the vertical, which stays accurate on
/// hyperbolic orbits where forward pushes lose the vertical direction.
/// Throws ConjugatePointError if the vertical block becomes singular on the window.
PushedHeight pushed_vertical_height(const HamiltonianModel& model, const PhasePoint& x, double sigma, double lambda,
                                    const GreenOptions& opts = {});

/// H(G_t(x)) for t > 0.
HeightMatrix height_of_pushed_vertical(const HamiltonianModel& model, const PhasePoint& x, double t, double lambda,
                                       const GreenOptions& opts = {});

/// Limit of H(G_t(x)) as t -> +inf on the doubling schedule t_start, 2 t_start, ..., t_max.
GreenResult green_plus(const HamiltonianModel& model, const PhasePoint& x, double lambda,
                       const GreenOptions& opts = {});
/// Limit of H(G_{-t}(x)) as t -> +inf.
GreenResult green_minus(const HamiltonianModel& model, const PhasePoint& x, double lambda,
                        const GreenOptions& opts = {});

struct MonotonicityReport {
    bool pass = true;
    double worst_violation = 0.0;  ///< most negative eigenvalue found in an ordered difference
    std::vector<std::string> violations;
};

/// Checks heights at signed windows: decreasing in sigma on sigma > 0, increasing in |sigma|
/// on sigma < 0, and every positive-window height above every negative-window height.
MonotonicityReport check_height_order(const std::vector<double>& windows, const std::vector<HeightMatrix>& heights,
                                      double slack);

/// Computes heights at windows +-times and runs check_height_order.
MonotonicityReport monotonicity_check(const HamiltonianModel& model, const PhasePoint& x, double lambda,
                                      const std::vector<double>& times, const GreenOptions& opts = {});

/// Zero crossings of det X(s) for the vertical at x pushed over [0, t] (t < 0 pushes backward),
/// located by bisection to `resolution`.
ConjugateReport detect_conjugate_points(const HamiltonianModel& model, const PhasePoint& x, double lambda, double t,
                                        double resolution = 1e-8, const GreenOptions& opts = {});

struct GreenRegularityReport {
    std::vector<std::size_t> samples;   ///< grid indices actually evaluated
    std::vector<double> discrepancy;    ///< |H(G) - D^2u| per evaluated sample
    std::size_t invalid = 0;            ///< samples dropped for conjugate points
    double measure = 0.0;               ///< fraction of evaluated samples above tol
};

/// Compares D^2u with H(G_+) (upper) or H(G_-) (lower) over (theta, c + du(theta))
/// at the requested grid indices; indices that are not Alexandrov points are skipped.
GreenRegularityReport green_regularity_test(const HamiltonianModel& model, const GridFunction& u, const Vec& c,
                                            double lambda, double tol, const std::vector<std::size_t>& sample_set,
                                            bool upper, const GreenOptions& opts = {});

inline GreenRegularityReport upper_green_regularity_test(const HamiltonianModel& model, const GridFunction& u,
                                                         const Vec& c, double lambda, double tol,
                                                         const std::vector<std::size_t>& sample_set,
                                                         const GreenOptions& opts = {}) {
    return green_regularity_test(model, u, c, lambda, tol, sample_set, true, opts);
}

inline GreenRegularityReport lower_green_regularity_test(const HamiltonianModel& model, const GridFunction& u,
                                                         const Vec& c, double lambda, double tol,
                                                         const std::vector<std::size_t>& sample_set,
                                                         const GreenOptions& opts = {}) {
    return green_regularity_test(model, u, c, lambda, tol, sample_set, false, opts);
}

}  // namespace weakkam
