#pragma once

#include <vector>

// Closed forms for H(q, p) = p^2 / 2 + cos(2 pi q) on the rotational region p > 0.
namespace weakkam::pendulum {

/// Cohomology of the separatrix, c(1) = 4 / pi.
inline constexpr double kIPlus = 1.2732395447351628;

struct PendulumCurve {
    double e = 1.0;       ///< energy level, >= 1
    double I = kIPlus;    ///< c(e)
};

/// c(e) = integral over [0, 1] of sqrt(2 (e - cos 2 pi q)).
double c_of_e(double e);
/// Inverse of c_of_e by bisection; returns exactly 1 for I within 1e-12 of I_+.
double e_of_I(double I);
PendulumCurve curve_of_I(double I);

/// u_I(q) = integral over [0, q] of (sqrt(2 (e - cos 2 pi s)) - I) ds, q reduced to [0, 1).
double oracle_u(double I, double q);
double oracle_du(double I, double q);
/// 2 pi sin(2 pi q) / sqrt(2 (e - cos 2 pi q)); on the separatrix this is 2 pi cos(pi q) for
/// q in (0, 1) and throws SingularPointError at q = 0.
double oracle_d2u(double I, double q);
/// The unsimplified separatrix formula, NaN-free only away from q = 0.
double separatrix_d2u_raw(double q);

struct GapWitness {
    double value = 0.0;  ///< max |u_I'' - u_{I+}''| on the sample grid
    double q = 0.0;      ///< where it is attained
};

/// Dense-grid max of |u_I'' - u_{I+}''| (samples at (k + 1/2) / m avoid the separatrix singularity).
GapWitness oracle_sup_d2_gap(double I, int samples = 200000);

/// Adaptive quadrature of |u_I'' - u_{I+}''| over the circle.
double oracle_d21_gap(double I);

/// Measure of {q : u_I''(q) - u_{I+}''(q) >= eps} by a dense sample.
double oracle_measure_exceed(double I, double eps, int samples = 200000);

/// Samples u_I on {k / n} (d = 1, k = 0..n-1).
std::vector<double> sample_u(double I, int n);

}  // namespace weakkam::pendulum
