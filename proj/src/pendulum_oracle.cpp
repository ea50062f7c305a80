#include "weakkam/pendulum_oracle.hpp"
#include "weakkam/errors.hpp"
#include "weakkam/types.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

namespace weakkam::pendulum {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kQuadTol = 1e-13;

// The relative target can sit below the round-off of the error estimate when the integrand
// changes sign, so the subdivision depth is capped.
template <class F>
double integrate(F f, double a, double b) {
    if (a == b) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 10, kQuadTol);
}

// Fixed 30-point rule for short cells of an analytic integrand.
template <class F>
double integrate_cell(F f, double a, double b) {
    return boost::math::quadrature::gauss<double, 30>::integrate(f, a, b);
}

double speed(double e, double q) {
    // clamp round-off below zero on the separatrix
    return std::sqrt(std::max(0.0, 2.0 * (e - std::cos(kTwoPi * q))));
}

void require_rotational(double I) {
    if (!(I >= kIPlus - 1e-12)) throw DomainError("cohomology below the separatrix value 4/pi");
}

double d2u_separatrix(double q) {
    q = wrap_unit(q);
    if (q == 0.0) throw SingularPointError("separatrix second derivative is undefined at q = 0");
    return kTwoPi * std::cos(std::numbers::pi * q);
}

}  // namespace

double c_of_e(double e) {
    if (!(e >= 1.0)) throw DomainError("energy below the separatrix level 1");
    // even in q about 1/2
    return 2.0 * integrate([e](double q) { return speed(e, q); }, 0.0, 0.5);
}

double e_of_I(double I) {
    require_rotational(I);
    if (I <= kIPlus + 1e-12) return 1.0;
    thread_local double cached_I = -1.0, cached_e = 1.0;
    if (I == cached_I) return cached_e;
    // sqrt(2 (e - 1)) <= c(e), so c(I^2 / 2 + 1) >= I
    double lo = 1.0, hi = 0.5 * I * I + 1.0;
    while (hi - lo > 1e-13 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (c_of_e(mid) < I) lo = mid;
        else hi = mid;
    }
    cached_I = I;
    cached_e = 0.5 * (lo + hi);
    return cached_e;
}

PendulumCurve curve_of_I(double I) { return {e_of_I(I), I}; }

double oracle_u(double I, double q) {
    const double e = e_of_I(I);
    q = wrap_unit(q);
    return integrate([e, I](double s) { return speed(e, s) - I; }, 0.0, q);
}

double oracle_du(double I, double q) {
    const double e = e_of_I(I);
    return speed(e, wrap_unit(q)) - I;
}

double oracle_d2u(double I, double q) {
    const double e = e_of_I(I);
    if (e == 1.0) return d2u_separatrix(q);
    q = wrap_unit(q);
    return kTwoPi * std::sin(kTwoPi * q) / speed(e, q);
}

double separatrix_d2u_raw(double q) {
    return kTwoPi * std::sin(kTwoPi * q) / std::sqrt(2.0 * (1.0 - std::cos(kTwoPi * q)));
}

GapWitness oracle_sup_d2_gap(double I, int samples) {
    if (!(I > kIPlus)) throw DomainError("gap witness needs I > 4/pi");
    if (samples < 1) throw InputError("need at least one sample");
    GapWitness w;
    for (int k = 0; k < samples; ++k) {
        const double q = (k + 0.5) / samples;
        const double gap = std::abs(oracle_d2u(I, q) - d2u_separatrix(q));
        if (gap > w.value) {
            w.value = gap;
            w.q = q;
        }
    }
    return w;
}

double oracle_d21_gap(double I) {
    const double e = e_of_I(I);
    auto f = [e](double q) {
        const double a = e == 1.0 ? kTwoPi * std::cos(std::numbers::pi * q)
                                  : kTwoPi * std::sin(kTwoPi * q) / speed(e, q);
        return std::abs(a - kTwoPi * std::cos(std::numbers::pi * q));
    };
    return integrate(f, 0.0, 0.5) + integrate(f, 0.5, 1.0);
}

double oracle_measure_exceed(double I, double eps, int samples) {
    require_rotational(I);
    if (samples < 1) throw InputError("need at least one sample");
    int hits = 0;
    for (int k = 0; k < samples; ++k) {
        const double q = (k + 0.5) / samples;
        if (oracle_d2u(I, q) - d2u_separatrix(q) >= eps) ++hits;
    }
    return static_cast<double>(hits) / samples;
}

std::vector<double> sample_u(double I, int n) {
    if (n < 1) throw InputError("need at least one sample");
    const double e = e_of_I(I);
    std::vector<double> out(static_cast<std::size_t>(n));
    // accumulate cell integrals so the cost stays linear in n
    double acc = 0.0;
    out[0] = 0.0;
    for (int k = 1; k < n; ++k) {
        acc += integrate_cell([e, I](double s) { return speed(e, s) - I; }, static_cast<double>(k - 1) / n,
                              static_cast<double>(k) / n);
        out[static_cast<std::size_t>(k)] = acc;
    }
    return out;
}

}  // namespace weakkam::pendulum
