#pragma once

// Dormand-Prince 5(4) with error-per-unit-time step control, shared by the flow
// and tangent integrators.

#include "weakkam/errors.hpp"
#include "weakkam/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace weakkam::detail {

using State = Eigen::VectorXd;

struct OdeOptions {
    double dt_max = 0.05;
    double tol = 1e-10;
    double dt_min = 1e-13;
    int torus_components = 0;  ///< leading components reduced mod 1 after each step
};

/// Integrate y' = f(y) from time 0 to t_end (either sign). `rhs(y, dy)` writes the field.
/// `observer(t, y)` runs after every accepted step; returning false stops early.
/// Returns the time actually reached.
template <class Rhs, class Observer>
double integrate_dopri(Rhs&& rhs, State& y, double t_end, const OdeOptions& opt, Observer&& observer) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    (void)c2; (void)c3; (void)c4; (void)c5;

    if (t_end == 0.0) return 0.0;
    const double dir = t_end > 0 ? 1.0 : -1.0;
    const double span = std::abs(t_end);
    const Eigen::Index n = y.size();

    State k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n), err(n);
    rhs(y, k1);
    double t = 0.0;
    double h = std::min(opt.dt_max, span);

    while (t < span) {
        bool last = false;
        if (t + h >= span) {
            h = span - t;
            last = true;
        }
        const double hs = dir * h;
        tmp = y + hs * a21 * k1;
        rhs(tmp, k2);
        tmp = y + hs * (a31 * k1 + a32 * k2);
        rhs(tmp, k3);
        tmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(tmp, k4);
        tmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(tmp, k5);
        tmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(tmp, k6);
        ynew = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(ynew, k7);
        err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double en = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double sc = 1.0 + std::max(std::abs(y[i]), std::abs(ynew[i]));
            en = std::max(en, std::abs(err[i]) / sc);
        }
        if (!std::isfinite(en)) {
            throw IntegrationError(dir * t, "non-finite state in flow integration");
        }
        const double budget = opt.tol * h;
        if (en <= budget) {
            t = last ? span : t + h;
            y = ynew;
            for (int i = 0; i < opt.torus_components; ++i) y[i] = wrap_unit(y[i]);
            k1 = k7;
            if (!observer(dir * t, static_cast<const State&>(y))) return dir * t;
            if (last) break;
        }
        double fac = en > 0 ? 0.9 * std::pow(budget / en, 0.25) : 5.0;
        fac = std::clamp(fac, 0.2, 5.0);
        h = std::min(h * fac, opt.dt_max);
        if (h < opt.dt_min) {
            throw IntegrationError(dir * t, "step-size underflow");
        }
    }
    return dir * span;
}

template <class Rhs>
double integrate_dopri(Rhs&& rhs, State& y, double t_end, const OdeOptions& opt) {
    return integrate_dopri(std::forward<Rhs>(rhs), y, t_end, opt, [](double, const State&) { return true; });
}

}  // namespace weakkam::detail
