// Acceptance run: one PASS/FAIL line per criterion, tolerances fixed below.

#include "brute_force.hpp"

#include "weakkam/errors.hpp"
#include "weakkam/experiment.hpp"
#include "weakkam/green.hpp"
#include "weakkam/lo_solver.hpp"
#include "weakkam/pendulum_oracle.hpp"
#include "weakkam/semiconcave.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace weakkam;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

Vec v1(double a) {
    Vec v(1);
    v << a;
    return v;
}

PhasePoint pp1(double q, double p) { return {v1(q), v1(p)}; }

GridFunction oracle_field(double I, int n) {
    GridFunction u(n, 1);
    auto vals = pendulum::sample_u(I, n);
    for (int i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] = vals[static_cast<std::size_t>(i)];
    return u;
}

GridFunction random_field(int n, std::mt19937& rng, double amp) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const double a1 = U(rng), a2 = U(rng), a3 = U(rng);
    GridFunction u = GridFunction::sample(n, 1, [&](const Vec& q) {
        return amp * (a1 * std::cos(2 * M_PI * q[0]) + a2 * std::sin(4 * M_PI * q[0]) + a3 * std::cos(6 * M_PI * q[0]));
    });
    for (auto& x : u.values()) x += 0.2 * amp * U(rng);
    return u;
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return true;
}

std::vector<double> column(const experiment::ExperimentSpec& s, const experiment::RunManifest& m,
                           const std::string& metric) {
    std::size_t k = 0;
    while (k < s.metrics.size() && s.metrics[k] != metric) ++k;
    std::vector<double> out;
    for (const auto& r : m.rows) out.push_back(k < r.metrics.size() ? r.metrics[k] : std::nan(""));
    return out;
}

std::string join(const std::vector<double>& v) {
    std::ostringstream os;
    os.precision(4);
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
    return os.str();
}

// 1: closed-form oracle self-consistency
void criterion1(Outcome& o) {
    const double c1 = pendulum::c_of_e(1.0);
    o.detail << "c(1) - 4/pi = " << c1 - 4.0 / M_PI;
    o.require(std::abs(c1 - 4.0 / M_PI) <= 1e-8, "c(1)");
    double worst = 0.0;
    for (double I : {pendulum::kIPlus + 0.01, 1.5, 2.5}) {
        const double e = pendulum::e_of_I(I);
        for (int k = 0; k < 1000; ++k) {
            const double q = (k + 0.5) / 1000.0;
            const double p = I + pendulum::oracle_du(I, q);
            worst = std::max(worst, std::abs(0.5 * p * p + std::cos(2 * M_PI * q) - e));
        }
    }
    o.detail << ", HJ residual " << worst;
    o.require(worst <= 1e-9, "HJ identity");
}

// 2: Green heights in closed form
void criterion2(Outcome& o) {
    auto free = free_model();
    double worst = 0.0;
    for (double t : {0.5, 1.0, 2.0, 4.0, 8.0})
        worst = std::max(worst, std::abs(height_of_pushed_vertical(free, pp1(0.1, 0.2), t, 0.0)(0, 0) - 1.0 / t));
    o.detail << "free |S - 1/t| " << worst;
    o.require(worst <= 1e-8, "free heights");
    auto pend = pendulum_model();
    auto g0 = green_plus(pend, pp1(0.0, 0.0), 0.0);
    const double e0 = std::abs(g0.height(0, 0) - 2 * M_PI);
    o.detail << ", G+(0,0) error " << e0;
    o.require(g0.converged && e0 <= 1e-4, "G+ at the hyperbolic point");
    const double q = 0.25;
    auto gs = green_plus(pend, pp1(q, 2 * std::sin(M_PI * q)), 0.0);
    const double es = std::abs(gs.height(0, 0) - 2 * M_PI * std::cos(M_PI / 4));
    o.detail << ", separatrix error " << es;
    o.require(gs.converged && es <= 1e-3, "G+ on the separatrix");
}

// 3: ordering of pushed heights on conjugate-free windows
void criterion3(Outcome& o) {
    auto pend = pendulum_model();
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int windows = 0, ordered = 0, compared = 0, compared_ok = 0, conjugate = 0;
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
        // half on rotational levels, half on the separatrix; both carry no conjugate points
        const double q = U(rng);
        const double sign = U(rng) < 0.5 ? -1.0 : 1.0;
        double p;
        if (k % 2 == 0) {
            const double e = 1.05 + 2.0 * U(rng);
            p = sign * std::sqrt(2.0 * (e - std::cos(2 * M_PI * q)));
        } else {
            p = sign * 2.0 * std::sin(M_PI * q);
        }
        // off the separatrix round-off grows like e^{2 pi t}, so its windows stay short
        const double t = k % 2 == 0 ? 1.0 + 7.0 * U(rng) : 0.5 + 2.5 * U(rng);
        const auto x = pp1(q, p);
        if (!detect_conjugate_points(pend, x, 0.0, t).times.empty() ||
            !detect_conjugate_points(pend, x, 0.0, -t).times.empty()) {
            ++conjugate;
            continue;
        }
        ++windows;
        std::vector<double> times;
        for (double f : {1.0 / 16, 1.0 / 8, 1.0 / 4, 1.0 / 2, 3.0 / 4, 1.0}) times.push_back(f * t);
        auto rep = monotonicity_check(pend, x, 0.0, times);
        worst = std::min(worst, rep.worst_violation);
        if (rep.pass) ++ordered;

        GreenOptions go;
        go.t_max = k % 2 == 0 ? 64.0 : 4.0;
        auto gp = green_plus(pend, x, 0.0, go);
        auto gm = green_minus(pend, x, 0.0, go);
        if (gp.converged && gm.converged) {
            ++compared;
            if (gm.height(0, 0) <= gp.height(0, 0) + 1e-6) ++compared_ok;
        }
    }
    auto gp0 = green_plus(pend, pp1(0.0, 0.0), 0.0), gm0 = green_minus(pend, pp1(0.0, 0.0), 0.0);
    if (gp0.converged && gm0.converged) {
        ++compared;
        if (gm0.height(0, 0) <= gp0.height(0, 0) + 1e-6) ++compared_ok;
    }
    o.detail << windows << " windows, " << ordered << " ordered (worst eigenvalue " << worst << "), G- <= G+ at "
             << compared_ok << "/" << compared << " converged pairs";
    o.require(conjugate == 0, "sampled windows carry conjugate points");
    o.require(windows == 50 && ordered == windows, "height order");
    o.require(compared > 0 && compared_ok == compared, "G- <= G+");
}

// 4: weak-KAM solve and critical value against the closed forms
void criterion4(Outcome& o) {
    auto pend = pendulum_model();
    SolverConfig cfg;
    cfg.n = 400;
    cfg.tau = 0.02;
    cfg.c = v1(1.5);
    cfg.vel_bound_override = 6.0;
    cfg.fix_tol = 1e-4;
    const double alpha = estimate_alpha(pend, cfg);
    const double exact = pendulum::e_of_I(1.5);
    o.detail << "alpha error " << alpha - exact;
    o.require(std::abs(alpha - exact) <= 1e-3, "estimate_alpha");
    cfg.alpha = alpha;
    SolveStats st;
    auto u = solve_weak_kam(pend, cfg, GridFunction(400, 1), &st);
    const double err = sup_distance_mod_constants(u, oracle_field(1.5, 400));
    o.detail << ", sup error mod constants " << err << " after " << st.iterations << " steps";
    o.require(err <= 2e-2, "solver vs oracle");
}

void criterion_preset(Outcome& o, const std::string& name, const std::function<void(const experiment::ExperimentSpec&,
                                                                                    const experiment::RunManifest&)>& f) {
    auto spec = experiment::preset(name);
    auto man = experiment::run(spec);
    for (const auto& r : man.rows) o.require(r.status == "ok", "row status " + r.status);
    f(spec, man);
}

// 5: discounted sweep
void criterion5(Outcome& o) {
    criterion_preset(o, "discounted-pendulum", [&](const auto& spec, const auto& man) {
        auto H = column(spec, man, "hausdorff");
        const double mesh = 1.0 / spec.n;
        o.detail << "hausdorff " << join(H) << ", 3h = " << 3 * mesh;
        o.require(strictly_decreasing(H), "strict decrease");
        o.require(!H.empty() && H.back() <= 3 * mesh, "final value");
    });
}

// 6: cohomology sweep, second-derivative gaps
void criterion6(Outcome& o) {
    criterion_preset(o, "cohom-pendulum", [&](const auto& spec, const auto& man) {
        auto d21 = column(spec, man, "d21");
        auto sup = column(spec, man, "sup_d2");
        o.detail << "d21 " << join(d21) << ", sup " << join(sup);
        o.require(strictly_decreasing(d21), "d21 strict decrease");
        o.require(!d21.empty() && d21.back() <= 0.2 * d21.front(), "d21 ratio");
        for (double s : sup) o.require(s >= 0.25 - 1e-6, "sup gap below 1/4");
    });
}

// 7: D^2 u_t below the pushed Green height
void criterion7(Outcome& o) {
    auto pend = pendulum_model();
    SolverConfig cfg;
    cfg.n = 400;
    cfg.tau = 0.02;
    cfg.vel_bound_override = 6.0;
    cfg.cubic = true;
    auto u0 = GridFunction::sample(400, 1, [](const Vec& q) { return 0.1 * std::cos(2 * M_PI * q[0]); });
    auto rep = hessian_green_inequality_check(pend, u0, 2.0, cfg);
    o.detail << "pass fraction " << rep.pass_fraction() << " of " << rep.samples << " samples, tol " << rep.tol
             << " = 5 x " << rep.grid_bound << ", excluded " << rep.excluded;
    o.require(rep.samples > 0 && rep.pass_fraction() >= 0.99, "pass fraction");
    o.require(std::abs(rep.tol - 5.0 * rep.grid_bound) <= 1e-15 * rep.tol, "tolerance");
}

// 8: operator properties
void criterion8(Outcome& o) {
    auto pend = pendulum_model();
    std::mt19937 rng(88);
    // Brent stops within 2^-39 relative of the minimizer; the value error is quadratic in that
    const double slack = 1e-12 + 1e-12;
    double worst_excess = -std::numeric_limits<double>::infinity(), worst_const = 0.0;
    for (double lambda : {0.0, 0.1}) {
        SolverConfig cfg;
        cfg.n = 64;
        cfg.tau = 0.02;
        cfg.lambda = lambda;
        cfg.alpha = 1.0;
        cfg.vel_bound_override = 6.0;
        LaxOleinikOperator T(pend, cfg);
        const double k = T.discount();
        for (int rep = 0; rep < 200; ++rep) {
            auto u = random_field(64, rng, 0.3), v = random_field(64, rng, 0.3);
            auto tu = T.apply(u);
            worst_excess = std::max(worst_excess, sup_distance(tu, T.apply(v)) - k * sup_distance(u, v));
            const double a = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
            auto ta = T.apply(u + a);
            for (std::size_t i = 0; i < tu.size(); ++i) {
                // one rounding of the sum on each side
                const double ulp = std::numeric_limits<double>::epsilon() * (std::abs(tu[i]) + std::abs(a) + 1.0);
                worst_const = std::max(worst_const, std::abs(ta[i] - tu[i] - k * a) / ulp);
            }
        }
    }
    o.detail << "max excess over contraction " << worst_excess << ", constant shift error " << worst_const << " ulp";
    o.require(worst_excess <= slack, "non-expansiveness");
    o.require(worst_const <= 4.0, "constant commutation");

    double worst_brute = 0.0;
    for (double lambda : {0.0, 0.1}) {
        for (double c : {0.0, 0.7}) {
            SolverConfig cfg;
            cfg.n = 32;
            cfg.tau = 0.02;
            cfg.lambda = lambda;
            cfg.c = v1(c);
            cfg.alpha = 0.4;
            cfg.vel_bound_override = 6.0;
            LaxOleinikOperator T(pend, cfg);
            brute::Setup s{32, cfg.tau, lambda, c, 0.4, T.kernel().radius, false};
            for (int rep = 0; rep < 5; ++rep) {
                auto u = random_field(32, rng, 0.2);
                auto got = T.apply(u);
                auto ref = brute::step(s, u.values());
                for (std::size_t i = 0; i < ref.size(); ++i) worst_brute = std::max(worst_brute, std::abs(got[i] - ref[i]));
            }
        }
    }
    o.detail << ", brute-force gap " << worst_brute;
    o.require(worst_brute <= 1e-10, "brute-force equivalence");
}

// 9: exceedance measure on the cohomology sweep
void criterion9(Outcome& o) {
    criterion_preset(o, "cohom-pendulum", [&](const auto& spec, const auto& man) {
        auto m = column(spec, man, "measure_exceed");
        o.detail << "measure " << join(m);
        o.require(strictly_decreasing(m), "decrease");
    });
}

GraphCloud random_cloud(std::mt19937& rng, int m, int dim) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    GraphCloud c;
    c.dim = dim;
    for (int i = 0; i < m; ++i) {
        Vec th(dim), p(dim);
        for (int a = 0; a < dim; ++a) {
            th[a] = U(rng);
            p[a] = 2 * U(rng) - 1;
        }
        c.add(th, p);
    }
    return c;
}

// 10: metric axioms and fiberwise convergence of converging clouds
void criterion10(Outcome& o) {
    std::mt19937 rng(10);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    bool sym = true;
    double tri = -1.0;
    for (int rep = 0; rep < 100; ++rep) {
        const int dim = 1 + rep % 2;
        auto A = random_cloud(rng, 60, dim), B = random_cloud(rng, 45, dim), C = random_cloud(rng, 30, dim);
        const double ab = hausdorff_distance(A, B);
        sym = sym && ab == hausdorff_distance(B, A) && hausdorff_distance(A, A) == 0.0;
        tri = std::max(tri, ab - hausdorff_distance(A, C) - hausdorff_distance(C, B));
    }
    for (int rep = 0; rep < 100; ++rep) {
        auto mk = [&] {
            // kinks of a fixed minimal strength, so every field is unmeasured at the same nodes
            const double a = U(rng), b = U(rng), r = U(rng);
            const double c = (r < 0 ? -1.0 : 1.0) * (0.05 + 0.05 * std::abs(r));
            auto u = GridFunction::sample(128, 1, [&](const Vec& q) {
                return a * std::cos(2 * M_PI * q[0]) + b * std::sin(4 * M_PI * q[0]) + c * std::abs(nearest_image(q[0]));
            });
            return numeric_hessian(u);
        };
        auto u = mk(), v = mk(), w = mk();
        const double uv = d21_distance(u, v).value;
        sym = sym && uv == d21_distance(v, u).value && d21_distance(u, u).value == 0.0;
        tri = std::max(tri, uv - d21_distance(u, w).value - d21_distance(w, v).value);
    }
    o.detail << "symmetry " << (sym ? "exact" : "broken") << ", worst triangle excess " << tri;
    o.require(sym, "symmetry");
    o.require(tri <= 1e-12, "triangle inequality");

    // three families of clouds whose Hausdorff distance to a continuous graph tends to 0
    auto graph = [](double q) { return 0.5 + 0.3 * std::cos(2 * M_PI * q) + 0.1 * std::sin(6 * M_PI * q); };
    const int m = 400;
    auto eta = GridSection::sample(m, 1, [&](const Vec& q) { return v1(graph(q[0])); });
    GraphCloud target;
    for (int i = 0; i < m; ++i) target.add(v1(static_cast<double>(i) / m), v1(graph(static_cast<double>(i) / m)));
    bool converge = true;
    std::ostringstream fib;
    for (int family = 0; family < 3; ++family) {
        std::vector<double> H, F;
        for (double s : {0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625}) {
            GraphCloud K;
            for (int i = 0; i < m; ++i) {
                const double q = static_cast<double>(i) / m;
                double p = graph(q);
                if (family == 0) p += s * U(rng);
                if (family == 1) p += s;
                if (family == 2) p += s * std::sin(10 * M_PI * q);
                K.add(v1(q), v1(p));
                // a second sheet collapsing onto the graph
                if (family == 2) K.add(v1(q), v1(graph(q) - s));
            }
            H.push_back(hausdorff_distance(K, target));
            F.push_back(fiberwise_sup_distance(K, eta));
        }
        fib << (family ? " | " : "") << join(F);
        converge = converge && H.back() < 0.1 * H.front() && F.back() < 0.1 * F.front() && F.back() <= 0.00625 + 1e-12;
    }
    o.detail << ", fiberwise sequences " << fib.str();
    o.require(converge, "fiberwise convergence");
}

}  // namespace

int main() {
    std::setvbuf(stdout, nullptr, _IONBF, 0);
    struct Criterion {
        int id;
        double budget_seconds;
        void (*run)(Outcome&);
    };
    const Criterion criteria[] = {
        {1, 1.0, criterion1},   {2, 10.0, criterion2},  {3, 60.0, criterion3}, {4, 120.0, criterion4},
        {5, 300.0, criterion5}, {6, 30.0, criterion6},  {7, 300.0, criterion7}, {8, 120.0, criterion8},
        {9, 30.0, criterion9},  {10, 30.0, criterion10},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs >= c.budget_seconds) {
            o.pass = false;
            o.detail << " [over the " << c.budget_seconds << " s budget]";
        }
        if (!o.pass) ++failed;
        std::printf("criterion %2d: %s  %.2f s  %s\n", c.id, o.pass ? "PASS" : "FAIL", secs, o.detail.str().c_str());
    }
    std::printf("%d of 10 criteria passed\n", 10 - failed);
    return failed == 0 ? 0 : 1;
}
