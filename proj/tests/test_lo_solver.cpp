#include "doctest.h"

#include "brute_force.hpp"

#include "weakkam/errors.hpp"
#include "weakkam/lo_solver.hpp"
#include "weakkam/pendulum_oracle.hpp"
#include "weakkam/semiconcave.hpp"

#include <cmath>
#include <random>

using namespace weakkam;

namespace {

Vec v1(double a) {
    Vec v(1);
    v << a;
    return v;
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

GridFunction cosine(int n, double amp) {
    return GridFunction::sample(n, 1, [&](const Vec& q) { return amp * std::cos(2 * M_PI * q[0]); });
}

SolverConfig pendulum_config(int n, double lambda = 0.0) {
    SolverConfig cfg;
    cfg.n = n;
    cfg.tau = 0.02;
    cfg.lambda = lambda;
    cfg.vel_bound_override = 6.0;
    return cfg;
}

}  // namespace

TEST_CASE("one-step action examples") {
    auto free = free_model();
    ActionKernel k;
    k.tau = 0.1;
    k.radius = 10.0;
    CHECK(one_step_action(free, k, v1(0.3), v1(0.3), 0.0, Vec(), 0.0) == 0.0);
    CHECK(one_step_action(free, k, v1(0.0), v1(0.2), 0.0, Vec(), 0.0) == doctest::Approx(0.2).epsilon(1e-14));
    // nearest image: 0.9 -> 0.1 is a displacement of +0.2
    CHECK(one_step_action(free, k, v1(0.9), v1(0.1), 0.0, Vec(), 0.0) == doctest::Approx(0.2).epsilon(1e-12));
    k.radius = 1.0;
    CHECK(std::isinf(one_step_action(free, k, v1(0.0), v1(0.2), 0.0, Vec(), 0.0)));

    brute::Setup s;
    s.tau = 0.05;
    s.lambda = 0.3;
    s.c = 0.7;
    s.alpha = 1.1;
    auto pend = pendulum_model();
    for (double d : {-0.2, -0.03, 0.0, 0.11}) {
        const double a = segment_action(pend, v1(0.37), v1(d), s.tau, s.lambda, v1(s.c), s.alpha, 3);
        CHECK(a == doctest::Approx(brute::action(s, 0.37, d)).epsilon(1e-13));
    }
}

TEST_CASE("lo_step examples") {
    auto free = free_model();
    SolverConfig cfg;
    cfg.n = 64;
    auto z = lo_step(free, GridFunction(64, 1), cfg);
    CHECK(z.sup_norm() < 1e-15);

    auto pend = pendulum_model();
    auto pc = pendulum_config(64);
    pc.alpha = 1.0;
    auto t0 = lo_step(pend, GridFunction(64, 1), pc);
    CHECK(std::abs(t0[0]) < 1e-15);
    for (std::size_t i = 0; i < t0.size(); ++i) CHECK(t0[i] >= -1e-15);

    std::mt19937 rng(11);
    for (int rep = 0; rep < 10; ++rep) {
        auto u = random_field(64, rng, 0.3);
        auto w = u;
        for (auto& x : w.values()) x += std::uniform_real_distribution<double>(0.0, 0.1)(rng);
        auto tu = lo_step(pend, u, pc), tw = lo_step(pend, w, pc);
        for (std::size_t i = 0; i < tu.size(); ++i) CHECK(tu[i] <= tw[i] + 1e-12);
    }
}

TEST_CASE("operator agrees with the brute-force reference") {
    auto pend = pendulum_model();
    std::mt19937 rng(3);
    for (double lambda : {0.0, 0.1}) {
        for (double c : {0.0, 0.7}) {
            for (bool cubic : {false, true}) {
                auto cfg = pendulum_config(32, lambda);
                cfg.c = v1(c);
                cfg.alpha = 0.4;
                cfg.cubic = cubic;
                LaxOleinikOperator T(pend, cfg);
                brute::Setup s{32, cfg.tau, lambda, c, 0.4, T.kernel().radius, cubic};
                for (int rep = 0; rep < 3; ++rep) {
                    auto u = random_field(32, rng, 0.2);
                    auto got = T.apply(u);
                    auto ref = brute::step(s, u.values());
                    double err = 0.0;
                    for (std::size_t i = 0; i < ref.size(); ++i) err = std::max(err, std::abs(got[i] - ref[i]));
                    CAPTURE(lambda);
                    CAPTURE(c);
                    CAPTURE(cubic);
                    CHECK(err < 1e-10);
                }
            }
        }
    }
}

TEST_CASE("operator agrees with the reference under the a-priori speed bound") {
    auto pend = pendulum_model();
    SolverConfig cfg;
    cfg.n = 32;
    cfg.tau = 0.05;
    LaxOleinikOperator T(pend, cfg);
    brute::Setup s{32, cfg.tau, 0.0, 0.0, 0.0, T.kernel().radius, false};
    std::mt19937 rng(8);
    auto u = random_field(32, rng, 0.2);
    auto got = T.apply(u);
    auto ref = brute::step(s, u.values());
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(got[i] - ref[i]) < 1e-10);
}

TEST_CASE("non-expansiveness, contraction and constants") {
    auto pend = pendulum_model();
    std::mt19937 rng(17);
    for (double lambda : {0.0, 0.1}) {
        auto cfg = pendulum_config(64, lambda);
        LaxOleinikOperator T(pend, cfg);
        const double k = std::exp(-lambda * cfg.tau);
        CHECK(T.discount() == doctest::Approx(k));
        for (int rep = 0; rep < 20; ++rep) {
            auto u = random_field(64, rng, 0.3), v = random_field(64, rng, 0.3);
            CHECK(sup_distance(T.apply(u), T.apply(v)) <= k * sup_distance(u, v) + 1e-10);
            const double a = 0.37;
            auto shifted = T.apply(u + a);
            auto base = T.apply(u);
            for (std::size_t i = 0; i < base.size(); ++i) CHECK(std::abs(shifted[i] - base[i] - k * a) < 1e-14);
        }
    }
}

TEST_CASE("parallel and serial kernels are bit-identical") {
    auto pend = pendulum_model();
    std::mt19937 rng(23);
    for (bool cubic : {false, true}) {
        auto cfg = pendulum_config(128, 0.1);
        cfg.cubic = cubic;
        LaxOleinikOperator T(pend, cfg);
        auto u = random_field(128, rng, 0.3);
        CHECK(T.apply(u).values() == T.apply_serial(u).values());
    }
    auto m2 = model_from_spec("mechanical:1x0=1:0,0x1=0.5:0");
    SolverConfig c2;
    c2.n = 16;
    c2.tau = 0.05;
    c2.vel_bound_override = 4.0;
    LaxOleinikOperator T2(m2, c2);
    auto u2 = GridFunction::sample(16, 2, [](const Vec& q) { return 0.1 * std::cos(2 * M_PI * q[0]) * std::sin(2 * M_PI * q[1]); });
    CHECK(T2.apply(u2).values() == T2.apply_serial(u2).values());
}

TEST_CASE("symmetric step") {
    auto free = free_model();
    SolverConfig cfg;
    cfg.n = 64;
    std::mt19937 rng(2);
    auto u = random_field(64, rng, 0.2);
    auto s = symmetric_lo_step(free, u, cfg);
    auto r = -lo_step(free, -u, cfg);
    CHECK(sup_distance(s, r) < 1e-15);

    auto pend = pendulum_model();
    auto pc = pendulum_config(64);
    pc.alpha = 1.0;
    CHECK(std::abs(symmetric_lo_step(pend, GridFunction(64, 1), pc)[0]) < 1e-15);

    auto smooth = cosine(128, 0.1);
    double prev = 1.0;
    for (double tau : {0.02, 0.005, 0.00125}) {
        auto c2 = pendulum_config(128);
        c2.tau = tau;
        c2.alpha = 1.0;
        const double d = sup_distance(symmetric_lo_step(pend, lo_step(pend, smooth, c2), c2), smooth);
        CHECK(d < prev);
        prev = d;
    }
    CHECK(prev < 1e-2);
}

TEST_CASE("critical value estimates") {
    SolverConfig cfg;
    cfg.n = 64;
    CHECK(std::abs(estimate_alpha(free_model(), cfg)) < 1e-8);
    auto pc = pendulum_config(128);
    CHECK(std::abs(estimate_alpha(pendulum_model(), pc) - 1.0) < 1e-3);
    auto free = free_model();
    SolverConfig fc;
    fc.n = 64;
    fc.c = v1(0.3);
    CHECK(std::abs(estimate_alpha(free, fc) - 0.045) < 1e-8);
    fc.max_iters = 3;
    CHECK_THROWS_AS(estimate_alpha(pendulum_model(), [] {
        auto c = pendulum_config(64);
        c.max_iters = 3;
        return c;
    }()), EstimationError);
}

TEST_CASE("discounted solve") {
    SolverConfig cfg;
    cfg.n = 64;
    cfg.lambda = 0.5;
    auto z = solve_discounted(free_model(), cfg);
    CHECK(z.sup_norm() < 1e-14);

    auto pend = pendulum_model();
    auto pc = pendulum_config(200, 0.1);
    pc.alpha = 1.0;
    pc.fix_tol = 1e-9;
    SolveStats st;
    auto u = solve_discounted(pend, pc, nullptr, &st);
    CHECK(st.last_change <= pc.fix_tol);
    CHECK(sup_distance(lo_step(pend, u, pc), u) <= 2 * pc.fix_tol);
    auto res = hj_residual(pend, u, 0.1, Vec(), 1.0);
    CHECK(res.evaluated > 150);
    CHECK(res.sup < 0.1);

    auto bad = pc;
    bad.lambda = 0.0;
    CHECK_THROWS_AS(solve_discounted(pend, bad), ConfigError);
}

TEST_CASE("weak-KAM solve") {
    auto free = free_model();
    SolverConfig cfg;
    cfg.n = 64;
    cfg.c = v1(0.3);
    cfg.alpha = 0.045;
    SolveStats st;
    auto u = solve_weak_kam(free, cfg, GridFunction(64, 1), &st);
    CHECK(u.sup_norm() < 1e-12);
    cfg.alpha = 0.3;
    CHECK_THROWS_AS(solve_weak_kam(free, cfg, cosine(64, 0.1)), AlphaMismatchError);

    auto pend = pendulum_model();
    auto pc = pendulum_config(200);
    pc.c = v1(1.5);
    pc.alpha = pendulum::e_of_I(1.5);
    pc.fix_tol = 1e-5;
    SolveStats ps;
    auto w = solve_weak_kam(pend, pc, GridFunction(200, 1), &ps);
    GridFunction ref(200, 1);
    auto vals = pendulum::sample_u(1.5, 200);
    for (int i = 0; i < 200; ++i) ref[static_cast<std::size_t>(i)] = vals[static_cast<std::size_t>(i)];
    CHECK(sup_distance_mod_constants(w, ref) < 2e-2);
    CHECK(std::abs(w.mean()) < 1e-12);
    CHECK(std::abs(ps.drift_rate) < pc.alpha_drift_tol);
}

TEST_CASE("backward characteristics") {
    auto pend = pendulum_model();
    auto u0 = cosine(400, 0.1);
    auto path0 = backward_characteristic(pend, u0, v1(0.3), 0.0, 0.0, Vec());
    REQUIRE(path0.points.size() == 1);
    CHECK(path0.points[0].q[0] == doctest::Approx(0.3));

    GridFunction tent = GridFunction::sample(64, 1, [](const Vec& q) { return std::abs(nearest_image(q[0])); });
    CHECK_THROWS_AS(backward_characteristic(pend, tent, v1(0.0), 0.5, 0.0, Vec()), NonDifferentiablePointError);

    // the characteristic of T_t u0 lands on the graph of du0
    auto cfg = pendulum_config(400);
    cfg.alpha = 1.0;
    LaxOleinikOperator T(pend, cfg);
    auto ut = u0;
    for (int k = 0; k < 10; ++k) ut = T.apply(ut);
    for (double q : {0.1, 0.35, 0.6, 0.85}) {
        auto path = backward_characteristic(pend, ut, v1(q), 0.2, 0.0, Vec());
        const auto& end = path.points.back();
        const double y = end.q[0];
        const double du0 = -0.2 * M_PI * std::sin(2 * M_PI * y);
        CAPTURE(q);
        CHECK(std::abs(end.p[0] - du0) < 2e-2);
        CHECK(path.times.back() == doctest::Approx(-0.2));
    }
}

TEST_CASE("HJ residual") {
    auto free = free_model();
    auto r0 = hj_residual(free, GridFunction(64, 1), 0.0, v1(0.3), 0.045);
    CHECK(r0.sup < 1e-15);
    auto pend = pendulum_model();
    for (int n : {100, 400}) {
        GridFunction u(n, 1);
        auto vals = pendulum::sample_u(1.5, n);
        for (int i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] = vals[static_cast<std::size_t>(i)];
        const double e = pendulum::e_of_I(1.5);
        auto r = hj_residual(pend, u, 0.0, v1(1.5), e);
        CHECK(r.sup < 20.0 / (n * n));
        auto wrong = hj_residual(pend, u, 0.0, v1(1.5), e - 0.1);
        CHECK(wrong.sup == doctest::Approx(0.1).epsilon(0.05));
    }
}

TEST_CASE("semigroup property at the grid level") {
    auto pend = pendulum_model();
    auto u0 = cosine(200, 0.1);
    auto one = pendulum_config(200);
    one.alpha = 1.0;
    auto two = one;
    two.tau = 0.04;
    const double gap = sup_distance(lo_step(pend, lo_step(pend, u0, one), one), lo_step(pend, u0, two));
    MESSAGE("T_tau T_tau - T_2tau sup gap: " << gap);
    CHECK(gap < 1e-4);
}

TEST_CASE("iterates become semiconcave") {
    auto free = free_model();
    SolverConfig cfg;
    cfg.n = 128;
    cfg.vel_bound_override = 20.0;
    // linear interpolation lifts the neighbours of a resting node by O(h^2 / tau) per step
    cfg.cubic = true;
    auto u = cosine(128, 0.5);
    CHECK(semiconcavity_constant(u).K > 9.0);
    LaxOleinikOperator T(free, cfg);
    for (int k = 0; k < 25; ++k) u = T.apply(u);
    // D^2 T_t u <= 1/t for the free Lagrangian, t = 0.5
    const double K = semiconcavity_constant(u).K;
    CHECK(K <= 0.5 / 0.5);
    // dense Hopf-Lax minimization of 0.5 cos(2 pi y) + (q - y)^2 on the same grid
    CHECK(std::abs(K - 0.908003) < 1e-3);
}

TEST_CASE("Hessian-Green inequality") {
    auto free = free_model();
    SolverConfig cfg;
    cfg.n = 64;
    auto rep = hessian_green_inequality_check(free, GridFunction(64, 1), 1.0, cfg);
    CHECK(rep.samples > 0);
    CHECK(rep.violating.empty());

    auto pend = pendulum_model();
    auto pc = pendulum_config(200);
    pc.cubic = true;
    InequalityOptions neg;
    neg.height_scale = 0.5;
    auto bad = hessian_green_inequality_check(pend, cosine(200, 0.1), 2.0, pc, neg);
    CHECK(bad.pass_fraction() < 0.5);
    CHECK_THROWS_AS(hessian_green_inequality_check(pend, cosine(200, 0.1), 0.01, pc), InputError);
}

TEST_CASE("configuration errors name the field") {
    auto pend = pendulum_model();
    auto expect_field = [&](SolverConfig c, int dim, const char* field) {
        try {
            c.validate(dim);
            FAIL("expected a ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.field() == field);
        }
    };
    SolverConfig c;
    c.n = 8;
    expect_field(c, 1, "n");
    c = SolverConfig{};
    c.tau = 0.0;
    expect_field(c, 1, "tau");
    c = SolverConfig{};
    c.cubic = true;
    expect_field(c, 2, "cubic");
    c = SolverConfig{};
    c.alpha_tol = 0.0;
    expect_field(c, 1, "alpha_tol");
    c = SolverConfig{};
    c.c = v1(1.0);
    expect_field(c, 2, "c");
    c = SolverConfig{};
    c.quad_order = 7;
    expect_field(c, 1, "quad_order");
}
