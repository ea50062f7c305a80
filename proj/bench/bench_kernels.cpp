#include "weakkam/lo_solver.hpp"
#include "weakkam/semiconcave.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace weakkam;

namespace {

SolverConfig pendulum_config(int n) {
    SolverConfig cfg;
    cfg.n = n;
    cfg.tau = 0.02;
    cfg.alpha = 1.0;
    cfg.vel_bound_override = 6.0;
    return cfg;
}

GridFunction field(int n) {
    return GridFunction::sample(n, 1, [](const Vec& q) { return 0.1 * std::cos(2 * M_PI * q[0]); });
}

GraphCloud cloud(int m, double shift) {
    GraphCloud c;
    for (int i = 0; i < m; ++i) {
        Vec th(1), p(1);
        th << static_cast<double>(i) / m;
        p << std::sin(2 * M_PI * th[0]) + shift;
        c.add(th, p);
    }
    return c;
}

void BM_apply(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    LaxOleinikOperator T(pendulum_model(), pendulum_config(n));
    auto u = field(n);
    for (auto _ : state) benchmark::DoNotOptimize(T.apply(u));
}

void BM_apply_serial(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    LaxOleinikOperator T(pendulum_model(), pendulum_config(n));
    auto u = field(n);
    for (auto _ : state) benchmark::DoNotOptimize(T.apply_serial(u));
}

void BM_hausdorff(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    auto a = cloud(m, 0.0), b = cloud(m + 7, 0.01);
    for (auto _ : state) benchmark::DoNotOptimize(hausdorff_distance(a, b));
}

void BM_hausdorff_serial(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    auto a = cloud(m, 0.0), b = cloud(m + 7, 0.01);
    for (auto _ : state) benchmark::DoNotOptimize(hausdorff_distance_serial(a, b));
}

}  // namespace

BENCHMARK(BM_apply)->Arg(128)->Arg(400)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_apply_serial)->Arg(128)->Arg(400)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_hausdorff)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_hausdorff_serial)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
