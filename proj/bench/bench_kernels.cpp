// Serial reference loops against the OpenMP chunked kernels.

#include <benchmark/benchmark.h>

#include <random>

#include "wke/collision.hpp"
#include "wke/fields.hpp"
#include "wke/isotropic.hpp"
#include "wke/linear_op.hpp"

namespace {

using namespace wke;

struct Setup {
    DispersionSpec spec;
    Grid grid;
    CollisionEngine engine;
    Field n;
    Field g;

    explicit Setup(int n_axis) : grid(n_axis, 1.0), engine(spec, grid, quadrature()) {
        std::mt19937_64 rng(1);
        n = engine.equilibrium();
        g.assign(grid.size(), 0.0);
        for (int i = 0; i < grid.size(); ++i) {
            n[i] *= 1.0 + 0.1 * uniform(rng, -1.0, 1.0);
            g[i] = 0.1 * engine.equilibrium()[i] * uniform(rng, -1.0, 1.0);
        }
    }
    static QuadratureConfig quadrature() {
        QuadratureConfig qc;
        qc.n_k3 = 4;
        qc.n_alpha = 16;
        qc.n_theta = 12;
        return qc;
    }
};

const Setup& setup(int n_axis) {
    static const Setup s4(4), s6(6);
    return n_axis == 4 ? s4 : s6;
}

Exec exec_of(const benchmark::State& state) { return state.range(1) ? Exec::Parallel : Exec::Serial; }

void BM_Collision(benchmark::State& state) {
    const Setup& s = setup(static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(s.engine.collision(s.n, Form::Conservative, DensityGauge::Reciprocal, exec_of(state)));
}

void BM_Linear(benchmark::State& state) {
    const Setup& s = setup(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(s.engine.linear(s.g, Form::Conservative, exec_of(state)));
}

void BM_Rhs(benchmark::State& state) {
    const Setup& s = setup(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(s.engine.rhs(s.g, Form::Conservative, exec_of(state)));
}

void BM_Assembly(benchmark::State& state) {
    const Setup& s = setup(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(assemble_dirichlet(s.engine, exec_of(state)).B.sum());
}

void BM_Isotropic(benchmark::State& state) {
    const RadialGrid g(static_cast<int>(state.range(0)), 1.0);
    RadialField f(g.size());
    for (int i = 0; i < g.size(); ++i) f[i] = (1.0 + 0.05 * std::sin(5.0 * g.node(i))) / (1.0 + g.node(i) * g.node(i));
    for (auto _ : state) benchmark::DoNotOptimize(iso_collision(g, f, Form::Conservative));
}

// range(0): grid points per axis, range(1): 0 serial, 1 parallel
BENCHMARK(BM_Collision)->ArgsProduct({{4, 6}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Linear)->ArgsProduct({{4, 6}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Rhs)->ArgsProduct({{4, 6}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Assembly)->ArgsProduct({{4, 6}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Isotropic)->Arg(12)->Arg(24)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
