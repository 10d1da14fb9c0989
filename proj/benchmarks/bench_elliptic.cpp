#include <benchmark/benchmark.h>

#include "holoembed/elliptic.hpp"
#include "holoembed/surface.hpp"

using namespace holoembed;

namespace {

const Lattice square(cplx(1.0, 0.0), cplx(0.0, 1.0));

const WeierstrassP& wp_for(int n) {
    static const WeierstrassP base(square, 60);
    static const WeierstrassP wp20 = base.with_truncation(20);
    static const WeierstrassP wp120 = base.with_truncation(120);
    if (n == 20) return wp20;
    if (n == 120) return wp120;
    return base;
}

void BM_wp_eval(benchmark::State& state) {
    const WeierstrassP& wp = wp_for(int(state.range(0)));
    const cplx z(0.31, 0.22);
    for (auto _ : state) benchmark::DoNotOptimize(wp.eval(z));
}
BENCHMARK(BM_wp_eval)->Arg(20)->Arg(60)->Arg(120);

void BM_wp_deriv(benchmark::State& state) {
    const WeierstrassP& wp = wp_for(60);
    const cplx z(0.31, 0.22);
    for (auto _ : state) benchmark::DoNotOptimize(wp.deriv(z));
}
BENCHMARK(BM_wp_deriv);

void BM_wp_preimages(benchmark::State& state) {
    const WeierstrassP& wp = wp_for(60);
    const cplx w = wp.eval(cplx(0.27, 0.16));
    for (auto _ : state) benchmark::DoNotOptimize(wp_preimages(wp, w, 1e-9));
}
BENCHMARK(BM_wp_preimages)->Unit(benchmark::kMillisecond);

void BM_grid_sweep(benchmark::State& state) {
    const WeierstrassP& wp = wp_for(60);
    const SampleGrid grid = sample_torus_minus(square, {}, 1.0 / double(state.range(0)), 5e-3);
    for (auto _ : state) {
        cplx acc = 0.0;
        for (cplx z : grid.points) acc += wp.eval(z);
        benchmark::DoNotOptimize(acc);
    }
    state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(grid.points.size()));
}
BENCHMARK(BM_grid_sweep)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
