#include <benchmark/benchmark.h>

#include "holoembed/basin.hpp"
#include "holoembed/holomap.hpp"
#include "holoembed/rng.hpp"
#include "holoembed/surface.hpp"

using namespace holoembed;

namespace {

void BM_composition_eval(benchmark::State& state) {
    Rng rng(5);
    std::vector<HoloMap> factors;
    for (int i = 0; i < state.range(0); ++i) {
        factors.push_back(HoloMap::twist({rng.disc(0.05)}));
        factors.push_back(halving_map());
        factors.push_back(HoloMap::shear_poly(0, {rng.disc(0.1), rng.disc(0.1)}));
    }
    const HoloMap f = HoloMap::composition(std::move(factors));
    const Vec2c x{cplx(0.4, 0.2), cplx(-0.1, 0.3)};
    for (auto _ : state) benchmark::DoNotOptimize(f.eval(x));
}
BENCHMARK(BM_composition_eval)->Arg(4)->Arg(16)->Arg(64);

void BM_basin_membership(benchmark::State& state) {
    AutoSequence seq;
    Rng rng(7);
    for (int i = 0; i < 64; ++i)
        seq.push_back(HoloMap::composition(
            {HoloMap::twist({rng.disc(1e-3)}), halving_map()}));
    BasinQuery q;
    const Vec2c x{cplx(0.9, 0.1), cplx(0.2, -0.4)};
    for (auto _ : state) benchmark::DoNotOptimize(basin_membership(seq, x, q));
}
BENCHMARK(BM_basin_membership);

void BM_min_pairwise_distance(benchmark::State& state) {
    Rng rng(11);
    std::vector<Vec2c> pts;
    for (int i = 0; i < state.range(0); ++i) pts.push_back(rng.ball2(10.0));
    for (auto _ : state) benchmark::DoNotOptimize(min_pairwise_distance(pts));
    state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(pts.size()));
}
BENCHMARK(BM_min_pairwise_distance)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_model_pusher(benchmark::State& state) {
    PusherRequest req;
    req.k_samples = ball_samples(1.0, 300, 13);
    for (int i = 0; i < 200; ++i) {
        const double t = 20.0 * double(i) / 199.0;
        req.v_samples.push_back({cplx(3.0 + 2.0 * t, 0.0), cplx(1.0 + 0.2 * t, 0.0)});
    }
    req.target_radius = 10.0;
    req.epsilon = 1e-2;
    for (auto _ : state) benchmark::DoNotOptimize(model_pusher(req));
}
BENCHMARK(BM_model_pusher)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
