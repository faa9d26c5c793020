#include <benchmark/benchmark.h>

#include <random>

#include "topo/cubical.hpp"
#include "topo/persistence_image.hpp"
#include "topo/topoimage.hpp"

namespace {

topo::ScalarGrid random_grid(int rows, int cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    topo::ScalarGrid g(rows, cols);
    for (double& v : g.values) {
        v = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    }
    return g;
}

void BM_ComputeDiagram(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const topo::ScalarGrid g = random_grid(side, side, 21);
    for (auto _ : state) {
        benchmark::DoNotOptimize(topo::compute_diagram(g));
    }
}
BENCHMARK(BM_ComputeDiagram)->Arg(28)->Arg(112);

void BM_OracleDiagram(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const topo::CubicalComplex cx(random_grid(side, side, 22));
    for (auto _ : state) {
        benchmark::DoNotOptimize(topo::oracle_diagram(cx));
    }
}
BENCHMARK(BM_OracleDiagram)->Arg(6)->Arg(16);

void BM_Vectorize(benchmark::State& state) {
    const topo::PersistenceDiagram d =
        topo::compute_diagram(random_grid(28, 28, 23));
    const topo::PIConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(topo::vectorize(d, cfg));
    }
}
BENCHMARK(BM_Vectorize);

void BM_BuildTopoImage(benchmark::State& state) {
    const topo::ScalarGrid g = random_grid(224, 224, 24);
    topo::TopoConfig cfg;
    cfg.patch_size = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(topo::build_topoimage(g, cfg));
    }
}
BENCHMARK(BM_BuildTopoImage)->Arg(28)->Arg(112)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
