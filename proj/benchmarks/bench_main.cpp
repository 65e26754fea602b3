#include <benchmark/benchmark.h>

#include "circlift/anderson.hpp"
#include "circlift/disorder.hpp"
#include "circlift/lift_family.hpp"
#include "circlift/rotation.hpp"

using namespace circlift;

static void BM_ModelMapOrbit(benchmark::State& state) {
    ModelMap model;
    DisorderMeasure mu = DisorderMeasure::uniform_box(1, {0.15});
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        OrbitResult r = iterate_orbit_streamed(model, 0.1, mu, 42, 0, n, 0.0);
        benchmark::DoNotOptimize(r.final_lift);
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_ModelMapOrbit)->Arg(1 << 14)->Arg(1 << 18);

static void BM_AndersonLiftOrbit(benchmark::State& state) {
    AndersonModel model = AndersonModel::uniform(0.0, 1.0);
    AndersonLift lift(model);
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        OrbitResult r = iterate_orbit_streamed(lift, 2.0, model.nu(), 42, 0, n, 0.0);
        benchmark::DoNotOptimize(r.final_lift);
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_AndersonLiftOrbit)->Arg(1 << 14)->Arg(1 << 18);

static void BM_SturmCount(benchmark::State& state) {
    AndersonModel model = AndersonModel::uniform(0.0, 1.0);
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) {
        IdsValue v = ids_sturm(model, 0.5, n, 1, 42, 1);
        benchmark::DoNotOptimize(v.value);
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SturmCount)->Arg(1 << 14)->Arg(1 << 18);

static void BM_SampleWord(benchmark::State& state) {
    DisorderMeasure mu = DisorderMeasure::uniform_box(1, {1.0});
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        Word w = sample_word(mu, 7, n);
        benchmark::DoNotOptimize(w.letter(n - 1)[0]);
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SampleWord)->Arg(1 << 16);

BENCHMARK_MAIN();
