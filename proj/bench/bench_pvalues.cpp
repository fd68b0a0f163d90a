// Randomization p-values: OpenMP kernel (pool distances centered once) versus
// the serial reference (every null statistic recomputed from raw windows).

#include "splitdoor/independence.hpp"
#include "splitdoor/synthgen.hpp"

#include <benchmark/benchmark.h>

#include <map>

namespace {

using namespace splitdoor;

struct Fixture {
    std::vector<PairPeriod> periods;
    WindowPool pool;
};

const Fixture& fixture(std::size_t n_pairs)
{
    static std::map<std::size_t, Fixture> cache;
    auto it = cache.find(n_pairs);
    if (it == cache.end()) {
        GeneratorParams gp;
        gp.n_pairs = n_pairs;
        gp.n_days = 90;
        gp.gamma1 = 2.0;
        gp.confounded_fraction = 0.5;
        Fixture f;
        f.periods = filter_constant_direct(slice_periods(generate_panel(gp).panel, 15)).periods;
        f.pool = WindowPool::from_periods(f.periods);
        it = cache.emplace(n_pairs, std::move(f)).first;
    }
    return it->second;
}

constexpr std::size_t kResamples = 200;

void BM_Kernel(benchmark::State& state)
{
    const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
    const int threads = static_cast<int>(state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(randomization_pvalues(f.periods, f.pool, kResamples, 7, threads));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.periods.size() * kResamples));
}

void BM_Reference(benchmark::State& state)
{
    const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(reference::randomization_pvalues(f.periods, f.pool, kResamples, 7));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.periods.size() * kResamples));
}

void BM_DistanceCorrelation(benchmark::State& state)
{
    const auto& f = fixture(50);
    const auto& p = f.periods.front();
    for (auto _ : state) benchmark::DoNotOptimize(distance_correlation(p.x, p.y_d));
}

}  // namespace

BENCHMARK(BM_Kernel)->Args({100, 1})->Args({100, 0})->Args({500, 1})->Args({500, 0})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Reference)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DistanceCorrelation);

BENCHMARK_MAIN();
