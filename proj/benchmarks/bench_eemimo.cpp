#include "eemimo/de.hpp"
#include "eemimo/mc.hpp"
#include "eemimo/solver.hpp"
#include "eemimo/surrogate.hpp"
#include "eemimo/synth.hpp"
#include "eemimo/wf.hpp"

#include <benchmark/benchmark.h>

using namespace eemimo;

namespace {

ChannelStats scenario(std::size_t M, std::size_t K) {
    ScenarioSpec sc;
    sc.num_bs_antennas = M;
    sc.num_users = K;
    return normalized(generate(sc));
}

PowerModel paper_power(double pmax_dbm) {
    return {5.0, dbm_to_watts(30.0), dbm_to_watts(40.0), dbm_to_watts(pmax_dbm)};
}

void BM_DeFixedPoints(benchmark::State &state) {
    const auto M = static_cast<std::size_t>(state.range(0));
    const auto s = scenario(M, 4);
    const auto a = PowerAllocation::uniform(4, M, 0.1);
    const SolverConfig cfg;
    for (auto _ : state)
        benchmark::DoNotOptimize(de_fixed_points(s, a, cfg));
}
BENCHMARK(BM_DeFixedPoints)->Arg(16)->Arg(64)->Arg(128);

void BM_SrWaterfill(benchmark::State &state) {
    const auto M = static_cast<std::size_t>(state.range(0));
    const auto s = scenario(M, 4);
    const auto x0 = PowerAllocation::uniform(4, M, 0.1);
    SolverConfig cfg;
    cfg.de_refresh = DeRefresh::mm;
    const auto model = make_surrogate(s, x0, cfg);
    for (auto _ : state)
        benchmark::DoNotOptimize(sr_waterfill(model, 0.1, x0, cfg));
}
BENCHMARK(BM_SrWaterfill)->Arg(16)->Arg(64);

void BM_EeWaterfill(benchmark::State &state) {
    const auto M = static_cast<std::size_t>(state.range(0));
    const auto s = scenario(M, 4);
    const auto x0 = PowerAllocation::uniform(4, M, 0.1);
    SolverConfig cfg;
    cfg.de_refresh = DeRefresh::mm;
    const auto pm = paper_power(30.0);
    for (auto _ : state) {
        auto model = make_surrogate(s, x0, cfg);
        benchmark::DoNotOptimize(ee_waterfill(model, pm, x0, cfg));
    }
}
BENCHMARK(BM_EeWaterfill)->Arg(16)->Arg(64);

void BM_SolveLowComplexity(benchmark::State &state) {
    const auto s = generate(ScenarioSpec{});
    const auto pm = paper_power(static_cast<double>(state.range(0)));
    const SolverConfig cfg;
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_ee_lowcomplexity(s, pm, std::nullopt, cfg));
}
BENCHMARK(BM_SolveLowComplexity)->Arg(0)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_McNetRate(benchmark::State &state) {
    const auto s = scenario(32, 2);
    const auto a = PowerAllocation::uniform(2, 32, 0.1);
    SolverConfig cfg;
    cfg.mc_samples = 1000;
    for (auto _ : state)
        benchmark::DoNotOptimize(mc_net_rate(s, a, 0, cfg));
}
BENCHMARK(BM_McNetRate)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
