#include <benchmark/benchmark.h>

#include "schedleak/attacker.hpp"
#include "schedleak/engine.hpp"

namespace {

using namespace schedleak;

const TickScale kScale{kDefaultTicksPerUnit};

TickTime at(double units) { return TickTime{kScale.duration_from_double(units).ticks()}; }

std::vector<ArrivalTrace> two_poisson_users(double r1, double r2, double horizon) {
    PoissonSource u1{1, r1, TickDuration{}, 11};
    PoissonSource u2{2, r2, TickDuration{}, 12};
    return {generate(u1, at(horizon), kScale), generate(u2, at(horizon), kScale)};
}

void BM_PoissonGenerate(benchmark::State& state) {
    const double horizon = static_cast<double>(state.range(0));
    for (auto _ : state) {
        PoissonSource src{1, 0.65, TickDuration{}, 7};
        benchmark::DoNotOptimize(generate(src, at(horizon), kScale));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(0.65 * horizon));
}
BENCHMARK(BM_PoissonGenerate)->Arg(100000);

void BM_RunFcfs(benchmark::State& state) {
    const double horizon = static_cast<double>(state.range(0));
    const auto traces = two_poisson_users(0.4, 0.4, horizon);
    PolicyConfig cfg{PolicyKind::Fcfs, 2, {}, {}, {}, {}};
    for (auto _ : state) benchmark::DoNotOptimize(run(cfg, traces, at(horizon), 1, kScale));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(0.8 * horizon));
}
BENCHMARK(BM_RunFcfs)->Arg(100000);

void BM_RunAccServe(benchmark::State& state) {
    const double horizon = static_cast<double>(state.range(0));
    const auto traces = two_poisson_users(0.2, 0.45, horizon);
    PolicyConfig cfg{PolicyKind::AccumulateServe, 2, kScale.duration_from_double(5.0), {}, {}, {}};
    for (auto _ : state) benchmark::DoNotOptimize(run(cfg, traces, at(horizon), 1, kScale));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(0.65 * horizon));
}
BENCHMARK(BM_RunAccServe)->Arg(100000);

void BM_RunPtdma(benchmark::State& state) {
    const double horizon = static_cast<double>(state.range(0));
    const auto traces = two_poisson_users(0.2, 0.45, horizon);
    PolicyConfig cfg{PolicyKind::ProportionalTdma, 2, {}, kScale.duration_from_double(20.0), {}, {}};
    for (auto _ : state) benchmark::DoNotOptimize(run(cfg, traces, at(horizon), 1, kScale));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(horizon));
}
BENCHMARK(BM_RunPtdma)->Arg(100000);

void BM_FcfsExactEstimator(benchmark::State& state) {
    const double horizon = static_cast<double>(state.range(0));
    const TickDuration c = kScale.duration_from_double(2.0);
    PoissonSource alice_src{1, 0.2, TickDuration{}, 5};
    const ArrivalTrace alice = generate(alice_src, at(horizon), kScale);
    const ArrivalTrace probes = gen_probes_thm2(c, 0.1, 0.2, at(horizon), kScale, 2);
    PolicyConfig cfg{PolicyKind::Fcfs, 2, {}, {}, {}, {}};
    const SimulationResult sim = run(cfg, {alice, probes}, at(horizon), 1, kScale);
    const ProbeObservation obs = observations_from(sim, 2);
    const std::int64_t periods = at(horizon).ticks() / c.ticks();
    for (auto _ : state)
        benchmark::DoNotOptimize(estimate_fcfs_exact(obs, c, periods, kScale));
    state.SetItemsProcessed(state.iterations() * periods);
}
BENCHMARK(BM_FcfsExactEstimator)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
