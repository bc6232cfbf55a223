#include <benchmark/benchmark.h>

#include "netswap/genio.hpp"
#include "netswap/mechanisms.hpp"
#include "netswap/verify.hpp"

namespace {

using netswap::MechanismKind;

template <MechanismKind Kind>
void BM_Random(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto instance = netswap::gen_random(n, 0.3, 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(netswap::run_mechanism(Kind, instance));
    }
    state.SetComplexityN(n);
}

template <MechanismKind Kind>
void BM_Complete(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto instance = netswap::gen_complete(n, 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(netswap::run_mechanism(Kind, instance));
    }
    state.SetComplexityN(n);
}

void BM_CheckIc(benchmark::State& state) {
    const auto instance = netswap::paper_fixture("fig2").instance;
    const auto mechanism = netswap::make_mechanism(MechanismKind::SWN);
    for (auto _ : state) {
        benchmark::DoNotOptimize(netswap::check_ic(mechanism, instance));
    }
}

} // namespace

BENCHMARK(BM_Random<MechanismKind::TTC>)->RangeMultiplier(2)->Range(8, 256)->Complexity();
BENCHMARK(BM_Random<MechanismKind::SWN>)->RangeMultiplier(2)->Range(8, 256)->Complexity();
BENCHMARK(BM_Random<MechanismKind::LS>)->RangeMultiplier(2)->Range(8, 256)->Complexity();
BENCHMARK(BM_Random<MechanismKind::CTC>)->DenseRange(4, 10, 2);
BENCHMARK(BM_Complete<MechanismKind::CTC>)->DenseRange(4, 10, 2);
BENCHMARK(BM_CheckIc);
BENCHMARK_MAIN();
