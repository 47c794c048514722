#include <benchmark/benchmark.h>

#include "mcoupler/capnet.hpp"
#include "mcoupler/circuit.hpp"
#include "mcoupler/fit.hpp"
#include "mcoupler/gate_metrics.hpp"

using namespace mcoupler;

namespace {

CouplerModel four_bump() {
    CouplerModel m;
    m.q1 = TransmonParams::from_frequency(4.29e9, 200e6, "q1");
    m.q2 = TransmonParams::from_frequency(4.39e9, 200e6, "q2");
    m.coupler = {15.1e9, 3.0, 116e6, PadConfig::Symmetric};
    m.couplings = {-5.2e6, 94e6, 94e6};
    return m;
}

void BM_NetCoupling(benchmark::State& state) {
    const CouplerModel m = four_bump();
    double phi = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(net_coupling(m, {phi}));
        phi += 1e-4;
    }
}
BENCHMARK(BM_NetCoupling);

void BM_FindZero(benchmark::State& state) {
    const CouplerModel m = four_bump();
    for (auto _ : state) benchmark::DoNotOptimize(find_zero_coupling(m, 0.0, 0.5).phi);
}
BENCHMARK(BM_FindZero);

void BM_ResidualZz(benchmark::State& state) {
    const CouplerModel m = four_bump();
    const int levels = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(residual_zz(m, {0.2}, levels));
}
BENCHMARK(BM_ResidualZz)->Arg(3)->Arg(4)->Arg(6);

void BM_FitGCurve(benchmark::State& state) {
    const CouplerModel m = four_bump();
    const fit::GCurve c = fit::simulate_gcurve(m, fit::linspace(0.0, 0.5, 25), 5e4, 42);
    fit::GFitOptions o;
    o.r_convention = fit::AsymmetryConvention::AtLeastOne;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit::fit_gcurve(c, 116e6, {4.29e9, 4.39e9}, o).cost);
    }
}
BENCHMARK(BM_FitGCurve)->Unit(benchmark::kMillisecond);

void BM_FitRb(benchmark::State& state) {
    metrics::RbSynthesis s;
    s.p = 0.96;
    s.lengths = {1, 2, 4, 8, 16, 24, 32, 48, 64, 96, 128, 192};
    const metrics::RbRun run = metrics::simulate_rb(s, 42);
    for (auto _ : state) benchmark::DoNotOptimize(metrics::fit_rb(run).p);
}
BENCHMARK(BM_FitRb);

}  // namespace

BENCHMARK_MAIN();
