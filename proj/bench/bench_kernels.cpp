// Parallel kernels against their serial reference.
//   ./bench_kernels --benchmark_filter=Q
// Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include "shclab/estimators.hpp"
#include "shclab/kernels.hpp"

using namespace shclab;

namespace {

McConfig config(bool serial, long n) {
    McConfig c;
    c.n_paths = n;
    c.n_steps = 64;
    c.seed = 42;
    c.serial_reference = serial;
    return c;
}

void BM_EstimateQ(benchmark::State& state) {
    const bool serial = state.range(0) == 0;
    const auto p = ProcessSpec::stable(2, 1.5);
    const DomainSpec disk = make_ball(2, 1.0);
    const McConfig c = config(serial, 20000);
    for (auto _ : state) benchmark::DoNotOptimize(estimate_Q(p, disk, 1e-3, c).value);
    state.SetItemsProcessed(state.iterations() * c.n_paths * c.starts_per_path);
    state.SetLabel(serial ? "serial" : "parallel x" + std::to_string(thread_count()));
}

void BM_EstimateMu(benchmark::State& state) {
    const bool serial = state.range(0) == 0;
    const auto p = ProcessSpec::fbm(1, 0.75);
    const McConfig c = config(serial, 50000);
    for (auto _ : state) benchmark::DoNotOptimize(estimate_mu(p, 1e-3, c).value);
    state.SetItemsProcessed(state.iterations() * c.n_paths);
    state.SetLabel(serial ? "serial" : "parallel x" + std::to_string(thread_count()));
}

struct Sum {
    double s = 0.0;
    void merge(const Sum& o) { s += o.s; }
};

void BM_ReducePaths(benchmark::State& state) {
    const bool serial = state.range(0) == 0;
    const std::size_t n = 1 << 20;
    for (auto _ : state) {
        const Sum r = reduce_paths<Sum>(
            n, serial, [] { return 0; },
            [](Sum& a, int&, std::size_t i) {
                RngStream rng(7, StreamTag::user, i);
                a.s += rng.normal();
            });
        benchmark::DoNotOptimize(r.s);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}

}  // namespace

BENCHMARK(BM_EstimateQ)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EstimateMu)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReducePaths)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
