// Serial reference against the OpenMP path for the sampling-heavy kernels.
// Results are bit-identical across the two paths; only the wall time differs.
#include "toda/chaos.hpp"
#include "toda/correlator.hpp"
#include "toda/fields.hpp"
#include "toda/rootdata.hpp"
#include "toda/surface.hpp"

#include <benchmark/benchmark.h>

using namespace toda;

namespace {

ExecPolicy policy(const benchmark::State& st) {
    return st.range(0) == 0 ? ExecPolicy{Exec::Serial, 1} : ExecPolicy{Exec::Parallel, 0};
}

const FieldEnsemble& torus_a2() {
    static const FieldEnsemble ens = [] {
        const RootSystem rs = build_root_system({Family::A, 2});
        DiscreteSurface s = torus_surface(16, 16, 1.0 / 16);
        s.euler_char = -2;
        return FieldEnsemble(s, rs, fold(rs, parse_tau(rs, "id")));
    }();
    return ens;
}

void BM_SampleBlocks(benchmark::State& st) {
    const FieldEnsemble& ens = torus_a2();
    for (auto _ : st) {
        for_each_sample_block(ens, FieldKind::Closed, 1, 2048, policy(st), 0,
                              [&](std::int64_t, std::int64_t, const Eigen::MatrixXd& b) { benchmark::DoNotOptimize(b.data()); });
    }
    st.SetItemsProcessed(st.iterations() * 2048);
}

void BM_GmcTotals(benchmark::State& st) {
    const FieldEnsemble& ens = torus_a2();
    ChaosSpec spec;
    spec.direction = 0.8 * ens.root_system().roots.row(0).transpose();
    const ChaosKernel kernel(ens, FieldKind::Closed, spec);
    for (auto _ : st) {
        auto t = gmc_totals(ens, FieldKind::Closed, kernel, 2048, 3, policy(st));
        benchmark::DoNotOptimize(t.data());
    }
    st.SetItemsProcessed(st.iterations() * 2048);
}

void BM_EstimateCorrelator(benchmark::State& st) {
    const RootSystem rs = build_root_system({Family::A, 1});
    DiscreteSurface s = torus_surface(8, 8, 0.125);
    s.euler_char = -2;
    const FieldEnsemble ens(s, rs, fold(rs, parse_tau(rs, "id")));
    CorrelatorSpec spec;
    spec.gamma = 1.0;
    spec.mu_bulk = {1.0};
    spec.insertions.bulk.push_back({0, 0.3 * rs.roots.row(0).transpose()});
    EstimateOptions opt;
    opt.n_samples = 1024;
    opt.seed = 4;
    opt.exec = policy(st);
    for (auto _ : st) {
        const Estimate e = estimate_correlator(spec, ens, opt);
        benchmark::DoNotOptimize(e.value);
    }
    st.SetItemsProcessed(st.iterations() * opt.n_samples);
}

void BM_GreenIterative(benchmark::State& st) {
    const DiscreteSurface s = grid_surface(24, 24);
    GreenOptions opt;
    opt.dense_limit = 0;  // force the blocked conjugate-gradient path
    opt.exec = policy(st);
    for (auto _ : st) {
        const GreenMatrix g = green(s, GreenKind::Neumann, opt);
        benchmark::DoNotOptimize(g.G.data());
    }
}

}  // namespace

BENCHMARK(BM_SampleBlocks)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GmcTotals)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EstimateCorrelator)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GreenIterative)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
