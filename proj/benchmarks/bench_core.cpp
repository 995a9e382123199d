// Hot paths of the offline and online stages.

#include "lasdi/compressor.hpp"
#include "lasdi/dopri.hpp"
#include "lasdi/ensemble.hpp"
#include "lasdi/fom.hpp"
#include "lasdi/pod.hpp"
#include "lasdi/prediction.hpp"
#include "lasdi/regression.hpp"
#include "lasdi/snapshot.hpp"

#include <benchmark/benchmark.h>

using namespace lasdi;

namespace {

PdeProblem burgers(std::size_t steps) {
    PdeProblem p = PdeProblem::make(ProblemKind::burgers1d);
    p.time.n_steps = steps;
    return p;
}

// Four corner trajectories of the default 1D Burgers problem.
const SnapshotMatrix& corner_snapshots() {
    static const SnapshotMatrix s = [] {
        const PdeProblem p = burgers(1000);
        std::vector<StateTrajectory> t;
        for (double a : {0.7, 0.9}) {
            for (double w : {0.9, 1.1}) t.push_back(solve_fom(p, ParameterPoint{{a, w}}));
        }
        return assemble(t, SnapshotMeta{p.kind, p.grid, p.time.dt});
    }();
    return s;
}

}  // namespace

void BM_Burgers1dFomSteps(benchmark::State& state) {
    const PdeProblem p = burgers(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(solve_fom(p, ParameterPoint{{0.8, 1.0}}));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Burgers1dFomSteps)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Heat2dFom(benchmark::State& state) {
    const PdeProblem p = PdeProblem::make(ProblemKind::heat2d);
    for (auto _ : state) benchmark::DoNotOptimize(solve_fom(p, ParameterPoint{{1.0, 2.0}}));
}
BENCHMARK(BM_Heat2dFom)->Unit(benchmark::kMillisecond);

void BM_Pod(benchmark::State& state) {
    const auto& s = corner_snapshots();
    for (auto _ : state) benchmark::DoNotOptimize(compute_pod(s, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_Pod)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_GlobalFit(benchmark::State& state) {
    const auto& s = corner_snapshots();
    const Compressor c(compute_pod(s, 5));
    const LatentSnapshotMatrix latent = encode_snapshots(c, s);
    LibrarySpec spec;
    spec.latent_dim = 5;
    spec.poly_degree = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(fit_global(latent, spec, s.meta().dt));
}
BENCHMARK(BM_GlobalFit)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);

void BM_DopriLinear(benchmark::State& state) {
    const auto& s = corner_snapshots();
    const Compressor c(compute_pod(s, 5));
    LibrarySpec spec;
    spec.latent_dim = 5;
    const CoefficientMatrix xi = fit_global(encode_snapshots(c, s), spec, s.meta().dt);
    const Eigen::VectorXd z0 = c.encode(s.block(0).col(0));
    for (auto _ : state) benchmark::DoNotOptimize(integrate_dopri(xi, z0, TimeGrid{1e-3, 1000}));
}
BENCHMARK(BM_DopriLinear)->Unit(benchmark::kMicrosecond);

void BM_Burgers1dPredict(benchmark::State& state) {
    const auto& s = corner_snapshots();
    const Compressor c(compute_pod(s, 5));
    LibrarySpec spec;
    spec.latent_dim = 5;
    const DiEnsemble e = DiEnsemble::fit(encode_snapshots(c, s), spec, s.meta().dt, DiStrategy{}, false);
    const PdeProblem p = burgers(1000);
    for (auto _ : state) benchmark::DoNotOptimize(predict(c, e, p, ParameterPoint{{0.8, 1.0}}));
}
BENCHMARK(BM_Burgers1dPredict)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
