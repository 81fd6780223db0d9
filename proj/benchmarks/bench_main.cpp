#include <benchmark/benchmark.h>

#include "lram/assembly.hpp"
#include "lram/constraints.hpp"
#include "lram/homogenize.hpp"
#include "lram/modal.hpp"
#include "lram/panel_tl.hpp"
#include "lram/rve.hpp"
#include "lram/topopt.hpp"

using namespace lram;

namespace {

// Steel disc in rubber inside an epoxy frame.
RveLayout disc_layout(int n) {
    const auto g = build_grid(n, n, 0.01);
    RveLayout l = make_layout(g, 0.1);
    for (int k = 0; k < g.node_count(); ++k) l.phi(k) = 0.3 - (g.nodes[k] - g.centroid).norm() / g.lx;
    return l;
}

MaterialField disc_field(const RveLayout& l) {
    return material_field(l.grid, gauss_phases(l), scale_phases(PhaseSet{}, {}), true);
}

void BM_Assemble(benchmark::State& state) {
    const auto l = disc_layout(static_cast<int>(state.range(0)));
    const auto f = disc_field(l);
    for (auto _ : state) benchmark::DoNotOptimize(assemble(l.grid, f));
}
BENCHMARK(BM_Assemble)->Arg(20)->Arg(60)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_ModalRestricted(benchmark::State& state) {
    const auto l = disc_layout(static_cast<int>(state.range(0)));
    const auto sys = assemble(l.grid, disc_field(l), {true, false, true});
    ConstraintSpec spec;
    spec.boundary = BoundaryKind::FullyPrescribed;
    const auto ops = build_constraints(l.grid, spec);
    const SpMat K = ops.P.transpose() * sys.K * ops.P;
    const SpMat M = ops.P.transpose() * sys.M * ops.P;
    for (auto _ : state) benchmark::DoNotOptimize(solve_smallest(K, M));
}
BENCHMARK(BM_ModalRestricted)->Arg(20)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_Evaluate(benchmark::State& state) {
    const auto l = disc_layout(static_cast<int>(state.range(0)));
    const RveEvaluator ev(l.grid, PhaseSet{}, OptimizerSettings{});
    for (auto _ : state) benchmark::DoNotOptimize(ev.evaluate(l));
}
BENCHMARK(BM_Evaluate)->Arg(40)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_Homogenize(benchmark::State& state) {
    const auto l = disc_layout(static_cast<int>(state.range(0)));
    const auto f = disc_field(l);
    for (auto _ : state) benchmark::DoNotOptimize(homogenize(l.grid, f));
}
BENCHMARK(BM_Homogenize)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_PanelSolve(benchmark::State& state) {
    const auto l = disc_layout(30);
    PanelModel pm;
    pm.material = homogenize(l.grid, disc_field(l));
    pm.nx = pm.ny = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(solve_rt(pm, hz_to_rad(700.0)));
}
BENCHMARK(BM_PanelSolve)->Arg(4)->Arg(16)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
