// Serial reference against the OpenMP path for the three sampling kernels.

#include <benchmark/benchmark.h>

#include "heatsing/cutoff.hpp"
#include "heatsing/singular_set.hpp"
#include "heatsing/singular_solution.hpp"

using namespace heatsing;

namespace {

Execution mode(const benchmark::State& s) { return s.range(0) ? Execution::parallel : Execution::serial; }

void label(benchmark::State& s) { s.SetLabel(s.range(0) ? "parallel" : "serial"); }

void BM_TubeIntegral(benchmark::State& state) {
    ManifoldSpec spec;
    spec.dim = 4;
    const SingularManifold circle = make_builtin_manifold(spec);
    TubeOptions o;
    o.samples = 200000;
    for (auto _ : state) benchmark::DoNotOptimize(tube_integral(circle, 0.5, 0.1, TubeKernel::power, o, mode(state)));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(o.samples));
    label(state);
}

void BM_VerifyCutoff(benchmark::State& state) {
    CurveSpec spec;
    spec.kind = CurveKind::weierstrass;
    spec.dim = 3;
    spec.alpha = 0.75;
    spec.coordinates = {0, 1};
    CutoffFamily family(make_builtin_curve(spec));
    const std::vector<double> radii{0.125, 0.0625, 0.03125};
    family.prepare(radii);
    for (auto _ : state) benchmark::DoNotOptimize(verify_cutoff_bounds(family, radii, 20000, 1, mode(state)));
    state.SetItemsProcessed(state.iterations() * 20000 * static_cast<long>(radii.size()));
    label(state);
}

void BM_EvaluateMany(benchmark::State& state) {
    CurveSpec spec;
    spec.kind = CurveKind::circle;
    spec.dim = 3;
    spec.radius = 0.5;
    spec.angular_speed = 2.0;
    const SingularField field(make_builtin_curve(spec));
    std::vector<Vec> xs;
    std::vector<double> ts;
    for (int i = 0; i < 2000; ++i) {
        xs.push_back(Vec{-1.0 + 0.001 * i, 0.3, 0.1});
        ts.push_back(0.2 + 0.0003 * i);
    }
    for (auto _ : state) benchmark::DoNotOptimize(field.evaluate_many(xs, ts, mode(state)));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(xs.size()));
    label(state);
}

}  // namespace

BENCHMARK(BM_TubeIntegral)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VerifyCutoff)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvaluateMany)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
