#include <benchmark/benchmark.h>

#include "specaug/augment.hpp"
#include "specaug/graph.hpp"
#include "specaug/spectral.hpp"

using namespace specaug;

namespace {

Graph fixture(int n) { return generate_sbm(n, 2, 0.2, 0.05, 42); }

void bm_eig_full(benchmark::State& state) {
    Graph g = fixture(static_cast<int>(state.range(0)));
    Matrix l = normalized_laplacian(g);
    for (auto _ : state) benchmark::DoNotOptimize(eig_full(l));
}
BENCHMARK(bm_eig_full)->Arg(50)->Arg(100)->Arg(200);

void bm_eig_selective(benchmark::State& state) {
    Graph g = fixture(static_cast<int>(state.range(0)));
    Matrix l = normalized_laplacian(g);
    SpectralSelection sel{5};
    for (auto _ : state) benchmark::DoNotOptimize(eig_selective(l, sel));
}
BENCHMARK(bm_eig_selective)->Arg(50)->Arg(100)->Arg(200);

void bm_projection(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Matrix raw = Matrix::Random(n, n).cwiseAbs();
    raw = 0.5 * (raw + raw.transpose());
    raw.diagonal().setZero();
    double eps = 0.05 * n * (n - 1);
    for (auto _ : state)
        benchmark::DoNotOptimize(project_to_budget(raw, eps));
}
BENCHMARK(bm_projection)->Arg(50)->Arg(100)->Arg(200);

void bm_pgd_step(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Graph g = fixture(n);
    ComplementDirection c = complement_direction(g);
    double eps = 0.05 * 2.0 * g.edge_count();
    ProbabilityMatrix delta = project_to_budget(
        Matrix::Constant(n, n, 0.01), eps);
    delta.delta.diagonal().setZero();
    NoiseSpec noise{1e-6, 1};
    for (auto _ : state) {
        GradResult gr = spectrum_norm_grad(g, c, delta.delta, {}, noise);
        Matrix unit = gr.grad / std::max(gr.grad.norm(), 1e-12);
        benchmark::DoNotOptimize(pgd_step(delta, unit, 1.0, true, eps));
    }
}
BENCHMARK(bm_pgd_step)->Arg(50)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
