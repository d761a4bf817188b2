#include "patchlens/analytic.hpp"
#include "patchlens/data_io.hpp"
#include "patchlens/jacobi.hpp"
#include "patchlens/linear_dynamics.hpp"
#include "patchlens/patch_engine.hpp"
#include "patchlens/profile.hpp"
#include "patchlens/rng.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace patchlens;

Matrix normal_matrix(Index rows, Index cols, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

void BM_JacobiEigen(benchmark::State& state) {
    const auto d = static_cast<Index>(state.range(0));
    const Matrix a = normal_matrix(2 * d, d, 1);
    const Matrix s = a.transpose() * a;
    for (auto _ : state) benchmark::DoNotOptimize(jacobi_eigen(s).values);
}
BENCHMARK(BM_JacobiEigen)->Arg(27)->Arg(75)->Arg(147);

void BM_GdRun(benchmark::State& state) {
    const Matrix K = normal_matrix(1000, 27, 2);
    const Vector y = normal_matrix(1000, 1, 3).col(0);
    const double eta = 1.0 / jacobi_eigen(K.transpose() * K).values(0);
    const int steps = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(gd_run(K, y, eta, steps, Vector::Zero(27)).final().average_filter);
}
BENCHMARK(BM_GdRun)->Arg(100)->Arg(1000);

void BM_ClosedFormExact(benchmark::State& state) {
    const Matrix K = normal_matrix(1000, 27, 2);
    const Vector y = normal_matrix(1000, 1, 3).col(0);
    const double eta = 1.0 / jacobi_eigen(K.transpose() * K).values(0);
    for (auto _ : state) benchmark::DoNotOptimize(closed_form_exact(K, y, eta, 1000).w_tilde);
}
BENCHMARK(BM_ClosedFormExact);

void BM_MultiFilterRun(benchmark::State& state) {
    SharedMeanOptions opt;
    opt.n_per_class = 500;
    const auto ds = gen_shared_mean_dataset(opt);
    GDConfig cfg;
    cfg.width = static_cast<int>(state.range(0));
    cfg.sigma_init = 0.05;
    cfg.steps = 200;
    cfg.loss_scale = LossScale::one_over_n;
    for (auto _ : state) benchmark::DoNotOptimize(multi_filter_run(ds.patches.K, ds.y, cfg).final().dispersion);
}
BENCHMARK(BM_MultiFilterRun)->Arg(32)->Arg(512);

void BM_MonteCarloLabels(benchmark::State& state) {
    SharedMeanOptions opt;
    opt.n_per_class = 100;
    const auto ds = gen_shared_mean_dataset(opt);
    const auto threads = static_cast<int>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(
            monte_carlo_random_labels(ds.patches.K, 0.1, 200, 256, 0, LossScale::one_over_n, threads).mean);
}
BENCHMARK(BM_MonteCarloLabels)->Arg(1)->Arg(4)->UseRealTime();

void BM_PatchPca(benchmark::State& state) {
    const auto set = gen_zero_sum_periodic_images(static_cast<int>(state.range(0)), 32, 4);
    for (auto _ : state) benchmark::DoNotOptimize(fit_patch_pca(set, {3, 3, 1}, true).eigenvalues);
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PatchPca)->Arg(100)->Arg(1000);

void BM_EnergyProfile(benchmark::State& state) {
    const Matrix rows = normal_matrix(500, 27, 5);
    const PcaBasis basis = fit_pca(rows, true);
    FilterBank bank;
    bank.filters = normal_matrix(state.range(0), 27, 6);
    for (auto _ : state) benchmark::DoNotOptimize(energy_profile(bank, basis, ProfileVariant::rms).e);
}
BENCHMARK(BM_EnergyProfile)->Arg(64)->Arg(512);

}  // namespace

BENCHMARK_MAIN();
