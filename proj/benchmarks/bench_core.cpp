// Microbenchmarks for the numerical kernels on the training hot path.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "fop/dataset.hpp"
#include "fop/eigen.hpp"
#include "fop/kernel_reshape.hpp"
#include "fop/mat.hpp"
#include "fop/mlp.hpp"
#include "fop/optimizer.hpp"
#include "fop/preconditioner.hpp"
#include "fop/rng.hpp"

namespace {

using namespace fop;

void BM_Matmul(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Mat a = gaussian_mat(n, n, 1.0, rng);
  const Mat b = gaussian_mat(n, n, 1.0, rng);
  for (auto _ : state) {
    Mat c = matmul(a, b);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(64)->Arg(128);

void BM_SymEigendecompose(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  const Mat g = gaussian_mat(n, n, 1.0, rng);
  const Mat s = 0.5 * (g + transpose(g));
  for (auto _ : state) {
    EigenResult r = sym_eigendecompose(s);
    benchmark::DoNotOptimize(r.eigenvalues.data());
  }
}
BENCHMARK(BM_SymEigendecompose)->Arg(16)->Arg(32)->Arg(64);

Preconditioner bench_preconditioner(PrecondMode mode, std::size_t n, Rng& rng) {
  PreconditionerConfig cfg;
  cfg.mode = mode;
  cfg.rank = 8;
  cfg.hyper_lr = 1e-4;
  Preconditioner p = make_preconditioner(cfg, n, rng);
  if (mode != PrecondMode::LowRank) {
    axpy(0.05, gaussian_mat(n, n, 1.0, rng), p.M);
    p.invalidate_cache();
  }
  return p;
}

void BM_ApplyFull(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  Preconditioner p = bench_preconditioner(PrecondMode::Full, n, rng);
  const Mat g = gaussian_mat(n, 16, 1.0, rng);
  for (auto _ : state) {
    Mat out = apply(p, g);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_ApplyFull)->Arg(64)->Arg(128);

void BM_ApplyLowRank(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Rng rng(4);
  Preconditioner p = bench_preconditioner(PrecondMode::LowRank, n, rng);
  const Mat g = gaussian_mat(n, 16, 1.0, rng);
  for (auto _ : state) {
    Mat out = apply(p, g);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_ApplyLowRank)->Arg(64)->Arg(128);

void BM_HypergradientAndUpdate(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  Rng rng(5);
  Preconditioner p = bench_preconditioner(PrecondMode::Full, n, rng);
  const Mat g_t = gaussian_mat(n, 1, 1.0, rng);
  const Mat g_prev = gaussian_mat(n, 1, 1.0, rng);
  for (auto _ : state) {
    Mat grad_m = hypergradient(p, g_t, g_prev, 0.05);
    update_m(p, grad_m);
    benchmark::DoNotOptimize(p.M.data());
  }
}
BENCHMARK(BM_HypergradientAndUpdate)->Arg(64)->Arg(128);

void BM_MlpForwardBackward(benchmark::State& state) {
  const std::size_t batch = static_cast<std::size_t>(state.range(0));
  const Dataset data = synthetic_dataset(batch, 7);
  MlpModel model = make_mlp({data.inputs.cols(), 32, data.class_count},
                            Activation::Tanh, 9);
  for (auto _ : state) {
    ForwardCache cache;
    forward(model, data.inputs, &cache);
    std::vector<Mat> grads = backward(model, cache, data.labels);
    benchmark::DoNotOptimize(grads.data());
  }
}
BENCHMARK(BM_MlpForwardBackward)->Arg(50)->Arg(200);

void BM_PreconditionedTrainingStep(benchmark::State& state) {
  const std::size_t batch = 50;
  const Dataset data = synthetic_dataset(batch, 7);
  MlpModel model = make_mlp({data.inputs.cols(), 32, data.class_count},
                            Activation::Tanh, 9);
  OptimizerConfig cfg;
  cfg.kind = OptKind::Fop;
  cfg.lr = 0.05;
  cfg.precond.mode = PrecondMode::Full;
  cfg.precond.hyper_lr = 1e-4;
  Rng rng(10);
  OptimizerState s =
      make_optimizer_state(cfg, model_params(model), precondition_mask(model), rng);
  for (auto _ : state) {
    set_model_params(model, s.theta);
    ForwardCache cache;
    forward(model, data.inputs, &cache);
    std::vector<Mat> grads = backward(model, cache, data.labels);
    optimizer_step(s, grads);
    benchmark::DoNotOptimize(s.theta.data());
  }
}
BENCHMARK(BM_PreconditionedTrainingStep);

void BM_KernelReshapeRoundTrip(benchmark::State& state) {
  Rng rng(11);
  KernelTensor t;
  t.k = 3;
  t.in_ch = 16;
  t.out_ch = 32;
  t.data.resize(t.k * t.k * t.in_ch * t.out_ch);
  for (double& v : t.data) v = rng.next_gaussian();
  for (auto _ : state) {
    Mat m = reshape_kernel_fwd(t);
    KernelTensor back = reshape_kernel_bwd(m, t.k, t.in_ch, t.out_ch);
    benchmark::DoNotOptimize(back.data.data());
  }
}
BENCHMARK(BM_KernelReshapeRoundTrip);

}  // namespace

BENCHMARK_MAIN();
