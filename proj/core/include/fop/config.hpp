#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fop/mat.hpp"
#include "fop/optimizer.hpp"

namespace fop {

struct RunConfig {
  std::string command = "toy";  // toy | bench | train | sweep | analyze
  std::string objective = "booth";
  std::string dataset = "auto";  // auto | synthetic | mnist
  OptimizerConfig optimizer;
  std::uint64_t seed = 0;
  std::uint64_t snapshot_every = 100;

  // toy / bench
  Vec init;  // empty = objective default
  std::uint64_t max_iters = 50000;
  double tol = 1e-6;
  bool tune_lr = false;  // bench: pick lr per optimizer from the grid

  // bench
  std::vector<OptimizerConfig> bench_optimizers;

  // train
  std::size_t epochs = 5;
  std::size_t batch_size = 100;
  std::vector<std::size_t> hidden = {100, 100, 100};
  std::uint64_t eval_every = 20;
  std::size_t train_n = 10000;
  std::size_t test_n = 2000;

  // sweep
  Vec sweep_lrs;
  Vec sweep_hyper;  // momentum alpha or hyper lr, by optimizer kind
  std::vector<std::uint64_t> sweep_seeds;

  // not part of the canonical echo: where and how wide to run
  std::string out_path;
  int jobs = 1;
};

// Single-line JSON with sorted keys; excludes out_path and jobs so reruns to
// different destinations stay byte-identical.
std::string to_canonical_json(const RunConfig& c);
RunConfig run_config_from_json(const std::string& text);

std::string optimizer_kind_name(OptKind k);
std::string precond_mode_name(PrecondMode m);

// The lr grid used whenever per-optimizer tuning is requested.
const Vec& tuning_grid();

}  // namespace fop
