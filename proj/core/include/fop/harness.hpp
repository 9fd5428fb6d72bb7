#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fop/config.hpp"
#include "fop/run_record.hpp"

namespace fop {

// toy | bench | train | sweep share these completion codes (see exit_code).
enum class RunStatus { Converged, Cap, Diverged, Completed };

RunStatus status_from_reason(const std::string& reason);
int exit_code(RunStatus s);

// Gradient descent on a named 2-D objective until ||grad||_2 < tol or the
// iteration cap; series carries the full trajectory. Writes cfg.out_path when
// set. Divergence (loss > 1e12 or non-finite) ends the run with reason
// "diverged" rather than throwing.
RunRecord run_toy(const RunConfig& cfg);

struct BenchRow {
  std::string optimizer;
  double lr = 0.0;
  bool converged = false;
  std::uint64_t iterations = 0;
  double final_loss = 0.0;
  double path_length = 0.0;
  std::string status;  // converged | cap | diverged
};

// One row per optimizer on the shared objective and init; when cfg.tune_lr,
// each optimizer first picks the grid lr with fewest iterations to converge
// (ties to the earlier grid entry). Member failures land in their row.
std::vector<BenchRow> run_bench(const RunConfig& cfg);
std::string bench_csv(const std::vector<BenchRow>& rows);

struct SweepRunRow {
  double lr = 0.0;
  double hyper = 0.0;
  std::uint64_t seed = 0;
  bool converged = false;
  std::uint64_t iterations = 0;
  double final_loss = 0.0;
  std::string status;
};

struct SweepCellRow {
  double lr = 0.0;
  double hyper = 0.0;
  double mean_final_loss = 0.0;
  double std_final_loss = 0.0;
  std::size_t failed = 0;
};

struct SweepResult {
  std::vector<SweepRunRow> runs;
  std::vector<SweepCellRow> cells;
};

// Cartesian lr x hyper x seeds over cfg.objective ("mlp" selects a small
// network run; anything else a toy run). The hyper axis maps to the knob the
// optimizer kind actually has: momentum alpha, fop hyper_lr, shd/pphd rho.
// Cells run independently across up to cfg.jobs threads.
SweepResult run_sweep(const RunConfig& cfg);
std::string sweep_csv(const SweepResult& result);

// Mini-batch training per cfg (dataset, epochs, batch size, optimizer).
RunRecord run_train(const RunConfig& cfg);

// Reads a run artifact and writes spectrum.csv, angles.csv, norms.csv into
// out_dir. Requires P snapshots in the record.
void run_analyze(const std::string& run_path, const std::string& out_dir);

}  // namespace fop
