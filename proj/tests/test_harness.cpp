#include "fop/harness.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fop/config.hpp"
#include "fop/error.hpp"
#include "fop/run_record.hpp"

namespace fop {
namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "fop_harness_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  EXPECT_TRUE(in.good()) << "cannot open " << p;
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

// Reruns must agree byte for byte except (at most) the wall-clock line.
void expect_identical_modulo_wall_clock(const RunRecord& a, const RunRecord& b) {
  const std::vector<std::string> la = split_lines(run_record_to_string(a));
  const std::vector<std::string> lb = split_lines(run_record_to_string(b));
  ASSERT_EQ(la.size(), lb.size());
  std::size_t diffs = 0;
  for (std::size_t i = 0; i < la.size(); ++i) {
    if (la[i] == lb[i]) continue;
    ++diffs;
    EXPECT_NE(la[i].find("wall_clock_ms"), std::string::npos)
        << "lines differ outside wall_clock_ms: '" << la[i] << "' vs '" << lb[i]
        << "'";
  }
  EXPECT_LE(diffs, 1u);
}

RunConfig booth_sgd(double lr) {
  RunConfig cfg;
  cfg.command = "toy";
  cfg.objective = "booth";
  cfg.init = {-4.0, -4.0};  // the objective's default start, pinned so the config echo is exact
  cfg.optimizer.kind = OptKind::Sgd;
  cfg.optimizer.lr = lr;
  cfg.snapshot_every = 0;
  return cfg;
}

TEST(RunStatusMapping, ReasonStringsAndExitCodes) {
  EXPECT_EQ(status_from_reason("converged"), RunStatus::Converged);
  EXPECT_EQ(status_from_reason("cap"), RunStatus::Cap);
  EXPECT_EQ(status_from_reason("diverged"), RunStatus::Diverged);
  EXPECT_EQ(status_from_reason("completed"), RunStatus::Completed);
  EXPECT_THROW(status_from_reason("flarb"), FormatError);

  EXPECT_EQ(exit_code(RunStatus::Converged), 0);
  EXPECT_EQ(exit_code(RunStatus::Completed), 0);
  EXPECT_EQ(exit_code(RunStatus::Cap), 2);
  EXPECT_EQ(exit_code(RunStatus::Diverged), 3);
}

TEST(RunToy, BoothGradientDescentConverges) {
  RunRecord rec = run_toy(booth_sgd(0.1));

  EXPECT_TRUE(rec.summary.converged);
  EXPECT_EQ(rec.summary.exit_reason, "converged");
  EXPECT_EQ(rec.summary.iterations, 85u);
  EXPECT_LT(rec.summary.final_grad_norm, 1e-6);
  EXPECT_EQ(rec.series.size(), rec.summary.iterations + 1);

  // Default start and its loss: f(-4,-4) = (-19)^2 + (-17)^2.
  ASSERT_EQ(rec.series.front().theta.size(), 2u);
  EXPECT_EQ(rec.series.front().t, 0u);
  EXPECT_DOUBLE_EQ(rec.series.front().theta[0], -4.0);
  EXPECT_DOUBLE_EQ(rec.series.front().theta[1], -4.0);
  EXPECT_DOUBLE_EQ(rec.series.front().loss, 650.0);

  // The minimizer is (1, 3); mu = 2 turns the gradient tolerance into a
  // parameter-space radius well under 1e-5.
  EXPECT_NEAR(rec.series.back().theta[0], 1.0, 1e-5);
  EXPECT_NEAR(rec.series.back().theta[1], 3.0, 1e-5);

  // 0.1 < 2/L for this quadratic, so the loss never increases.
  for (std::size_t i = 1; i < rec.series.size(); ++i) {
    EXPECT_LE(rec.series[i].loss, rec.series[i - 1].loss);
  }

  // No preconditioner in play: the angle column stays empty.
  EXPECT_TRUE(std::isnan(rec.series.front().rot_angle));

  EXPECT_EQ(rec.config_json, to_canonical_json(booth_sgd(0.1)));
}

TEST(RunToy, HimmelblauGradientDescentConverges) {
  RunConfig cfg = booth_sgd(0.01);
  cfg.objective = "himmelblau";
  cfg.init.clear();  // fall back to this objective's own default start
  RunRecord rec = run_toy(cfg);
  EXPECT_TRUE(rec.summary.converged);
  EXPECT_EQ(rec.summary.iterations, 27u);
  EXPECT_LT(rec.summary.final_loss, 1e-9);
  // Default start for this objective.
  EXPECT_DOUBLE_EQ(rec.series.front().theta[0], 0.0);
  EXPECT_DOUBLE_EQ(rec.series.front().theta[1], -4.0);
}

TEST(RunToy, ZeroRateRunsToTheCap) {
  RunConfig cfg = booth_sgd(0.0);
  cfg.max_iters = 50;
  RunRecord rec = run_toy(cfg);

  EXPECT_FALSE(rec.summary.converged);
  EXPECT_EQ(rec.summary.exit_reason, "cap");
  EXPECT_EQ(rec.summary.iterations, 50u);
  ASSERT_EQ(rec.series.size(), 51u);
  for (const SeriesPoint& pt : rec.series) {
    EXPECT_DOUBLE_EQ(pt.theta[0], -4.0);
    EXPECT_DOUBLE_EQ(pt.theta[1], -4.0);
    EXPECT_DOUBLE_EQ(pt.loss, 650.0);
  }
  EXPECT_EQ(exit_code(status_from_reason(rec.summary.exit_reason)), 2);
}

TEST(RunToy, OversizedRateDiverges) {
  RunRecord rec = run_toy(booth_sgd(10.0));
  EXPECT_FALSE(rec.summary.converged);
  EXPECT_EQ(rec.summary.exit_reason, "diverged");
  EXPECT_TRUE(!std::isfinite(rec.summary.final_loss) ||
              rec.summary.final_loss > 1e12);
  EXPECT_EQ(exit_code(status_from_reason(rec.summary.exit_reason)), 3);
}

TEST(RunToy, CustomInitAtTheMinimumConvergesImmediately) {
  RunConfig cfg = booth_sgd(0.1);
  cfg.init = {1.0, 3.0};
  RunRecord rec = run_toy(cfg);
  EXPECT_TRUE(rec.summary.converged);
  EXPECT_EQ(rec.summary.iterations, 0u);
  ASSERT_EQ(rec.series.size(), 1u);
  EXPECT_DOUBLE_EQ(rec.series.front().loss, 0.0);
}

TEST(RunToy, RejectsBadObjectiveAndBadInit) {
  RunConfig cfg = booth_sgd(0.1);
  cfg.objective = "ackley";
  EXPECT_THROW(run_toy(cfg), ConfigError);

  cfg = booth_sgd(0.1);
  cfg.init = {1.0, 2.0, 3.0};
  EXPECT_THROW(run_toy(cfg), ConfigError);
}

TEST(RunToy, RerunIsByteIdenticalUpToWallClock) {
  RunConfig cfg = booth_sgd(0.1);
  cfg.optimizer.kind = OptKind::Fop;
  cfg.optimizer.fop_base = FopBase::Sgd;
  cfg.optimizer.precond.mode = PrecondMode::Full;
  cfg.optimizer.precond.hyper_lr = 3e-5;
  cfg.snapshot_every = 10;
  RunRecord a = run_toy(cfg);
  RunRecord b = run_toy(cfg);
  EXPECT_TRUE(a.summary.converged);
  EXPECT_FALSE(a.psnapshots.empty());
  // The preconditioner rotates the step away from the raw gradient, so the
  // angle column is populated.
  EXPECT_FALSE(std::isnan(a.series.front().rot_angle));
  expect_identical_modulo_wall_clock(a, b);
}

TEST(RunToy, WritesReadableRecordWithoutLeavingTempFiles) {
  const fs::path dir = fresh_dir("toy_out");
  RunConfig cfg = booth_sgd(0.1);
  cfg.out_path = (dir / "run.txt").string();
  RunRecord rec = run_toy(cfg);

  ASSERT_TRUE(fs::exists(dir / "run.txt"));
  RunRecord back = read_run_record(cfg.out_path);
  EXPECT_EQ(run_record_to_string(back), run_record_to_string(rec));

  for (const fs::directory_entry& e : fs::directory_iterator(dir)) {
    EXPECT_NE(e.path().extension(), ".tmp");
  }
}

TEST(RunBench, FixedRateRowMatchesItsToyRun) {
  RunConfig cfg = booth_sgd(0.1);
  cfg.command = "bench";
  cfg.bench_optimizers = {cfg.optimizer};
  std::vector<BenchRow> rows = run_bench(cfg);

  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].optimizer, "sgd");
  EXPECT_DOUBLE_EQ(rows[0].lr, 0.1);
  EXPECT_TRUE(rows[0].converged);
  EXPECT_EQ(rows[0].iterations, 85u);
  EXPECT_EQ(rows[0].status, "converged");
  // The walked path is at least the straight-line displacement (-4,-4)->(1,3).
  EXPECT_GE(rows[0].path_length, std::sqrt(74.0) - 1e-9);
  EXPECT_LT(rows[0].path_length, 100.0);
}

TEST(RunBench, PathLengthOfASingleStepIsTheStepNorm) {
  RunConfig cfg = booth_sgd(0.1);
  cfg.command = "bench";
  cfg.max_iters = 1;
  cfg.bench_optimizers = {cfg.optimizer};
  std::vector<BenchRow> rows = run_bench(cfg);

  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].status, "cap");
  // grad f(-4,-4) = (-106, -110), so one step of length lr * ||g||.
  EXPECT_NEAR(rows[0].path_length, std::hypot(10.6, 11.0), 1e-9);
}

TEST(RunBench, TuningPicksTheFastestGridRate) {
  RunConfig cfg = booth_sgd(0.1);
  cfg.command = "bench";
  cfg.tune_lr = true;

  OptimizerConfig sgd;
  sgd.kind = OptKind::Sgd;
  sgd.lr = 0.007;  // deliberately off-grid; tuning should override it
  OptimizerConfig adam;
  adam.kind = OptKind::Adam;
  adam.lr = 0.007;
  OptimizerConfig fop;
  fop.kind = OptKind::Fop;
  fop.lr = 0.007;
  fop.fop_base = FopBase::Sgd;
  fop.precond.mode = PrecondMode::Full;
  fop.precond.hyper_lr = 3e-5;
  cfg.bench_optimizers = {sgd, adam, fop};
  cfg.jobs = 3;

  std::vector<BenchRow> rows = run_bench(cfg);
  ASSERT_EQ(rows.size(), 3u);

  EXPECT_EQ(rows[0].optimizer, "sgd");
  EXPECT_DOUBLE_EQ(rows[0].lr, 0.1);
  EXPECT_TRUE(rows[0].converged);
  EXPECT_EQ(rows[0].iterations, 85u);

  EXPECT_EQ(rows[1].optimizer, "adam");
  EXPECT_DOUBLE_EQ(rows[1].lr, 1.0);
  EXPECT_TRUE(rows[1].converged);
  EXPECT_EQ(rows[1].iterations, 312u);

  EXPECT_EQ(rows[2].optimizer, "fop+sgd");
  EXPECT_DOUBLE_EQ(rows[2].lr, 0.1);
  EXPECT_TRUE(rows[2].converged);
  EXPECT_EQ(rows[2].iterations, 67u);

  // The learned preconditioner buys iterations over plain gradient descent
  // at the same tuned rate.
  EXPECT_LT(rows[2].iterations, rows[0].iterations);

  // A second pass on one worker must reproduce the pool's rows exactly.
  cfg.jobs = 1;
  std::vector<BenchRow> serial = run_bench(cfg);
  ASSERT_EQ(serial.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(serial[i].optimizer, rows[i].optimizer);
    EXPECT_DOUBLE_EQ(serial[i].lr, rows[i].lr);
    EXPECT_EQ(serial[i].iterations, rows[i].iterations);
    EXPECT_DOUBLE_EQ(serial[i].final_loss, rows[i].final_loss);
    EXPECT_DOUBLE_EQ(serial[i].path_length, rows[i].path_length);
  }
}

TEST(RunBench, MomentumBaseIsNamedInTheRow) {
  RunConfig cfg = booth_sgd(0.05);
  cfg.command = "bench";
  cfg.max_iters = 5;
  OptimizerConfig fop;
  fop.kind = OptKind::Fop;
  fop.lr = 0.05;
  fop.fop_base = FopBase::Momentum;
  cfg.bench_optimizers = {fop};
  std::vector<BenchRow> rows = run_bench(cfg);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].optimizer, "fop+momentum");
}

TEST(RunBench, CsvLayoutAndFileOutput) {
  std::vector<BenchRow> rows(2);
  rows[0] = {"sgd", 0.5, true, 85, 0.0, 12.25, "converged"};
  rows[1] = {"adam", 1.0, false, 50000, 2.0, 40.5, "cap"};
  const std::string expected =
      "optimizer,lr,converged,iterations,final_loss,path_length,status\n"
      "sgd,0.5,true,85,0,12.25,converged\n"
      "adam,1,false,50000,2,40.5,cap\n";
  EXPECT_EQ(bench_csv(rows), expected);

  const fs::path dir = fresh_dir("bench_out");
  RunConfig cfg = booth_sgd(0.1);
  cfg.command = "bench";
  cfg.bench_optimizers = {cfg.optimizer};
  cfg.out_path = (dir / "bench.csv").string();
  std::vector<BenchRow> run_rows = run_bench(cfg);
  EXPECT_EQ(read_file(dir / "bench.csv"), bench_csv(run_rows));
}

TEST(RunBench, RejectsEmptyOptimizerList) {
  RunConfig cfg = booth_sgd(0.1);
  cfg.command = "bench";
  EXPECT_THROW(run_bench(cfg), ConfigError);
}

TEST(RunSweep, GridShapeOrderingAndCellStatistics) {
  RunConfig cfg;
  cfg.command = "sweep";
  cfg.objective = "booth";
  cfg.optimizer.kind = OptKind::Momentum;
  cfg.sweep_lrs = {0.01, 0.1};
  cfg.sweep_hyper = {0.0, 0.5};
  cfg.sweep_seeds = {1, 2, 3};
  cfg.jobs = 2;

  SweepResult result = run_sweep(cfg);
  ASSERT_EQ(result.runs.size(), 12u);
  ASSERT_EQ(result.cells.size(), 4u);

  // lr-major, then hyper, then seed.
  EXPECT_DOUBLE_EQ(result.runs[0].lr, 0.01);
  EXPECT_DOUBLE_EQ(result.runs[0].hyper, 0.0);
  EXPECT_EQ(result.runs[0].seed, 1u);
  EXPECT_EQ(result.runs[2].seed, 3u);
  EXPECT_DOUBLE_EQ(result.runs[3].hyper, 0.5);
  EXPECT_DOUBLE_EQ(result.runs[6].lr, 0.1);

  const double cell_lrs[] = {0.01, 0.01, 0.1, 0.1};
  const double cell_hypers[] = {0.0, 0.5, 0.0, 0.5};
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_DOUBLE_EQ(result.cells[c].lr, cell_lrs[c]);
    EXPECT_DOUBLE_EQ(result.cells[c].hyper, cell_hypers[c]);
    EXPECT_EQ(result.cells[c].failed, 0u);
  }

  // A deterministic 2-D objective ignores the seed, so every member of a cell
  // coincides and the spread collapses.
  for (std::size_t c = 0; c < 4; ++c) {
    const SweepRunRow& first = result.runs[3 * c];
    for (std::size_t i = 3 * c; i < 3 * c + 3; ++i) {
      EXPECT_TRUE(result.runs[i].converged);
      EXPECT_EQ(result.runs[i].iterations, first.iterations);
      EXPECT_DOUBLE_EQ(result.runs[i].final_loss, first.final_loss);
    }
    EXPECT_NEAR(result.cells[c].mean_final_loss, first.final_loss, 1e-15);
    EXPECT_NEAR(result.cells[c].std_final_loss, 0.0, 1e-15);
  }

  // One worker must agree with two.
  cfg.jobs = 1;
  SweepResult serial = run_sweep(cfg);
  ASSERT_EQ(serial.runs.size(), result.runs.size());
  for (std::size_t i = 0; i < result.runs.size(); ++i) {
    EXPECT_EQ(serial.runs[i].iterations, result.runs[i].iterations);
    EXPECT_DOUBLE_EQ(serial.runs[i].final_loss, result.runs[i].final_loss);
  }
}

TEST(RunSweep, DivergedRunsAreCountedAsFailures) {
  RunConfig cfg;
  cfg.command = "sweep";
  cfg.objective = "booth";
  cfg.optimizer.kind = OptKind::Sgd;
  cfg.sweep_lrs = {10.0};
  cfg.sweep_hyper = {0.0};
  cfg.sweep_seeds = {1, 2};

  SweepResult result = run_sweep(cfg);
  ASSERT_EQ(result.runs.size(), 2u);
  ASSERT_EQ(result.cells.size(), 1u);
  for (const SweepRunRow& r : result.runs) {
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.status, "diverged");
  }
  EXPECT_EQ(result.cells[0].failed, 2u);
}

TEST(RunSweep, EmptyAxesAreRejected) {
  RunConfig cfg;
  cfg.command = "sweep";
  cfg.sweep_lrs = {};
  cfg.sweep_seeds = {1};
  EXPECT_THROW(run_sweep(cfg), ConfigError);
  cfg.sweep_lrs = {0.1};
  cfg.sweep_seeds = {};
  EXPECT_THROW(run_sweep(cfg), ConfigError);
}

TEST(RunSweep, CsvLayoutAndFileOutput) {
  const fs::path dir = fresh_dir("sweep_out");
  RunConfig cfg;
  cfg.command = "sweep";
  cfg.objective = "booth";
  cfg.optimizer.kind = OptKind::Sgd;
  cfg.sweep_lrs = {0.1};
  cfg.sweep_hyper = {0.0};
  cfg.sweep_seeds = {1, 2};
  cfg.out_path = (dir / "sweep.csv").string();

  SweepResult result = run_sweep(cfg);
  const std::string csv = read_file(dir / "sweep.csv");
  EXPECT_EQ(csv, sweep_csv(result));

  const std::vector<std::string> lines = split_lines(csv);
  ASSERT_EQ(lines.size(), 4u);  // header + 2 runs + 1 cell
  EXPECT_EQ(lines[0],
            "kind,lr,hyper,seed,converged,iterations,final_loss,status,"
            "mean_final_loss,std_final_loss,failed");
  EXPECT_EQ(lines[1].rfind("run,", 0), 0u);
  EXPECT_EQ(lines[2].rfind("run,", 0), 0u);
  EXPECT_EQ(lines[3].rfind("cell,", 0), 0u);
  for (const std::string& line : lines) {
    EXPECT_EQ(split_csv_row(line).size(), 11u) << line;
  }
}

TEST(RunSweep, NetworkObjectiveRunsTrainingCells) {
  RunConfig cfg;
  cfg.command = "sweep";
  cfg.objective = "mlp";
  cfg.dataset = "synthetic";
  cfg.optimizer.kind = OptKind::Momentum;
  cfg.train_n = 60;
  cfg.test_n = 20;
  cfg.batch_size = 20;
  cfg.epochs = 1;
  cfg.hidden = {8};
  cfg.eval_every = 0;
  cfg.sweep_lrs = {0.1};
  cfg.sweep_hyper = {};  // empty hyper axis collapses to a single neutral value
  cfg.sweep_seeds = {7};

  SweepResult result = run_sweep(cfg);
  ASSERT_EQ(result.runs.size(), 1u);
  ASSERT_EQ(result.cells.size(), 1u);
  EXPECT_EQ(result.runs[0].status, "completed");
  EXPECT_TRUE(result.runs[0].converged);
  EXPECT_EQ(result.runs[0].iterations, 3u);  // 60 samples / 20 per batch
  EXPECT_DOUBLE_EQ(result.runs[0].hyper, 0.0);
}

RunConfig small_train_config() {
  RunConfig cfg;
  cfg.command = "train";
  cfg.objective = "mlp";
  cfg.dataset = "synthetic";
  cfg.seed = 5;
  cfg.train_n = 120;
  cfg.test_n = 40;
  cfg.batch_size = 30;
  cfg.epochs = 2;
  cfg.hidden = {16};
  cfg.eval_every = 3;
  cfg.snapshot_every = 4;
  cfg.optimizer.kind = OptKind::Fop;
  cfg.optimizer.lr = 0.05;
  cfg.optimizer.fop_base = FopBase::Sgd;
  cfg.optimizer.precond.mode = PrecondMode::Full;
  cfg.optimizer.precond.hyper_lr = 1e-4;
  return cfg;
}

TEST(RunTrain, SmokeRunRecordsSeriesEvalsAndSnapshots) {
  RunRecord rec = run_train(small_train_config());

  EXPECT_EQ(rec.summary.exit_reason, "completed");
  EXPECT_TRUE(rec.summary.converged);
  EXPECT_EQ(rec.summary.iterations, 8u);  // 2 epochs x (120 / 30) batches

  ASSERT_EQ(rec.series.size(), 8u);
  EXPECT_EQ(rec.series.front().t, 1u);
  EXPECT_EQ(rec.series.back().t, 8u);
  for (const SeriesPoint& pt : rec.series) {
    EXPECT_TRUE(std::isfinite(pt.loss));
    ASSERT_FALSE(std::isnan(pt.rot_angle));
    EXPECT_GE(pt.rot_angle, 0.0);
    EXPECT_LE(pt.rot_angle, 180.0);
    EXPECT_TRUE(pt.theta.empty());  // the network is far beyond 4 parameters
  }

  // Periodic evaluation plus the forced first and last points.
  ASSERT_EQ(rec.evals.size(), 4u);
  const std::uint64_t eval_ts[] = {0, 3, 6, 8};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(rec.evals[i].t, eval_ts[i]);
    EXPECT_GE(rec.evals[i].test_accuracy, 0.0);
    EXPECT_LE(rec.evals[i].test_accuracy, 1.0);
    EXPECT_TRUE(std::isfinite(rec.evals[i].train_loss));
  }
  EXPECT_EQ(rec.summary.final_accuracy, rec.evals.back().test_accuracy);

  // Snapshots at t = 0, 4, 8 for each weight matrix (biases carry no P).
  ASSERT_EQ(rec.psnapshots.size(), 6u);
  const std::uint64_t snap_ts[] = {0, 0, 4, 4, 8, 8};
  const std::size_t snap_layers[] = {0, 2, 0, 2, 0, 2};
  const std::size_t snap_dims[] = {64, 16, 64, 16, 64, 16};
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(rec.psnapshots[i].t, snap_ts[i]);
    EXPECT_EQ(rec.psnapshots[i].layer, snap_layers[i]);
    EXPECT_EQ(rec.psnapshots[i].mode, "full");
    EXPECT_EQ(rec.psnapshots[i].m.rows(), snap_dims[i]);
    EXPECT_EQ(rec.psnapshots[i].m.cols(), snap_dims[i]);
  }

  EXPECT_EQ(rec.config_json, to_canonical_json(small_train_config()));
}

TEST(RunTrain, RerunIsByteIdenticalUpToWallClock) {
  RunRecord a = run_train(small_train_config());
  RunRecord b = run_train(small_train_config());
  expect_identical_modulo_wall_clock(a, b);
}

TEST(RunTrain, ZeroRateLeavesAccuracyAtItsUntrainedValue) {
  RunConfig cfg = small_train_config();
  cfg.optimizer = OptimizerConfig{};
  cfg.optimizer.kind = OptKind::Sgd;
  cfg.optimizer.lr = 0.0;
  cfg.epochs = 1;
  cfg.eval_every = 0;
  cfg.snapshot_every = 0;

  RunRecord rec = run_train(cfg);
  ASSERT_EQ(rec.evals.size(), 2u);
  EXPECT_EQ(rec.evals[0].t, 0u);
  EXPECT_EQ(rec.evals[1].t, 4u);
  EXPECT_EQ(rec.evals[0].test_accuracy, rec.evals[1].test_accuracy);
  EXPECT_EQ(rec.evals[0].train_loss, rec.evals[1].train_loss);
}

TEST(RunTrain, ValidatesItsConfig) {
  RunConfig cfg = small_train_config();
  cfg.epochs = 0;
  EXPECT_THROW(run_train(cfg), ConfigError);

  cfg = small_train_config();
  cfg.batch_size = 0;
  EXPECT_THROW(run_train(cfg), ConfigError);

  cfg = small_train_config();
  cfg.batch_size = cfg.train_n + 1;
  EXPECT_THROW(run_train(cfg), ConfigError);

  cfg = small_train_config();
  cfg.dataset = "imagenet";
  EXPECT_THROW(run_train(cfg), ConfigError);

  // Asking for the IDX corpus when none is on disk must fail loudly rather
  // than silently substituting generated data.
  ::unsetenv("FOP_DATA_DIR");
  cfg = small_train_config();
  cfg.dataset = "mnist";
  EXPECT_THROW(run_train(cfg), ConfigError);
}

TEST(RunTrain, WrittenRecordReadsBackIdentically) {
  const fs::path dir = fresh_dir("train_out");
  RunConfig cfg = small_train_config();
  cfg.out_path = (dir / "train_run.txt").string();
  RunRecord rec = run_train(cfg);
  RunRecord back = read_run_record(cfg.out_path);
  EXPECT_EQ(run_record_to_string(back), run_record_to_string(rec));
}

TEST(RunAnalyze, EmitsSpectraAnglesAndNormsForAFrozenPreconditioner) {
  const fs::path dir = fresh_dir("analyze");
  RunConfig cfg = booth_sgd(0.1);
  cfg.optimizer.kind = OptKind::Fop;
  cfg.optimizer.fop_base = FopBase::Sgd;
  cfg.optimizer.precond.mode = PrecondMode::Full;
  cfg.optimizer.precond.hyper_lr = 0.0;  // M never moves: P stays the identity
  cfg.snapshot_every = 1;
  cfg.max_iters = 5;
  cfg.tol = 1e-30;
  cfg.out_path = (dir / "run.txt").string();
  RunRecord rec = run_toy(cfg);
  ASSERT_EQ(rec.summary.exit_reason, "cap");
  ASSERT_EQ(rec.psnapshots.size(), 6u);

  const fs::path out = dir / "report";
  run_analyze(cfg.out_path, out.string());

  // Spectrum: one row per snapshot per layer, all eigenvalues pinned at 1.
  const std::vector<std::string> spec = split_lines(read_file(out / "spectrum.csv"));
  ASSERT_EQ(spec.size(), 7u);
  EXPECT_EQ(spec[0], "t,layer,mode,n,min,max,det_proxy,uniformity,eigenvalues");
  for (std::size_t i = 1; i < spec.size(); ++i) {
    const std::vector<std::string> f = split_csv_row(spec[i]);
    ASSERT_EQ(f.size(), 9u);
    EXPECT_EQ(f[0], std::to_string(i - 1));  // t = 0..5
    EXPECT_EQ(f[1], "0");
    EXPECT_EQ(f[2], "full");
    EXPECT_EQ(f[3], "2");
    EXPECT_EQ(f[4], "1");
    EXPECT_EQ(f[5], "1");
    EXPECT_EQ(f[8], "1;1");
  }

  // Angles: the identity never rotates the gradient.
  const std::vector<std::string> angles = split_lines(read_file(out / "angles.csv"));
  ASSERT_EQ(angles.size(), 7u);
  EXPECT_EQ(angles[0], "t,angle_degrees");
  for (std::size_t i = 1; i < angles.size(); ++i) {
    const std::vector<std::string> f = split_csv_row(angles[i]);
    ASSERT_EQ(f.size(), 2u);
    // An identity preconditioner leaves the step direction unchanged; the recorded
    // angle is only acos() rounding noise (observed ~1e-6 degrees).
    EXPECT_LT(std::abs(std::strtod(f[1].c_str(), nullptr)), 1e-5);
  }

  // Norms: spectral norm 1 against a flat bound, never violated.
  const std::vector<std::string> norms = split_lines(read_file(out / "norms.csv"));
  ASSERT_EQ(norms.size(), 7u);
  EXPECT_EQ(norms[0], "t,layer,spec_norm,fro_norm,bound,violated");
  for (std::size_t i = 1; i < norms.size(); ++i) {
    const std::vector<std::string> f = split_csv_row(norms[i]);
    ASSERT_EQ(f.size(), 6u);
    EXPECT_EQ(f[2], "1");
    EXPECT_EQ(f[4], "1");
    EXPECT_EQ(f[5], "false");
  }
}

TEST(RunAnalyze, RequiresSnapshotsAndAReadableRecord) {
  const fs::path dir = fresh_dir("analyze_errors");
  RunConfig cfg = booth_sgd(0.1);  // plain sgd records no preconditioner
  cfg.snapshot_every = 1;
  cfg.max_iters = 3;
  cfg.out_path = (dir / "plain.txt").string();
  run_toy(cfg);
  EXPECT_THROW(run_analyze(cfg.out_path, (dir / "report").string()), ConfigError);
  EXPECT_THROW(run_analyze((dir / "missing.txt").string(), (dir / "r2").string()),
               FormatError);
}

}  // namespace
}  // namespace fop
