#include "fop/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

#include "fop/analysis.hpp"
#include "fop/dataset.hpp"
#include "fop/error.hpp"
#include "fop/mlp.hpp"
#include "fop/objectives.hpp"
#include "fop/optimizer.hpp"

namespace fop {

namespace {

constexpr double kDivergenceLoss = 1e12;

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch())
      .count();
}

Objective named_objective(const std::string& name) {
  if (name == "booth") return booth_objective();
  if (name == "himmelblau") return himmelblau_objective();
  if (name == "rosenbrock") return rosenbrock_objective();
  throw ConfigError("unknown objective '" + name + "'");
}

Vec default_init(const std::string& name) {
  if (name == "booth") return {-4.0, -4.0};
  if (name == "himmelblau") return {0.0, -4.0};
  if (name == "rosenbrock") return {-1.2, 1.0};
  throw ConfigError("unknown objective '" + name + "'");
}

// Angle between the raw gradient and the preconditioned direction, with every
// parameter's contribution concatenated (unpreconditioned ones pass through).
double global_rotation_angle(const OptimizerState& state,
                             const std::vector<Mat>& grads) {
  Vec g, pg;
  for (std::size_t i = 0; i < grads.size(); ++i) {
    const Mat* transformed = nullptr;
    Mat buf;
    if (state.config.kind == OptKind::Fop && state.preconditioned[i]) {
      buf = apply(state.precond[i], grads[i]);
      transformed = &buf;
    } else {
      transformed = &grads[i];
    }
    g.insert(g.end(), grads[i].values().begin(), grads[i].values().end());
    pg.insert(pg.end(), transformed->values().begin(), transformed->values().end());
  }
  return rotation_angle(g, pg);
}

void snapshot_preconditioners(const OptimizerState& state, std::uint64_t t,
                              RunRecord& rec) {
  if (state.config.kind != OptKind::Fop) return;
  for (std::size_t i = 0; i < state.precond.size(); ++i) {
    if (!state.preconditioned[i]) continue;
    PSnapshot snap;
    snap.t = t;
    snap.layer = i;
    snap.mode = precond_mode_name(state.config.precond.mode);
    snap.m = state.precond[i].M;
    if (state.config.precond.hyper_optimizer == HyperOpt::Adam) {
      snap.hyper_m = state.precond[i].hyper_m;
      snap.hyper_v = state.precond[i].hyper_v;
    }
    rec.psnapshots.push_back(std::move(snap));
  }
}

void maybe_write(const RunRecord& rec, const std::string& path) {
  if (!path.empty()) write_run_record(rec, path);
}

}  // namespace

RunStatus status_from_reason(const std::string& reason) {
  if (reason == "converged") return RunStatus::Converged;
  if (reason == "cap") return RunStatus::Cap;
  if (reason == "diverged") return RunStatus::Diverged;
  if (reason == "completed") return RunStatus::Completed;
  throw FormatError("unknown exit reason '" + reason + "'");
}

int exit_code(RunStatus s) {
  switch (s) {
    case RunStatus::Converged:
    case RunStatus::Completed:
      return 0;
    case RunStatus::Cap:
      return 2;
    case RunStatus::Diverged:
      return 3;
  }
  return 4;
}

RunRecord run_toy(const RunConfig& cfg) {
  Objective obj = named_objective(cfg.objective);
  RunConfig resolved = cfg;
  if (resolved.init.empty()) resolved.init = default_init(cfg.objective);
  if (resolved.init.size() != obj.dim) {
    throw ConfigError("run_toy: init dimension " +
                      std::to_string(resolved.init.size()) + " for a " +
                      std::to_string(obj.dim) + "-D objective");
  }

  const double start_ms = now_ms();
  Rng rng(resolved.seed);
  OptimizerState state =
      make_optimizer_state(resolved.optimizer, {as_column(resolved.init)}, {}, rng);

  RunRecord rec;
  rec.config_json = to_canonical_json(resolved);

  const bool fop = resolved.optimizer.kind == OptKind::Fop;
  std::string reason;
  std::uint64_t t = 0;
  while (true) {
    const Vec theta = state.theta[0].values();
    const double loss = obj.eval(theta);
    Vec g = obj.grad(theta);
    const double gnorm = l2_norm(g);

    SeriesPoint pt;
    pt.t = t;
    pt.loss = loss;
    pt.grad_norm = gnorm;
    pt.theta = theta;
    std::vector<Mat> grads = {as_column(g)};
    if (fop && gnorm > 0.0) pt.rot_angle = global_rotation_angle(state, grads);
    rec.series.push_back(std::move(pt));
    if (resolved.snapshot_every > 0 && t % resolved.snapshot_every == 0) {
      snapshot_preconditioners(state, t, rec);
    }

    if (!std::isfinite(loss) || !std::isfinite(gnorm) || loss > kDivergenceLoss) {
      reason = "diverged";
      break;
    }
    if (gnorm < resolved.tol) {
      reason = "converged";
      break;
    }
    if (t >= resolved.max_iters) {
      reason = "cap";
      break;
    }
    optimizer_step(state, grads);
    ++t;
  }

  if (resolved.snapshot_every > 0 && t % resolved.snapshot_every != 0) {
    snapshot_preconditioners(state, t, rec);
  }
  rec.summary.converged = reason == "converged";
  rec.summary.iterations = t;
  rec.summary.final_loss = rec.series.back().loss;
  rec.summary.final_grad_norm = rec.series.back().grad_norm;
  rec.summary.exit_reason = reason;
  rec.summary.wall_clock_ms = now_ms() - start_ms;
  maybe_write(rec, cfg.out_path);
  return rec;
}

namespace {

BenchRow bench_one(const RunConfig& base, const OptimizerConfig& opt) {
  RunConfig cfg = base;
  cfg.command = "toy";
  cfg.optimizer = opt;
  cfg.out_path.clear();
  cfg.snapshot_every = 0;

  if (base.tune_lr) {
    double best_lr = opt.lr;
    std::uint64_t best_iters = 0;
    bool found = false;
    for (double lr : tuning_grid()) {
      RunConfig probe = cfg;
      probe.optimizer.lr = lr;
      RunRecord r = run_toy(probe);
      if (r.summary.converged &&
          (!found || r.summary.iterations < best_iters)) {
        found = true;
        best_lr = lr;
        best_iters = r.summary.iterations;
      }
    }
    if (found) cfg.optimizer.lr = best_lr;
  }

  RunRecord rec = run_toy(cfg);
  BenchRow row;
  row.optimizer = optimizer_kind_name(opt.kind);
  if (opt.kind == OptKind::Fop) {
    row.optimizer += opt.fop_base == FopBase::Momentum ? "+momentum" : "+sgd";
  }
  row.lr = cfg.optimizer.lr;
  row.converged = rec.summary.converged;
  row.iterations = rec.summary.iterations;
  row.final_loss = rec.summary.final_loss;
  row.status = rec.summary.exit_reason;
  double path = 0.0;
  for (std::size_t i = 1; i < rec.series.size(); ++i) {
    double step = 0.0;
    for (std::size_t j = 0; j < rec.series[i].theta.size(); ++j) {
      const double d = rec.series[i].theta[j] - rec.series[i - 1].theta[j];
      step += d * d;
    }
    path += std::sqrt(step);
  }
  row.path_length = path;
  return row;
}

}  // namespace

std::vector<BenchRow> run_bench(const RunConfig& cfg) {
  if (cfg.bench_optimizers.empty()) {
    throw ConfigError("run_bench: no optimizers listed");
  }
  std::vector<BenchRow> rows(cfg.bench_optimizers.size());
  const std::size_t jobs =
      std::max(1, std::min<int>(cfg.jobs, static_cast<int>(rows.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= rows.size()) return;
      rows[i] = bench_one(cfg, cfg.bench_optimizers[i]);
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  if (!cfg.out_path.empty()) {
    const std::string csv = bench_csv(rows);
    std::ofstream out(cfg.out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("run_bench: cannot open " + cfg.out_path);
    out << csv;
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "optimizer,lr,converged,iterations,final_loss,path_length,status\n";
  for (const BenchRow& r : rows) {
    out += r.optimizer + ',' + format_double(r.lr) + ',' +
           (r.converged ? "true" : "false") + ',' + std::to_string(r.iterations) +
           ',' + format_double(r.final_loss) + ',' + format_double(r.path_length) +
           ',' + r.status + '\n';
  }
  return out;
}

namespace {

void apply_hyper(OptimizerConfig& opt, double hyper) {
  switch (opt.kind) {
    case OptKind::Momentum:
      opt.momentum_alpha = hyper;
      break;
    case OptKind::Fop:
      opt.precond.hyper_lr = hyper;
      break;
    case OptKind::Shd:
      opt.shd_rho = hyper;
      break;
    case OptKind::Pphd:
      opt.pphd_rho = hyper;
      break;
    case OptKind::Sgd:
    case OptKind::Adam:
      break;
  }
}

SweepRunRow sweep_cell_toy(const RunConfig& base, double lr, double hyper,
                           std::uint64_t seed) {
  RunConfig cfg = base;
  cfg.command = "toy";
  cfg.seed = seed;
  cfg.out_path.clear();
  cfg.snapshot_every = 0;
  cfg.optimizer.lr = lr;
  apply_hyper(cfg.optimizer, hyper);
  RunRecord rec = run_toy(cfg);
  SweepRunRow row;
  row.lr = lr;
  row.hyper = hyper;
  row.seed = seed;
  row.converged = rec.summary.converged;
  row.iterations = rec.summary.iterations;
  row.final_loss = rec.summary.final_loss;
  row.status = rec.summary.exit_reason;
  return row;
}

SweepRunRow sweep_cell_mlp(const RunConfig& base, double lr, double hyper,
                           std::uint64_t seed) {
  RunConfig cfg = base;
  cfg.command = "train";
  cfg.seed = seed;
  cfg.out_path.clear();
  cfg.snapshot_every = 0;
  cfg.optimizer.lr = lr;
  apply_hyper(cfg.optimizer, hyper);
  RunRecord rec = run_train(cfg);
  SweepRunRow row;
  row.lr = lr;
  row.hyper = hyper;
  row.seed = seed;
  row.converged = rec.summary.exit_reason == "completed";
  row.iterations = rec.summary.iterations;
  row.final_loss = rec.summary.final_loss;
  row.status = rec.summary.exit_reason;
  return row;
}

}  // namespace

SweepResult run_sweep(const RunConfig& cfg) {
  if (cfg.sweep_lrs.empty() || cfg.sweep_seeds.empty()) {
    throw ConfigError("run_sweep: sweep_lrs and sweep_seeds must be non-empty");
  }
  const Vec hypers = cfg.sweep_hyper.empty() ? Vec{0.0} : cfg.sweep_hyper;
  const bool mlp = cfg.objective == "mlp";

  struct Task {
    double lr;
    double hyper;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (double lr : cfg.sweep_lrs)
    for (double h : hypers)
      for (std::uint64_t s : cfg.sweep_seeds) tasks.push_back({lr, h, s});

  SweepResult result;
  result.runs.resize(tasks.size());
  const std::size_t jobs =
      std::max(1, std::min<int>(cfg.jobs, static_cast<int>(tasks.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& tk = tasks[i];
      result.runs[i] = mlp ? sweep_cell_mlp(cfg, tk.lr, tk.hyper, tk.seed)
                           : sweep_cell_toy(cfg, tk.lr, tk.hyper, tk.seed);
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  const std::size_t per_cell = cfg.sweep_seeds.size();
  for (std::size_t c = 0; c < tasks.size(); c += per_cell) {
    SweepCellRow cell;
    cell.lr = tasks[c].lr;
    cell.hyper = tasks[c].hyper;
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = c; i < c + per_cell; ++i) {
      const SweepRunRow& r = result.runs[i];
      sum += r.final_loss;
      sum2 += r.final_loss * r.final_loss;
      if (r.status == "diverged") cell.failed += 1;
    }
    const double n = static_cast<double>(per_cell);
    cell.mean_final_loss = sum / n;
    const double var = std::max(0.0, sum2 / n - cell.mean_final_loss * cell.mean_final_loss);
    cell.std_final_loss = std::sqrt(var);
    result.cells.push_back(cell);
  }

  if (!cfg.out_path.empty()) {
    const std::string csv = sweep_csv(result);
    std::ofstream out(cfg.out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("run_sweep: cannot open " + cfg.out_path);
    out << csv;
  }
  return result;
}

std::string sweep_csv(const SweepResult& result) {
  std::string out =
      "kind,lr,hyper,seed,converged,iterations,final_loss,status,mean_final_loss,"
      "std_final_loss,failed\n";
  for (const SweepRunRow& r : result.runs) {
    out += "run," + format_double(r.lr) + ',' + format_double(r.hyper) + ',' +
           std::to_string(r.seed) + ',' + (r.converged ? "true" : "false") + ',' +
           std::to_string(r.iterations) + ',' + format_double(r.final_loss) + ',' +
           r.status + ",,,\n";
  }
  for (const SweepCellRow& c : result.cells) {
    out += "cell," + format_double(c.lr) + ',' + format_double(c.hyper) +
           ",,,,,," + format_double(c.mean_final_loss) + ',' +
           format_double(c.std_final_loss) + ',' + std::to_string(c.failed) + '\n';
  }
  return out;
}

RunRecord run_train(const RunConfig& cfg) {
  if (cfg.epochs < 1) throw ConfigError("run_train: epochs must be >= 1");

  TrainTestData data;
  if (cfg.dataset == "auto") {
    data = default_dataset(cfg.train_n, cfg.test_n);
  } else if (cfg.dataset == "synthetic") {
    data.train = synthetic_dataset(cfg.train_n, 1000003);
    data.test = synthetic_dataset(cfg.test_n, 2000003);
    data.source = "synthetic";
  } else if (cfg.dataset == "mnist") {
    data = default_dataset(cfg.train_n, cfg.test_n);
    if (data.source != "mnist") {
      throw ConfigError("run_train: MNIST requested but IDX files not found under "
                        "FOP_DATA_DIR");
    }
  } else {
    throw ConfigError("run_train: unknown dataset '" + cfg.dataset + "'");
  }
  const std::size_t n = data.train.inputs.rows();
  if (cfg.batch_size == 0 || cfg.batch_size > n) {
    throw ConfigError("run_train: batch_size must be in [1, N]");
  }

  const double start_ms = now_ms();
  Rng master(cfg.seed);
  const std::uint64_t model_seed = master.next_u64();
  const std::uint64_t precond_seed = master.next_u64();
  const std::uint64_t shuffle_seed = master.next_u64();

  std::vector<std::size_t> dims;
  dims.push_back(data.train.inputs.cols());
  for (std::size_t h : cfg.hidden) dims.push_back(h);
  dims.push_back(data.train.class_count);
  MlpModel model = make_mlp(dims, Activation::Tanh, model_seed);

  Rng precond_rng(precond_seed);
  OptimizerState state = make_optimizer_state(
      cfg.optimizer, model_params(model), precondition_mask(model), precond_rng);

  RunRecord rec;
  rec.config_json = to_canonical_json(cfg);

  Rng shuffle_rng(shuffle_seed);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  const std::size_t d = data.train.inputs.cols();
  const bool fop = cfg.optimizer.kind == OptKind::Fop;
  std::uint64_t t = 0;
  std::string reason = "completed";

  auto evaluate = [&](std::uint64_t at) {
    set_model_params(model, state.theta);
    EvalPoint e;
    e.t = at;
    e.test_accuracy = accuracy(model, data.test);
    ForwardCache cache;
    forward(model, data.train.inputs, &cache);
    e.train_loss = cross_entropy(cache.post.back(), data.train.labels);
    rec.evals.push_back(e);
  };

  if (cfg.snapshot_every > 0) snapshot_preconditioners(state, 0, rec);
  evaluate(0);

  bool stop = false;
  for (std::size_t epoch = 0; epoch < cfg.epochs && !stop; ++epoch) {
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t j = shuffle_rng.next_u64() % i;
      std::swap(order[i - 1], order[j]);
    }
    for (std::size_t start = 0; start + cfg.batch_size <= n && !stop;
         start += cfg.batch_size) {
      const std::size_t bs = cfg.batch_size;
      Mat bx(bs, d);
      std::vector<int> by(bs);
      for (std::size_t r = 0; r < bs; ++r) {
        const std::size_t src = order[start + r];
        std::copy(data.train.inputs.data() + src * d,
                  data.train.inputs.data() + (src + 1) * d, bx.data() + r * d);
        by[r] = data.train.labels[src];
      }

      set_model_params(model, state.theta);
      ForwardCache cache;
      forward(model, bx, &cache);
      const double loss = cross_entropy(cache.post.back(), by);
      std::vector<Mat> grads = backward(model, cache, by);

      double gn2 = 0.0;
      for (const Mat& g : grads)
        for (double v : g.values()) gn2 += v * v;
      const double gnorm = std::sqrt(gn2);

      SeriesPoint pt;
      pt.t = t + 1;
      pt.loss = loss;
      pt.grad_norm = gnorm;
      if (fop && gnorm > 0.0) pt.rot_angle = global_rotation_angle(state, grads);
      rec.series.push_back(std::move(pt));

      if (!std::isfinite(loss) || !std::isfinite(gnorm) || loss > kDivergenceLoss) {
        reason = "diverged";
        stop = true;
        break;
      }

      optimizer_step(state, grads);
      ++t;
      if (cfg.snapshot_every > 0 && t % cfg.snapshot_every == 0) {
        snapshot_preconditioners(state, t, rec);
      }
      if (cfg.eval_every > 0 && t % cfg.eval_every == 0) evaluate(t);
    }
  }

  if (reason != "diverged") {
    if (cfg.snapshot_every > 0 && t % cfg.snapshot_every != 0) {
      snapshot_preconditioners(state, t, rec);
    }
    if (rec.evals.empty() || rec.evals.back().t != t) evaluate(t);
  }

  rec.summary.converged = reason == "completed";
  rec.summary.iterations = t;
  rec.summary.final_loss =
      rec.series.empty() ? std::numeric_limits<double>::quiet_NaN()
                         : rec.series.back().loss;
  rec.summary.final_grad_norm =
      rec.series.empty() ? std::numeric_limits<double>::quiet_NaN()
                         : rec.series.back().grad_norm;
  rec.summary.final_accuracy =
      rec.evals.empty() ? std::numeric_limits<double>::quiet_NaN()
                        : rec.evals.back().test_accuracy;
  rec.summary.exit_reason = reason;
  rec.summary.wall_clock_ms = now_ms() - start_ms;
  maybe_write(rec, cfg.out_path);
  return rec;
}

void run_analyze(const std::string& run_path, const std::string& out_dir) {
  RunRecord rec = read_run_record(run_path);
  if (rec.psnapshots.empty()) {
    throw ConfigError(
        "run_analyze: " + run_path +
        " has no P snapshots; re-record the run with --snapshot-every > 0");
  }
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  std::string spec_csv = "t,layer,mode,n,min,max,det_proxy,uniformity,eigenvalues\n";
  for (const PSnapshot& snap : rec.psnapshots) {
    SpectrumReport rep = spectrum(snapshot_effective_p(snap, rec));
    spec_csv += std::to_string(snap.t) + ',' + std::to_string(snap.layer) + ',' +
                snap.mode + ',' + std::to_string(rep.eigenvalues.size()) + ',' +
                format_double(rep.min_eigenvalue) + ',' +
                format_double(rep.max_eigenvalue) + ',' +
                format_double(rep.det_proxy) + ',' + format_double(rep.uniformity) +
                ',';
    for (std::size_t i = 0; i < rep.eigenvalues.size(); ++i) {
      if (i > 0) spec_csv += ';';
      spec_csv += format_double(rep.eigenvalues[i]);
    }
    spec_csv += '\n';
  }

  std::string angles_csv = "t,angle_degrees\n";
  for (const SeriesPoint& pt : rec.series) {
    if (std::isnan(pt.rot_angle)) continue;
    angles_csv += std::to_string(pt.t) + ',' + format_double(pt.rot_angle) + '\n';
  }

  std::string norms_csv = "t,layer,spec_norm,fro_norm,bound,violated\n";
  for (const NormTracePoint& tp : norm_trace(rec)) {
    norms_csv += std::to_string(tp.t) + ',' + std::to_string(tp.layer) + ',' +
                 format_double(tp.spec_norm) + ',' + format_double(tp.fro_norm) +
                 ',' + format_double(tp.bound) + ',' +
                 (tp.violated ? "true" : "false") + '\n';
  }

  auto write_file = [&](const char* name, const std::string& content) {
    const fs::path p = fs::path(out_dir) / name;
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("run_analyze: cannot open " + p.string());
    out << content;
  };
  write_file("spectrum.csv", spec_csv);
  write_file("angles.csv", angles_csv);
  write_file("norms.csv", norms_csv);
}

}  // namespace fop
