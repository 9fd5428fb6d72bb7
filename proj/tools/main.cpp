#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fop/error.hpp"
#include "fop/harness.hpp"

namespace {

fop::RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fop::ConfigError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return fop::run_config_from_json(buf.str());
}

fop::OptimizerConfig named_optimizer(const std::string& name) {
  fop::OptimizerConfig o;
  if (name == "sgd") {
    o.kind = fop::OptKind::Sgd;
  } else if (name == "momentum") {
    o.kind = fop::OptKind::Momentum;
  } else if (name == "adam") {
    o.kind = fop::OptKind::Adam;
  } else if (name == "shd") {
    o.kind = fop::OptKind::Shd;
    o.shd_rho = 1e-3;
  } else if (name == "pphd") {
    o.kind = fop::OptKind::Pphd;
    o.pphd_rho = 1e-2;
  } else if (name == "fop") {
    o.kind = fop::OptKind::Fop;
    o.precond.mode = fop::PrecondMode::Full;
    o.precond.hyper_lr = 3e-5;
  } else {
    throw fop::ConfigError("unknown optimizer '" + name + "'");
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learned-preconditioner optimizer workbench"};
  app.require_subcommand(1);

  std::string config_path, out_path, objective, optimizer_name, run_path;
  std::uint64_t seed = 0;
  bool seed_set = false, tune = false;
  int jobs = 0;
  std::int64_t snapshot_every = -1;
  double lr = -1.0;
  double hyper_lr = -1.0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration");
    cmd->add_option("--seed", seed, "RNG seed")->each([&](const std::string&) {
      seed_set = true;
    });
    cmd->add_option("--out", out_path, "output path");
    cmd->add_option("--jobs", jobs, "max parallel runs");
    cmd->add_option("--snapshot-every", snapshot_every,
                    "record P every N iterations (0 = never)");
  };

  CLI::App* toy = app.add_subcommand("toy", "gradient descent on a 2-D objective");
  add_common(toy);
  toy->add_option("--objective", objective, "booth | himmelblau | rosenbrock");
  toy->add_option("--optimizer", optimizer_name,
                  "sgd | momentum | adam | shd | pphd | fop");
  toy->add_option("--lr", lr, "learning rate");
  toy->add_option("--hyper-lr", hyper_lr, "hypergradient learning rate");

  CLI::App* bench = app.add_subcommand("bench", "compare optimizers on one objective");
  add_common(bench);
  bench->add_option("--objective", objective, "booth | himmelblau | rosenbrock");
  bench->add_flag("--tune-lr", tune, "pick each optimizer's lr from the grid");

  CLI::App* train = app.add_subcommand("train", "train the MLP");
  add_common(train);
  train->add_option("--optimizer", optimizer_name,
                    "sgd | momentum | adam | shd | pphd | fop");
  train->add_option("--lr", lr, "learning rate");
  train->add_option("--hyper-lr", hyper_lr, "hypergradient learning rate");

  CLI::App* sweep = app.add_subcommand("sweep", "lr x hyper x seed grid");
  add_common(sweep);

  CLI::App* analyze = app.add_subcommand("analyze", "emit CSV diagnostics for a run");
  analyze->add_option("run", run_path, "run artifact to analyze")->required();
  analyze->add_option("--out", out_path, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    fop::RunConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    if (seed_set) cfg.seed = seed;
    if (!out_path.empty()) cfg.out_path = out_path;
    if (jobs > 0) cfg.jobs = jobs;
    if (snapshot_every >= 0) {
      cfg.snapshot_every = static_cast<std::uint64_t>(snapshot_every);
    }
    if (!objective.empty()) cfg.objective = objective;
    if (!optimizer_name.empty()) cfg.optimizer = named_optimizer(optimizer_name);
    if (lr >= 0.0) cfg.optimizer.lr = lr;
    if (hyper_lr >= 0.0) {
      cfg.optimizer.precond.hyper_lr = hyper_lr;
      cfg.optimizer.shd_rho = hyper_lr;
      cfg.optimizer.pphd_rho = hyper_lr;
    }
    if (tune) cfg.tune_lr = true;

    if (app.got_subcommand(toy)) {
      cfg.command = "toy";
      fop::RunRecord rec = fop::run_toy(cfg);
      std::printf("%s: %s after %llu iterations, final loss %.6g, |grad| %.6g\n",
                  cfg.objective.c_str(), rec.summary.exit_reason.c_str(),
                  static_cast<unsigned long long>(rec.summary.iterations),
                  rec.summary.final_loss, rec.summary.final_grad_norm);
      return fop::exit_code(fop::status_from_reason(rec.summary.exit_reason));
    }
    if (app.got_subcommand(bench)) {
      cfg.command = "bench";
      if (cfg.bench_optimizers.empty()) {
        cfg.bench_optimizers = {named_optimizer("fop"), named_optimizer("sgd"),
                                named_optimizer("adam")};
      }
      std::vector<fop::BenchRow> rows = fop::run_bench(cfg);
      std::fputs(fop::bench_csv(rows).c_str(), stdout);
      return 0;
    }
    if (app.got_subcommand(train)) {
      cfg.command = "train";
      fop::RunRecord rec = fop::run_train(cfg);
      std::printf("train: %s after %llu iterations, final loss %.6g, "
                  "test accuracy %.4f\n",
                  rec.summary.exit_reason.c_str(),
                  static_cast<unsigned long long>(rec.summary.iterations),
                  rec.summary.final_loss, rec.summary.final_accuracy);
      return fop::exit_code(fop::status_from_reason(rec.summary.exit_reason));
    }
    if (app.got_subcommand(sweep)) {
      cfg.command = "sweep";
      fop::SweepResult result = fop::run_sweep(cfg);
      std::fputs(fop::sweep_csv(result).c_str(), stdout);
      return 0;
    }
    if (app.got_subcommand(analyze)) {
      const std::string dir = out_path.empty() ? run_path + ".analysis" : out_path;
      fop::run_analyze(run_path, dir);
      std::printf("wrote spectrum.csv, angles.csv, norms.csv to %s\n", dir.c_str());
      return 0;
    }
  } catch (const fop::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 4;
  } catch (const fop::FormatError& e) {
    std::fprintf(stderr, "format error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 4;
}
