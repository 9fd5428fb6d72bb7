#include "fop/config.hpp"

#include <json.hpp>

#include "fop/error.hpp"

namespace fop {

using nlohmann::json;

namespace {

json optimizer_to_json(const OptimizerConfig& o) {
  json j;
  j["kind"] = optimizer_kind_name(o.kind);
  j["lr"] = o.lr;
  j["alpha"] = o.momentum_alpha;
  j["beta1"] = o.beta1;
  j["beta2"] = o.beta2;
  j["eps_adam"] = o.eps_adam;
  j["shd_rho"] = o.shd_rho;
  j["pphd_rho"] = o.pphd_rho;
  j["fop_base"] = o.fop_base == FopBase::Momentum ? "momentum" : "sgd";
  json p;
  p["mode"] = precond_mode_name(o.precond.mode);
  p["rank"] = o.precond.rank;
  p["init_sigma"] = o.precond.init_sigma;
  p["hyper_lr"] = o.precond.hyper_lr;
  p["hyper_optimizer"] =
      o.precond.hyper_optimizer == HyperOpt::Adam ? "adam" : "plain_sgd";
  p["beta1"] = o.precond.beta1;
  p["beta2"] = o.precond.beta2;
  p["eps_adam"] = o.precond.eps_adam;
  p["p_inf"] = o.precond.p_inf;
  p["delta"] = "1/t^2";
  j["precond"] = p;
  return j;
}

OptKind kind_from_name(const std::string& s) {
  if (s == "sgd") return OptKind::Sgd;
  if (s == "momentum") return OptKind::Momentum;
  if (s == "adam") return OptKind::Adam;
  if (s == "shd") return OptKind::Shd;
  if (s == "pphd") return OptKind::Pphd;
  if (s == "fop") return OptKind::Fop;
  throw ConfigError("config: unknown optimizer kind '" + s + "'");
}

PrecondMode mode_from_name(const std::string& s) {
  if (s == "full") return PrecondMode::Full;
  if (s == "lowrank") return PrecondMode::LowRank;
  if (s == "normalized") return PrecondMode::Normalized;
  if (s == "stabilized") return PrecondMode::Stabilized;
  throw ConfigError("config: unknown preconditioner mode '" + s + "'");
}

OptimizerConfig optimizer_from_json(const json& j) {
  OptimizerConfig o;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k == "kind") o.kind = kind_from_name(it.value().get<std::string>());
    else if (k == "lr") o.lr = it.value().get<double>();
    else if (k == "alpha") o.momentum_alpha = it.value().get<double>();
    else if (k == "beta1") o.beta1 = it.value().get<double>();
    else if (k == "beta2") o.beta2 = it.value().get<double>();
    else if (k == "eps_adam") o.eps_adam = it.value().get<double>();
    else if (k == "shd_rho") o.shd_rho = it.value().get<double>();
    else if (k == "pphd_rho") o.pphd_rho = it.value().get<double>();
    else if (k == "fop_base") {
      const std::string b = it.value().get<std::string>();
      if (b == "momentum") o.fop_base = FopBase::Momentum;
      else if (b == "sgd") o.fop_base = FopBase::Sgd;
      else throw ConfigError("config: unknown fop base '" + b + "'");
    } else if (k == "precond") {
      const json& p = it.value();
      for (auto pit = p.begin(); pit != p.end(); ++pit) {
        const std::string& pk = pit.key();
        if (pk == "mode") o.precond.mode = mode_from_name(pit.value().get<std::string>());
        else if (pk == "rank") o.precond.rank = pit.value().get<std::size_t>();
        else if (pk == "init_sigma") o.precond.init_sigma = pit.value().get<double>();
        else if (pk == "hyper_lr") o.precond.hyper_lr = pit.value().get<double>();
        else if (pk == "hyper_optimizer") {
          const std::string h = pit.value().get<std::string>();
          if (h == "adam") o.precond.hyper_optimizer = HyperOpt::Adam;
          else if (h == "plain_sgd") o.precond.hyper_optimizer = HyperOpt::PlainSGD;
          else throw ConfigError("config: unknown hyper optimizer '" + h + "'");
        } else if (pk == "beta1") o.precond.beta1 = pit.value().get<double>();
        else if (pk == "beta2") o.precond.beta2 = pit.value().get<double>();
        else if (pk == "eps_adam") o.precond.eps_adam = pit.value().get<double>();
        else if (pk == "p_inf") o.precond.p_inf = pit.value().get<double>();
        else if (pk == "delta") {
          if (pit.value().get<std::string>() != "1/t^2") {
            throw ConfigError("config: only the 1/t^2 delta schedule is serializable");
          }
        } else {
          throw ConfigError("config: unknown precond key '" + pk + "'");
        }
      }
    } else {
      throw ConfigError("config: unknown optimizer key '" + k + "'");
    }
  }
  return o;
}

}  // namespace

std::string optimizer_kind_name(OptKind k) {
  switch (k) {
    case OptKind::Sgd: return "sgd";
    case OptKind::Momentum: return "momentum";
    case OptKind::Adam: return "adam";
    case OptKind::Shd: return "shd";
    case OptKind::Pphd: return "pphd";
    case OptKind::Fop: return "fop";
  }
  throw ConfigError("config: unknown optimizer kind");
}

std::string precond_mode_name(PrecondMode m) {
  switch (m) {
    case PrecondMode::Full: return "full";
    case PrecondMode::LowRank: return "lowrank";
    case PrecondMode::Normalized: return "normalized";
    case PrecondMode::Stabilized: return "stabilized";
  }
  throw ConfigError("config: unknown preconditioner mode");
}

const Vec& tuning_grid() {
  static const Vec grid = {1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1, 1.0};
  return grid;
}

std::string to_canonical_json(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["objective"] = c.objective;
  j["dataset"] = c.dataset;
  j["optimizer"] = optimizer_to_json(c.optimizer);
  j["seed"] = c.seed;
  j["snapshot_every"] = c.snapshot_every;
  j["init"] = c.init;
  j["max_iters"] = c.max_iters;
  j["tol"] = c.tol;
  j["tune_lr"] = c.tune_lr;
  json bench = json::array();
  for (const OptimizerConfig& o : c.bench_optimizers) bench.push_back(optimizer_to_json(o));
  j["bench"] = bench;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["hidden"] = c.hidden;
  j["eval_every"] = c.eval_every;
  j["train_n"] = c.train_n;
  j["test_n"] = c.test_n;
  j["sweep_lrs"] = c.sweep_lrs;
  j["sweep_hyper"] = c.sweep_hyper;
  j["sweep_seeds"] = c.sweep_seeds;
  return j.dump();
}

RunConfig run_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  RunConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k == "command") c.command = it.value().get<std::string>();
    else if (k == "objective") c.objective = it.value().get<std::string>();
    else if (k == "dataset") c.dataset = it.value().get<std::string>();
    else if (k == "optimizer") c.optimizer = optimizer_from_json(it.value());
    else if (k == "seed") c.seed = it.value().get<std::uint64_t>();
    else if (k == "snapshot_every") c.snapshot_every = it.value().get<std::uint64_t>();
    else if (k == "init") c.init = it.value().get<Vec>();
    else if (k == "max_iters") c.max_iters = it.value().get<std::uint64_t>();
    else if (k == "tol") c.tol = it.value().get<double>();
    else if (k == "tune_lr") c.tune_lr = it.value().get<bool>();
    else if (k == "bench") {
      c.bench_optimizers.clear();
      for (const json& o : it.value()) c.bench_optimizers.push_back(optimizer_from_json(o));
    }
    else if (k == "epochs") c.epochs = it.value().get<std::size_t>();
    else if (k == "batch_size") c.batch_size = it.value().get<std::size_t>();
    else if (k == "hidden") c.hidden = it.value().get<std::vector<std::size_t>>();
    else if (k == "eval_every") c.eval_every = it.value().get<std::uint64_t>();
    else if (k == "train_n") c.train_n = it.value().get<std::size_t>();
    else if (k == "test_n") c.test_n = it.value().get<std::size_t>();
    else if (k == "sweep_lrs") c.sweep_lrs = it.value().get<Vec>();
    else if (k == "sweep_hyper") c.sweep_hyper = it.value().get<Vec>();
    else if (k == "sweep_seeds") c.sweep_seeds = it.value().get<std::vector<std::uint64_t>>();
    else throw ConfigError("config: unknown key '" + k + "'");
  }
  if (c.command != "toy" && c.command != "bench" && c.command != "train" &&
      c.command != "sweep" && c.command != "analyze") {
    throw ConfigError("config: unknown command '" + c.command + "'");
  }
  return c;
}

}  // namespace fop
