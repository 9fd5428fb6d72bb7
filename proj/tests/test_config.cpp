#include "fop/config.hpp"

#include <gtest/gtest.h>

#include <string>

#include "fop/error.hpp"

namespace fop {
namespace {

RunConfig sample_config() {
  RunConfig c;
  c.command = "train";
  c.objective = "mlp";
  c.dataset = "synthetic";
  c.optimizer.kind = OptKind::Fop;
  c.optimizer.lr = 0.03;
  c.optimizer.fop_base = FopBase::Momentum;
  c.optimizer.momentum_alpha = 0.85;
  c.optimizer.precond.mode = PrecondMode::LowRank;
  c.optimizer.precond.rank = 8;
  c.optimizer.precond.hyper_lr = 1e-4;
  c.optimizer.precond.hyper_optimizer = HyperOpt::Adam;
  c.seed = 17;
  c.snapshot_every = 50;
  c.epochs = 3;
  c.batch_size = 64;
  c.hidden = {32, 16};
  c.eval_every = 10;
  c.train_n = 500;
  c.test_n = 100;
  c.sweep_lrs = {0.01, 0.1};
  c.sweep_hyper = {1e-4, 1e-3};
  c.sweep_seeds = {0, 1, 2};
  return c;
}

TEST(Config, JsonRoundTripPreservesFields) {
  RunConfig c = sample_config();
  RunConfig b = run_config_from_json(to_canonical_json(c));
  EXPECT_EQ(b.command, "train");
  EXPECT_EQ(b.objective, "mlp");
  EXPECT_EQ(b.dataset, "synthetic");
  EXPECT_EQ(b.optimizer.kind, OptKind::Fop);
  EXPECT_EQ(b.optimizer.lr, 0.03);
  EXPECT_EQ(b.optimizer.fop_base, FopBase::Momentum);
  EXPECT_EQ(b.optimizer.momentum_alpha, 0.85);
  EXPECT_EQ(b.optimizer.precond.mode, PrecondMode::LowRank);
  EXPECT_EQ(b.optimizer.precond.rank, 8u);
  EXPECT_EQ(b.optimizer.precond.hyper_lr, 1e-4);
  EXPECT_EQ(b.optimizer.precond.hyper_optimizer, HyperOpt::Adam);
  EXPECT_EQ(b.seed, 17u);
  EXPECT_EQ(b.snapshot_every, 50u);
  EXPECT_EQ(b.epochs, 3u);
  EXPECT_EQ(b.batch_size, 64u);
  EXPECT_EQ(b.hidden, (std::vector<std::size_t>{32, 16}));
  EXPECT_EQ(b.eval_every, 10u);
  EXPECT_EQ(b.train_n, 500u);
  EXPECT_EQ(b.test_n, 100u);
  EXPECT_EQ(b.sweep_lrs, (Vec{0.01, 0.1}));
  EXPECT_EQ(b.sweep_hyper, (Vec{1e-4, 1e-3}));
  EXPECT_EQ(b.sweep_seeds, (std::vector<std::uint64_t>{0, 1, 2}));

  // Canonical form is a fixpoint: re-serializing the parse is identical.
  EXPECT_EQ(to_canonical_json(b), to_canonical_json(c));
}

TEST(Config, CanonicalEchoExcludesDeliveryFields) {
  RunConfig a = sample_config();
  RunConfig b = sample_config();
  b.out_path = "/somewhere/else.run";
  b.jobs = 16;
  EXPECT_EQ(to_canonical_json(a), to_canonical_json(b));
  const std::string j = to_canonical_json(a);
  EXPECT_EQ(j.find("out_path"), std::string::npos);
  EXPECT_EQ(j.find("jobs"), std::string::npos);
  EXPECT_EQ(j.find('\n'), std::string::npos);  // single line
}

TEST(Config, KeysAreSorted) {
  const std::string j = to_canonical_json(sample_config());
  // nlohmann objects iterate sorted; spot-check relative order.
  EXPECT_LT(j.find("\"batch_size\""), j.find("\"command\""));
  EXPECT_LT(j.find("\"command\""), j.find("\"dataset\""));
  EXPECT_LT(j.find("\"epochs\""), j.find("\"objective\""));
}

TEST(Config, RejectsUnknownAndMalformed) {
  EXPECT_THROW(run_config_from_json("not json"), ConfigError);
  EXPECT_THROW(run_config_from_json("[1,2]"), ConfigError);
  EXPECT_THROW(run_config_from_json(R"({"bogus_key":1})"), ConfigError);
  EXPECT_THROW(run_config_from_json(R"({"command":"fly"})"), ConfigError);
  EXPECT_THROW(run_config_from_json(R"({"optimizer":{"kind":"warp"}})"), ConfigError);
  EXPECT_THROW(run_config_from_json(R"({"optimizer":{"nope":1}})"), ConfigError);
  EXPECT_THROW(
      run_config_from_json(R"({"optimizer":{"precond":{"mode":"banana"}}})"),
      ConfigError);
  EXPECT_THROW(
      run_config_from_json(R"({"optimizer":{"precond":{"delta":"exp"}}})"),
      ConfigError);
  EXPECT_THROW(run_config_from_json(R"({"optimizer":{"fop_base":"adam"}})"),
               ConfigError);
}

TEST(Config, DefaultsSurviveEmptyObject) {
  RunConfig c = run_config_from_json("{}");
  EXPECT_EQ(c.command, "toy");
  EXPECT_EQ(c.objective, "booth");
  EXPECT_EQ(c.max_iters, 50000u);
  EXPECT_EQ(c.tol, 1e-6);
  EXPECT_EQ(c.optimizer.kind, OptKind::Sgd);
}

TEST(Config, NamesRoundTrip) {
  EXPECT_EQ(optimizer_kind_name(OptKind::Sgd), "sgd");
  EXPECT_EQ(optimizer_kind_name(OptKind::Momentum), "momentum");
  EXPECT_EQ(optimizer_kind_name(OptKind::Adam), "adam");
  EXPECT_EQ(optimizer_kind_name(OptKind::Shd), "shd");
  EXPECT_EQ(optimizer_kind_name(OptKind::Pphd), "pphd");
  EXPECT_EQ(optimizer_kind_name(OptKind::Fop), "fop");
  EXPECT_EQ(precond_mode_name(PrecondMode::Full), "full");
  EXPECT_EQ(precond_mode_name(PrecondMode::LowRank), "lowrank");
  EXPECT_EQ(precond_mode_name(PrecondMode::Normalized), "normalized");
  EXPECT_EQ(precond_mode_name(PrecondMode::Stabilized), "stabilized");
}

TEST(Config, TuningGridIsTheDocumentedSeven) {
  const Vec& g = tuning_grid();
  ASSERT_EQ(g.size(), 7u);
  EXPECT_EQ(g[0], 1e-3);
  EXPECT_EQ(g[1], 3e-3);
  EXPECT_EQ(g[2], 1e-2);
  EXPECT_EQ(g[3], 3e-2);
  EXPECT_EQ(g[4], 1e-1);
  EXPECT_EQ(g[5], 3e-1);
  EXPECT_EQ(g[6], 1.0);
}

}  // namespace
}  // namespace fop
