#pragma once

#include <cstdint>
#include <vector>

#include "fop/mat.hpp"
#include "fop/preconditioner.hpp"
#include "fop/rng.hpp"

namespace fop {

enum class OptKind { Sgd, Momentum, Adam, Shd, Pphd, Fop };

enum class FopBase { Sgd, Momentum };

struct OptimizerConfig {
  OptKind kind = OptKind::Sgd;
  double lr = 0.01;             // eps; 0 permitted (a no-progress run, not an error)
  double momentum_alpha = 0.9;  // in [0, 1)
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;
  double shd_rho = 0.0;   // hypergradient step on the per-layer scalar lr
  double pphd_rho = 0.0;  // hypergradient step on the per-parameter diagonal
  FopBase fop_base = FopBase::Sgd;
  PreconditionerConfig precond;
};

// Parameters are a list of layer-shaped matrices; vectors ride along as
// single-column matrices. All auxiliary buffers are shape-congruent.
struct OptimizerState {
  OptimizerConfig config;
  std::vector<Mat> theta;
  std::vector<Mat> velocity;
  std::vector<Mat> adam_m;
  std::vector<Mat> adam_v;
  std::vector<double> layer_lr;          // Shd
  std::vector<Mat> pphd_d;               // Pphd, init all-ones
  std::vector<Mat> prev_grad;            // Shd / Pphd cache
  bool has_prev = false;
  std::vector<Preconditioner> precond;   // Fop, indexed like theta
  std::vector<bool> preconditioned;      // Fop: which layers carry a P
  std::uint64_t t = 0;
};

// precondition_mask marks which layers get a preconditioner under Fop (empty
// mask means every layer). rng seeds LowRank M init.
OptimizerState make_optimizer_state(const OptimizerConfig& config,
                                    std::vector<Mat> theta0,
                                    const std::vector<bool>& precondition_mask,
                                    Rng& rng);

void sgd_step(OptimizerState& s, const std::vector<Mat>& grads);
void momentum_step(OptimizerState& s, const std::vector<Mat>& grads);
void adam_step(OptimizerState& s, const std::vector<Mat>& grads);
void shd_step(OptimizerState& s, const std::vector<Mat>& grads);
void pphd_step(OptimizerState& s, const std::vector<Mat>& grads);
void fop_step(OptimizerState& s, const std::vector<Mat>& grads);

// Dispatch on config.kind.
void optimizer_step(OptimizerState& s, const std::vector<Mat>& grads);

}  // namespace fop
