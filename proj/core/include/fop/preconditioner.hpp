#pragma once

#include <cstdint>
#include <functional>

#include "fop/mat.hpp"
#include "fop/rng.hpp"

namespace fop {

enum class PrecondMode { Full, LowRank, Normalized, Stabilized };

enum class HyperOpt { PlainSGD, Adam };

struct PreconditionerConfig {
  PrecondMode mode = PrecondMode::Full;
  std::size_t rank = 0;        // LowRank only
  double init_sigma = 0.01;    // LowRank entry stddev
  double hyper_lr = 0.0;       // rho
  HyperOpt hyper_optimizer = HyperOpt::PlainSGD;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;
  double p_inf = 1.0;          // Stabilized only; must be > 0
  // Stabilized relaxation schedule; empty means the default 1/t^2.
  std::function<double(std::uint64_t)> delta;
};

// The effective preconditioner P is MM^T (Full, Stabilized, Normalized up to
// rescaling) or I + MM^T (LowRank), so it is symmetric PSD by construction.
struct Preconditioner {
  Mat M;                       // n x n, or n x rank for LowRank
  PreconditionerConfig config;

  Mat hyper_m;                 // Adam-on-M first moment
  Mat hyper_v;                 // Adam-on-M second moment
  std::uint64_t hyper_t = 0;

  bool has_prev_grad = false;
  Mat prev_grad;

  std::uint64_t step_t = 0;    // iterations taken; Stabilized gamma uses max(1, step_t)

  // P = MM^T plus norms, recomputed lazily after each M change.
  mutable bool cache_valid = false;
  mutable Mat cached_p;
  mutable double cached_fro = 0.0;
  mutable double cached_spec = 0.0;

  void invalidate_cache() { cache_valid = false; }
};

double default_delta(std::uint64_t t);

// n is the preconditioned (row) dimension of the layer gradient.
Preconditioner make_preconditioner(const PreconditionerConfig& config, std::size_t n,
                                   Rng& rng);

// Preconditioned gradient. G must have n rows.
//   Full:        M(M^T G)
//   LowRank:     G + M(M^T G)
//   Normalized:  sqrt(n) * (MM^T G) / ||MM^T||_F
//   Stabilized:  (gamma(t) / ||MM^T||_2) * MM^T G,
//                gamma(t) = delta(t) ||P(t)||_2 + (1 - delta(t)) p_inf
Mat apply(const Preconditioner& p, const Mat& g);

// d J / d M = -eps (g_t g_prev^T + g_prev g_t^T) M, with the current M.
// For LowRank the same formula applies to the n x k factor.
Mat hypergradient(const Preconditioner& p, const Mat& g_t, const Mat& g_prev,
                  double eps);

// PlainSGD: M <- M - rho * grad_m. Adam: standard bias-corrected step on the
// entries of M with step size rho.
void update_m(Preconditioner& p, const Mat& grad_m);

double stabilized_gamma(std::uint64_t t, double p_norm, double p_inf,
                        const std::function<double(std::uint64_t)>& delta);

// The dense effective P for diagnostics (spectra, PSD checks, angles).
Mat effective_p(const Preconditioner& p);

}  // namespace fop
