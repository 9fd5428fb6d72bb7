#include "fop/preconditioner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fop/eigen.hpp"
#include "fop/error.hpp"

namespace fop {

namespace {

void refresh_cache(const Preconditioner& p) {
  if (p.cache_valid) return;
  p.cached_p = matmul_nt(p.M, p.M);
  p.cached_fro = frobenius_norm(p.cached_p);
  p.cached_spec = spectral_norm_psd(p.cached_p);
  p.cache_valid = true;
}

}  // namespace

double default_delta(std::uint64_t t) {
  const double td = static_cast<double>(t);
  return 1.0 / (td * td);
}

Preconditioner make_preconditioner(const PreconditionerConfig& config, std::size_t n,
                                   Rng& rng) {
  if (config.hyper_lr < 0.0) throw ConfigError("preconditioner: hyper_lr must be >= 0");
  if (config.init_sigma < 0.0) {
    throw ConfigError("preconditioner: init_sigma must be >= 0");
  }
  if (config.mode == PrecondMode::Stabilized && !(config.p_inf > 0.0)) {
    throw ConfigError("preconditioner: p_inf must be > 0 in Stabilized mode");
  }
  Preconditioner p;
  p.config = config;
  if (config.mode == PrecondMode::LowRank) {
    // k > n adds nothing to P = I + MM^T; clip so "huge k" means full rank.
    p.M = gaussian_mat(n, std::min(config.rank, n), config.init_sigma, rng);
  } else {
    p.M = Mat::identity(n);
  }
  if (config.hyper_optimizer == HyperOpt::Adam) {
    p.hyper_m = Mat(p.M.rows(), p.M.cols());
    p.hyper_v = Mat(p.M.rows(), p.M.cols());
  }
  return p;
}

Mat apply(const Preconditioner& p, const Mat& g) {
  if (g.rows() != p.M.rows()) {
    throw ContractViolation("apply: gradient has " + std::to_string(g.rows()) +
                            " rows, preconditioner expects " +
                            std::to_string(p.M.rows()));
  }
  switch (p.config.mode) {
    case PrecondMode::Full:
      return matmul(p.M, matmul_tn(p.M, g));
    case PrecondMode::LowRank: {
      Mat out = g;
      if (p.M.cols() > 0) {
        Mat mm = matmul(p.M, matmul_tn(p.M, g));
        axpy(1.0, mm, out);
      }
      return out;
    }
    case PrecondMode::Normalized: {
      refresh_cache(p);
      if (p.cached_fro < 1e-300) {
        throw ContractViolation("apply: degenerate M in Normalized mode");
      }
      const double scale = std::sqrt(static_cast<double>(p.M.rows())) / p.cached_fro;
      return scale * matmul(p.cached_p, g);
    }
    case PrecondMode::Stabilized: {
      refresh_cache(p);
      if (p.cached_spec < 1e-300) {
        throw ContractViolation("apply: degenerate M in Stabilized mode");
      }
      const std::uint64_t t = p.step_t == 0 ? 1 : p.step_t;
      const double gamma =
          stabilized_gamma(t, p.cached_spec, p.config.p_inf,
                           p.config.delta ? p.config.delta
                                          : std::function<double(std::uint64_t)>(
                                                default_delta));
      return (gamma / p.cached_spec) * matmul(p.cached_p, g);
    }
  }
  throw ContractViolation("apply: unknown mode");
}

Mat hypergradient(const Preconditioner& p, const Mat& g_t, const Mat& g_prev,
                  double eps) {
  if (!g_t.same_shape(g_prev)) {
    throw ContractViolation("hypergradient: g_t and g_prev shapes differ");
  }
  if (g_t.rows() != p.M.rows()) {
    throw ContractViolation("hypergradient: gradient rows do not match M");
  }
  // (g_t g_prev^T + g_prev g_t^T) M, associated as outer-factor-first so the
  // cost is O(n c k) instead of O(n^2 k).
  Mat a = matmul(g_t, matmul_tn(g_prev, p.M));
  Mat b = matmul(g_prev, matmul_tn(g_t, p.M));
  Mat out = a + b;
  for (double& v : out.values()) v *= -eps;
  return out;
}

void update_m(Preconditioner& p, const Mat& grad_m) {
  if (!grad_m.same_shape(p.M)) {
    throw ContractViolation("update_m: grad shape does not match M");
  }
  const double rho = p.config.hyper_lr;
  if (p.config.hyper_optimizer == HyperOpt::PlainSGD) {
    axpy(-rho, grad_m, p.M);
  } else {
    p.hyper_t += 1;
    const double b1 = p.config.beta1;
    const double b2 = p.config.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(p.hyper_t));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(p.hyper_t));
    for (std::size_t i = 0; i < p.M.size(); ++i) {
      const double g = grad_m.values()[i];
      double& m = p.hyper_m.values()[i];
      double& v = p.hyper_v.values()[i];
      m = b1 * m + (1.0 - b1) * g;
      v = b2 * v + (1.0 - b2) * g * g;
      const double mhat = m / bc1;
      const double vhat = v / bc2;
      p.M.values()[i] -= rho * mhat / (std::sqrt(vhat) + p.config.eps_adam);
    }
  }
  p.invalidate_cache();
}

double stabilized_gamma(std::uint64_t t, double p_norm, double p_inf,
                        const std::function<double(std::uint64_t)>& delta) {
  const double d = delta ? delta(t) : default_delta(t);
  return d * p_norm + (1.0 - d) * p_inf;
}

Mat effective_p(const Preconditioner& p) {
  switch (p.config.mode) {
    case PrecondMode::Full:
      return matmul_nt(p.M, p.M);
    case PrecondMode::LowRank: {
      Mat out = Mat::identity(p.M.rows());
      if (p.M.cols() > 0) axpy(1.0, matmul_nt(p.M, p.M), out);
      return out;
    }
    case PrecondMode::Normalized: {
      refresh_cache(p);
      if (p.cached_fro < 1e-300) {
        throw ContractViolation("effective_p: degenerate M in Normalized mode");
      }
      return (std::sqrt(static_cast<double>(p.M.rows())) / p.cached_fro) * p.cached_p;
    }
    case PrecondMode::Stabilized: {
      refresh_cache(p);
      if (p.cached_spec < 1e-300) {
        throw ContractViolation("effective_p: degenerate M in Stabilized mode");
      }
      const std::uint64_t t = p.step_t == 0 ? 1 : p.step_t;
      const double gamma = stabilized_gamma(
          t, p.cached_spec, p.config.p_inf,
          p.config.delta ? p.config.delta
                         : std::function<double(std::uint64_t)>(default_delta));
      return (gamma / p.cached_spec) * p.cached_p;
    }
  }
  throw ContractViolation("effective_p: unknown mode");
}

}  // namespace fop
