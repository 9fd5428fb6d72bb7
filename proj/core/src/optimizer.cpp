#include "fop/optimizer.hpp"

#include <cmath>
#include <string>

#include "fop/error.hpp"

namespace fop {

namespace {

void validate(const OptimizerConfig& c) {
  if (c.lr < 0.0) throw ConfigError("optimizer: lr must be >= 0");
  if (c.momentum_alpha < 0.0 || c.momentum_alpha >= 1.0) {
    throw ConfigError("optimizer: momentum_alpha must be in [0, 1)");
  }
  if (c.beta1 < 0.0 || c.beta1 >= 1.0 || c.beta2 < 0.0 || c.beta2 >= 1.0) {
    throw ConfigError("optimizer: adam betas must be in [0, 1)");
  }
}

void check_grads(const OptimizerState& s, const std::vector<Mat>& grads) {
  if (grads.size() != s.theta.size()) {
    throw ContractViolation("step: got " + std::to_string(grads.size()) +
                            " gradients for " + std::to_string(s.theta.size()) +
                            " layers");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!grads[i].same_shape(s.theta[i])) {
      throw ContractViolation("step: gradient shape mismatch at layer " +
                              std::to_string(i));
    }
  }
}

std::vector<Mat> zeros_like(const std::vector<Mat>& t) {
  std::vector<Mat> z;
  z.reserve(t.size());
  for (const Mat& m : t) z.emplace_back(m.rows(), m.cols());
  return z;
}

}  // namespace

OptimizerState make_optimizer_state(const OptimizerConfig& config,
                                    std::vector<Mat> theta0,
                                    const std::vector<bool>& precondition_mask,
                                    Rng& rng) {
  validate(config);
  OptimizerState s;
  s.config = config;
  s.theta = std::move(theta0);
  switch (config.kind) {
    case OptKind::Sgd:
      break;
    case OptKind::Momentum:
      s.velocity = zeros_like(s.theta);
      break;
    case OptKind::Adam:
      s.adam_m = zeros_like(s.theta);
      s.adam_v = zeros_like(s.theta);
      break;
    case OptKind::Shd:
      s.layer_lr.assign(s.theta.size(), config.lr);
      s.prev_grad = zeros_like(s.theta);
      break;
    case OptKind::Pphd:
      s.pphd_d.reserve(s.theta.size());
      for (const Mat& m : s.theta) {
        Mat d(m.rows(), m.cols());
        for (double& v : d.values()) v = 1.0;
        s.pphd_d.push_back(std::move(d));
      }
      s.prev_grad = zeros_like(s.theta);
      break;
    case OptKind::Fop: {
      if (config.fop_base == FopBase::Momentum) s.velocity = zeros_like(s.theta);
      if (!precondition_mask.empty() && precondition_mask.size() != s.theta.size()) {
        throw ConfigError("optimizer: precondition mask length mismatch");
      }
      s.preconditioned.resize(s.theta.size());
      s.precond.reserve(s.theta.size());
      for (std::size_t i = 0; i < s.theta.size(); ++i) {
        const bool on = precondition_mask.empty() || precondition_mask[i];
        s.preconditioned[i] = on;
        if (on) {
          s.precond.push_back(
              make_preconditioner(config.precond, s.theta[i].rows(), rng));
        } else {
          s.precond.emplace_back();
        }
      }
      break;
    }
  }
  return s;
}

void sgd_step(OptimizerState& s, const std::vector<Mat>& grads) {
  check_grads(s, grads);
  s.t += 1;
  for (std::size_t i = 0; i < s.theta.size(); ++i) {
    axpy(-s.config.lr, grads[i], s.theta[i]);
  }
}

void momentum_step(OptimizerState& s, const std::vector<Mat>& grads) {
  check_grads(s, grads);
  s.t += 1;
  const double a = s.config.momentum_alpha;
  for (std::size_t i = 0; i < s.theta.size(); ++i) {
    Mat& v = s.velocity[i];
    for (std::size_t j = 0; j < v.size(); ++j) {
      v.values()[j] = a * v.values()[j] + grads[i].values()[j];
    }
    axpy(-s.config.lr, v, s.theta[i]);
  }
}

void adam_step(OptimizerState& s, const std::vector<Mat>& grads) {
  check_grads(s, grads);
  s.t += 1;
  const double b1 = s.config.beta1, b2 = s.config.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(s.t));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(s.t));
  for (std::size_t i = 0; i < s.theta.size(); ++i) {
    Mat& m = s.adam_m[i];
    Mat& v = s.adam_v[i];
    for (std::size_t j = 0; j < m.size(); ++j) {
      const double g = grads[i].values()[j];
      m.values()[j] = b1 * m.values()[j] + (1.0 - b1) * g;
      v.values()[j] = b2 * v.values()[j] + (1.0 - b2) * g * g;
      const double mhat = m.values()[j] / bc1;
      const double vhat = v.values()[j] / bc2;
      s.theta[i].values()[j] -= s.config.lr * mhat / (std::sqrt(vhat) + s.config.eps_adam);
    }
  }
}

void shd_step(OptimizerState& s, const std::vector<Mat>& grads) {
  check_grads(s, grads);
  s.t += 1;
  for (std::size_t i = 0; i < s.theta.size(); ++i) {
    if (s.has_prev) {
      s.layer_lr[i] += s.config.shd_rho * dot(grads[i], s.prev_grad[i]);
    }
    axpy(-s.layer_lr[i], grads[i], s.theta[i]);
    s.prev_grad[i] = grads[i];
  }
  s.has_prev = true;
}

void pphd_step(OptimizerState& s, const std::vector<Mat>& grads) {
  check_grads(s, grads);
  s.t += 1;
  for (std::size_t i = 0; i < s.theta.size(); ++i) {
    Mat& d = s.pphd_d[i];
    if (s.has_prev) {
      for (std::size_t j = 0; j < d.size(); ++j) {
        d.values()[j] += s.config.pphd_rho * grads[i].values()[j] *
                         s.prev_grad[i].values()[j];
      }
    }
    for (std::size_t j = 0; j < d.size(); ++j) {
      s.theta[i].values()[j] -= s.config.lr * d.values()[j] * grads[i].values()[j];
    }
    s.prev_grad[i] = grads[i];
  }
  s.has_prev = true;
}

void fop_step(OptimizerState& s, const std::vector<Mat>& grads) {
  check_grads(s, grads);
  s.t += 1;
  const double eps = s.config.lr;
  const double a = s.config.momentum_alpha;
  for (std::size_t i = 0; i < s.theta.size(); ++i) {
    const Mat& g = grads[i];
    if (!s.preconditioned[i]) {
      if (s.config.fop_base == FopBase::Momentum) {
        Mat& v = s.velocity[i];
        for (std::size_t j = 0; j < v.size(); ++j) {
          v.values()[j] = a * v.values()[j] + g.values()[j];
        }
        axpy(-eps, v, s.theta[i]);
      } else {
        axpy(-eps, g, s.theta[i]);
      }
      continue;
    }
    Preconditioner& p = s.precond[i];
    p.step_t += 1;
    Mat gt = apply(p, g);
    if (s.config.fop_base == FopBase::Momentum) {
      Mat& v = s.velocity[i];
      for (std::size_t j = 0; j < v.size(); ++j) {
        v.values()[j] = a * v.values()[j] + gt.values()[j];
      }
      axpy(-eps, v, s.theta[i]);
    } else {
      axpy(-eps, gt, s.theta[i]);
    }
    // Raw gradients drive the M update; the first step only seeds the cache.
    if (p.has_prev_grad) {
      Mat grad_m = hypergradient(p, g, p.prev_grad, eps);
      update_m(p, grad_m);
    }
    p.prev_grad = g;
    p.has_prev_grad = true;
  }
}

void optimizer_step(OptimizerState& s, const std::vector<Mat>& grads) {
  switch (s.config.kind) {
    case OptKind::Sgd: return sgd_step(s, grads);
    case OptKind::Momentum: return momentum_step(s, grads);
    case OptKind::Adam: return adam_step(s, grads);
    case OptKind::Shd: return shd_step(s, grads);
    case OptKind::Pphd: return pphd_step(s, grads);
    case OptKind::Fop: return fop_step(s, grads);
  }
  throw ContractViolation("optimizer_step: unknown kind");
}

}  // namespace fop
