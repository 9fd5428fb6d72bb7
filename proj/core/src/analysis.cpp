#include "fop/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fop/config.hpp"
#include "fop/eigen.hpp"
#include "fop/error.hpp"

namespace fop {

double rotation_angle(const Vec& g, const Vec& pg) {
  if (g.size() != pg.size()) {
    throw ContractViolation("rotation_angle: length mismatch");
  }
  const double ng = l2_norm(g);
  const double npg = l2_norm(pg);
  if (ng == 0.0 || npg == 0.0) {
    throw ContractViolation("rotation_angle: undefined for a zero vector");
  }
  double c = dot(g, pg) / (ng * npg);
  c = std::clamp(c, -1.0, 1.0);
  return std::acos(c) * 180.0 / M_PI;
}

SpectrumReport spectrum(const Mat& p_effective) {
  EigenResult eig = sym_eigendecompose(p_effective);
  SpectrumReport r;
  r.eigenvalues = eig.eigenvalues;
  r.max_eigenvalue = eig.eigenvalues.front();
  r.min_eigenvalue = eig.eigenvalues.back();
  double det = 1.0;
  for (double v : eig.eigenvalues) det *= v;
  r.det_proxy = det;
  r.uniformity = r.max_eigenvalue != 0.0 ? r.min_eigenvalue / r.max_eigenvalue : 0.0;
  return r;
}

RunRecord run_preconditioned_gd(const QuadraticPL& q, const Mat& p, const Vec& theta0,
                                double step, std::size_t steps) {
  if (p.rows() != theta0.size() || p.cols() != theta0.size()) {
    throw ContractViolation("run_preconditioned_gd: P shape does not match theta");
  }
  RunRecord rec;
  RunConfig cfg;
  cfg.command = "toy";
  cfg.objective = "quadratic_pl";
  cfg.optimizer.kind = OptKind::Sgd;
  cfg.optimizer.lr = step;
  cfg.init = theta0;
  cfg.max_iters = steps;
  rec.config_json = to_canonical_json(cfg);

  Vec theta = theta0;
  const std::size_t n = theta.size();
  for (std::size_t k = 0; k <= steps; ++k) {
    Vec g = q.grad(theta);
    SeriesPoint pt;
    pt.t = k;
    pt.loss = q.eval(theta);
    pt.grad_norm = l2_norm(g);
    if (n <= 4) pt.theta = theta;
    rec.series.push_back(std::move(pt));
    if (k == steps) break;
    for (std::size_t i = 0; i < n; ++i) {
      double pg = 0.0;
      for (std::size_t j = 0; j < n; ++j) pg += p(i, j) * g[j];
      theta[i] -= step * pg;
    }
  }
  rec.summary.iterations = steps;
  rec.summary.final_loss = rec.series.back().loss;
  rec.summary.final_grad_norm = rec.series.back().grad_norm;
  rec.summary.exit_reason = "cap";
  return rec;
}

ConvergenceCheck verify_convergence_bound(const RunRecord& run, const QuadraticPL& q,
                                          const Mat& p) {
  EigenResult eig = sym_eigendecompose(p);
  const double lam_max = eig.eigenvalues.front();
  const double lam_min = eig.eigenvalues.back();
  if (lam_min < -1e-10) {
    throw ContractViolation("verify_convergence_bound: P is not PSD");
  }
  ConvergenceCheck check;
  check.mu = q.mu;
  check.L = q.L;
  check.rho_step = (2.0 * lam_min - lam_max * lam_max) / q.L;
  const double rate = 1.0 - check.mu * check.rho_step;
  if (!(check.rho_step > 0.0) || rate < 0.0 || rate > 1.0) {
    throw ConfigError("verify_convergence_bound: rate " + std::to_string(rate) +
                      " outside (0, 1]");
  }
  if (run.series.empty()) {
    throw ContractViolation("verify_convergence_bound: empty series");
  }
  const double f0 = run.series.front().loss;
  check.bound.reserve(run.series.size());
  check.max_violation = -std::numeric_limits<double>::infinity();
  for (const SeriesPoint& pt : run.series) {
    check.K = std::max(check.K, pt.grad_norm);
    const double bound =
        std::pow(rate, static_cast<double>(pt.t)) * f0;
    check.bound.push_back(bound);
    const double violation = pt.loss - bound;
    check.max_violation = std::max(check.max_violation, violation);
    if (violation > 1e-12) check.violation_count += 1;
  }
  return check;
}

Mat snapshot_effective_p(const PSnapshot& snap, const RunRecord& run) {
  if (snap.mode == "full") {
    return matmul_nt(snap.m, snap.m);
  }
  if (snap.mode == "lowrank") {
    Mat out = Mat::identity(snap.m.rows());
    if (snap.m.cols() > 0) axpy(1.0, matmul_nt(snap.m, snap.m), out);
    return out;
  }
  if (snap.mode == "normalized") {
    Mat p = matmul_nt(snap.m, snap.m);
    const double fro = frobenius_norm(p);
    if (fro < 1e-300) {
      throw ContractViolation("snapshot_effective_p: degenerate M");
    }
    return (std::sqrt(static_cast<double>(snap.m.rows())) / fro) * p;
  }
  if (snap.mode == "stabilized") {
    RunConfig cfg = run_config_from_json(run.config_json);
    Mat p = matmul_nt(snap.m, snap.m);
    const double spec = spectral_norm_psd(p);
    if (spec < 1e-300) {
      throw ContractViolation("snapshot_effective_p: degenerate M");
    }
    const std::uint64_t t = snap.t == 0 ? 1 : snap.t;
    const double gamma = stabilized_gamma(t, spec, cfg.optimizer.precond.p_inf,
                                          default_delta);
    return (gamma / spec) * p;
  }
  throw FormatError("snapshot_effective_p: unknown mode '" + snap.mode + "'");
}

std::vector<NormTracePoint> norm_trace(const RunRecord& run) {
  if (run.psnapshots.empty()) {
    throw ConfigError(
        "norm_trace: run has no P snapshots; re-record with --snapshot-every");
  }
  RunConfig cfg = run_config_from_json(run.config_json);
  const double rho = cfg.optimizer.precond.hyper_lr;

  // Running max of the recorded gradient norms up to each t.
  std::vector<NormTracePoint> out;
  out.reserve(run.psnapshots.size());

  // ||P(0)||_2 per layer, from the earliest snapshot of that layer.
  std::vector<std::size_t> layers;
  for (const PSnapshot& s : run.psnapshots) {
    if (std::find(layers.begin(), layers.end(), s.layer) == layers.end()) {
      layers.push_back(s.layer);
    }
  }
  std::vector<double> p0(layers.size(), -1.0);
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const PSnapshot* first = nullptr;
    for (const PSnapshot& s : run.psnapshots) {
      if (s.layer == layers[li] && (first == nullptr || s.t < first->t)) first = &s;
    }
    p0[li] = spectral_norm_psd(snapshot_effective_p(*first, run));
  }

  for (const PSnapshot& s : run.psnapshots) {
    double running_k = 0.0;
    for (const SeriesPoint& pt : run.series) {
      if (pt.t > s.t) break;
      running_k = std::max(running_k, pt.grad_norm);
    }
    Mat p = snapshot_effective_p(s, run);
    NormTracePoint tp;
    tp.t = s.t;
    tp.layer = s.layer;
    tp.spec_norm = spectral_norm_psd(p);
    tp.fro_norm = frobenius_norm(p);
    std::size_t li = 0;
    while (layers[li] != s.layer) ++li;
    tp.bound = p0[li] + static_cast<double>(s.t) * rho * running_k * running_k;
    tp.violated = tp.spec_norm > tp.bound + 1e-8;
    out.push_back(std::move(tp));
  }
  return out;
}

}  // namespace fop
