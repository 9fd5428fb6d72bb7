#pragma once

#include <cstdint>
#include <vector>

#include "fop/mat.hpp"
#include "fop/objectives.hpp"
#include "fop/run_record.hpp"

namespace fop {

struct SpectrumReport {
  std::size_t layer = 0;
  Vec eigenvalues;  // descending
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  double det_proxy = 0.0;    // product of eigenvalues
  double uniformity = 0.0;   // min / max
};

struct ConvergenceCheck {
  double mu = 0.0;
  double L = 0.0;
  double rho_step = 0.0;
  double K = 0.0;             // max observed gradient norm
  Vec bound;                  // per-iteration bound value, index = k
  double max_violation = 0.0; // max over k of f_k - f* - bound_k (negative = satisfied)
  std::size_t violation_count = 0;
};

struct NormTracePoint {
  std::uint64_t t = 0;
  std::size_t layer = 0;
  double spec_norm = 0.0;
  double fro_norm = 0.0;
  double bound = 0.0;  // ||P(0)||_2 + t * rho * K^2, K = running max grad norm
  bool violated = false;
};

// Angle between g and Pg in degrees, in [0, 180]. Zero-length input is an error.
double rotation_angle(const Vec& g, const Vec& pg);

// Eigenspectrum diagnostics of a symmetric effective P; layer is left 0.
SpectrumReport spectrum(const Mat& p_effective);

// Gradient descent preconditioned by the fixed matrix p at the given step
// size; records loss/grad series with the t = 0 point first.
RunRecord run_preconditioned_gd(const QuadraticPL& q, const Mat& p, const Vec& theta0,
                                double step, std::size_t steps);

// Checks f_k - f* <= (1 - mu*rho_step)^k (f_0 - f*) + 1e-12 for every recorded
// k, with rho_step = (2 lambda_min(P) - lambda_max(P)^2) / L. The run must
// have been produced at exactly that step size for the bound to be meaningful.
ConvergenceCheck verify_convergence_bound(const RunRecord& run, const QuadraticPL& q,
                                          const Mat& p);

// One point per (snapshot t, layer); requires P snapshots in the record.
std::vector<NormTracePoint> norm_trace(const RunRecord& run);

// Dense effective P reconstructed from a snapshot (p_inf read from the
// record's config echo when the mode needs it).
Mat snapshot_effective_p(const PSnapshot& snap, const RunRecord& run);

}  // namespace fop
