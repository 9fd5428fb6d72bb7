#include "fop/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "fop/error.hpp"

namespace fop {

namespace {

double off_diagonal_norm(const Mat& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

EigenResult sym_eigendecompose(const Mat& a) {
  if (a.rows() != a.cols()) {
    throw ContractViolation("sym_eigendecompose: matrix must be square");
  }
  const std::size_t n = a.rows();
  double asym = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = a(i, j) - a(j, i);
      asym += 2.0 * d * d;
    }
  const double fnorm = frobenius_norm(a);
  if (std::sqrt(asym) > 1e-9 * std::max(1.0, fnorm)) {
    throw ContractViolation("sym_eigendecompose: matrix is not symmetric");
  }

  Mat d = a;
  // Symmetrize exactly so rounding in the input cannot leak into rotations.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double m = 0.5 * (d(i, j) + d(j, i));
      d(i, j) = m;
      d(j, i) = m;
    }
  Mat v = Mat::identity(n);

  const double tol = 1e-15 * std::max(1.0, fnorm);
  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (off_diagonal_norm(d) <= tol) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = d(p, q);
        if (apq == 0.0) continue;
        const double app = d(p, p);
        const double aqq = d(q, q);
        // Rutishauser: t is the smaller-magnitude root of t^2 + 2*theta*t - 1.
        const double theta = (aqq - app) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 1.0 / (2.0 * theta);
        } else {
          t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        d(p, p) = app - t * apq;
        d(q, q) = aqq + t * apq;
        d(p, q) = 0.0;
        d(q, p) = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (i == p || i == q) continue;
          const double dip = d(i, p);
          const double diq = d(i, q);
          d(i, p) = dip - s * (diq + tau * dip);
          d(i, q) = diq + s * (dip - tau * diq);
          d(p, i) = d(i, p);
          d(q, i) = d(i, q);
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = v(i, p);
          const double viq = v(i, q);
          v(i, p) = vip - s * (viq + tau * vip);
          v(i, q) = viq + s * (vip - tau * viq);
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return d(i, i) > d(j, j);
  });

  EigenResult r;
  r.eigenvalues.resize(n);
  r.eigenvectors = Mat(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    r.eigenvalues[j] = d(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) r.eigenvectors(i, j) = v(i, order[j]);
  }
  return r;
}

double spectral_norm_psd(const Mat& a) {
  EigenResult r = sym_eigendecompose(a);
  if (r.eigenvalues.empty()) return 0.0;
  return std::max(0.0, r.eigenvalues.front());
}

}  // namespace fop
