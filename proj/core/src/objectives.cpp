#include "fop/objectives.hpp"

#include <cmath>

#include "fop/eigen.hpp"
#include "fop/error.hpp"

namespace fop {

namespace {
void require_dim(const Vec& theta, std::size_t dim, const char* name) {
  if (theta.size() != dim) {
    throw ContractViolation(std::string(name) + ": expected dimension " +
                            std::to_string(dim) + ", got " +
                            std::to_string(theta.size()));
  }
}
}  // namespace

double booth(const Vec& theta) {
  require_dim(theta, 2, "booth");
  const double x = theta[0], y = theta[1];
  const double a = x + 2.0 * y - 7.0;
  const double b = 2.0 * x + y - 5.0;
  return a * a + b * b;
}

Vec booth_grad(const Vec& theta) {
  require_dim(theta, 2, "booth_grad");
  const double x = theta[0], y = theta[1];
  const double a = x + 2.0 * y - 7.0;
  const double b = 2.0 * x + y - 5.0;
  return {2.0 * a + 4.0 * b, 4.0 * a + 2.0 * b};
}

double himmelblau(const Vec& theta) {
  require_dim(theta, 2, "himmelblau");
  const double x = theta[0], y = theta[1];
  const double a = x * x + y - 11.0;
  const double b = x + y * y - 7.0;
  return a * a + b * b;
}

Vec himmelblau_grad(const Vec& theta) {
  require_dim(theta, 2, "himmelblau_grad");
  const double x = theta[0], y = theta[1];
  const double a = x * x + y - 11.0;
  const double b = x + y * y - 7.0;
  return {4.0 * x * a + 2.0 * b, 2.0 * a + 4.0 * y * b};
}

double rosenbrock(const Vec& theta) {
  require_dim(theta, 2, "rosenbrock");
  const double x = theta[0], y = theta[1];
  const double a = 1.0 - x;
  const double b = y - x * x;
  return a * a + 100.0 * b * b;
}

Vec rosenbrock_grad(const Vec& theta) {
  require_dim(theta, 2, "rosenbrock_grad");
  const double x = theta[0], y = theta[1];
  const double b = y - x * x;
  return {-2.0 * (1.0 - x) - 400.0 * x * b, 200.0 * b};
}

Objective booth_objective() {
  Objective o;
  o.dim = 2;
  o.eval = booth;
  o.grad = booth_grad;
  o.known_minima = {{{1.0, 3.0}, 0.0}};
  return o;
}

Objective himmelblau_objective() {
  Objective o;
  o.dim = 2;
  o.eval = himmelblau;
  o.grad = himmelblau_grad;
  // Four global minima, refined by Newton's method from coarse grid seeds
  // (frozen; covered by an independent oracle in the test suite).
  o.known_minima = {
      {{3.0, 2.0}, 0.0},
      {{-2.8051180869537025, 3.1313125182505729}, 0.0},
      {{-3.7793102533777469, -3.2831859912861694}, 0.0},
      {{3.5844283403304917, -1.8481265269644537}, 0.0},
  };
  return o;
}

Objective rosenbrock_objective() {
  Objective o;
  o.dim = 2;
  o.eval = rosenbrock;
  o.grad = rosenbrock_grad;
  o.known_minima = {{{1.0, 1.0}, 0.0}};
  return o;
}

double QuadraticPL::eval(const Vec& theta) const {
  if (theta.size() != theta_star.size()) {
    throw ContractViolation("QuadraticPL::eval: dimension mismatch");
  }
  const std::size_t n = theta.size();
  Vec d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = theta[i] - theta_star[i];
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double ad = 0.0;
    for (std::size_t j = 0; j < n; ++j) ad += A(i, j) * d[j];
    s += d[i] * ad;
  }
  return 0.5 * s;
}

Vec QuadraticPL::grad(const Vec& theta) const {
  if (theta.size() != theta_star.size()) {
    throw ContractViolation("QuadraticPL::grad: dimension mismatch");
  }
  const std::size_t n = theta.size();
  Vec d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = theta[i] - theta_star[i];
  Vec g(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g[i] += A(i, j) * d[j];
  return g;
}

Objective QuadraticPL::objective() const {
  Objective o;
  o.dim = theta_star.size();
  QuadraticPL self = *this;
  o.eval = [self](const Vec& theta) { return self.eval(theta); };
  o.grad = [self](const Vec& theta) { return self.grad(theta); };
  o.known_minima = {{theta_star, 0.0}};
  return o;
}

QuadraticPL quadratic_pl(const Mat& A, const Vec& theta_star) {
  if (A.rows() != A.cols() || A.rows() != theta_star.size()) {
    throw ContractViolation("quadratic_pl: A must be square and match theta_star");
  }
  EigenResult eig = sym_eigendecompose(A);
  const double lo = eig.eigenvalues.back();
  if (lo <= 0.0) {
    throw ContractViolation("quadratic_pl: A must be positive definite (min eigenvalue " +
                            std::to_string(lo) + ")");
  }
  QuadraticPL q;
  q.A = A;
  q.theta_star = theta_star;
  q.mu = lo;
  q.L = eig.eigenvalues.front();
  return q;
}

Vec finite_diff_grad(const std::function<double(const Vec&)>& f, const Vec& theta,
                     double h) {
  if (!(h > 0.0)) throw ConfigError("finite_diff_grad: h must be > 0");
  Vec g(theta.size());
  Vec probe = theta;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    probe[i] = theta[i] + h;
    const double fp = f(probe);
    probe[i] = theta[i] - h;
    const double fm = f(probe);
    probe[i] = theta[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace fop
