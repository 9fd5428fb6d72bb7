#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "fop/mat.hpp"

namespace fop {

struct Objective {
  std::size_t dim = 0;
  std::function<double(const Vec&)> eval;
  std::function<Vec(const Vec&)> grad;
  std::vector<std::pair<Vec, double>> known_minima;  // (theta*, f*)
};

double booth(const Vec& theta);
Vec booth_grad(const Vec& theta);

double himmelblau(const Vec& theta);
Vec himmelblau_grad(const Vec& theta);

double rosenbrock(const Vec& theta);
Vec rosenbrock_grad(const Vec& theta);

Objective booth_objective();
Objective himmelblau_objective();
// Not part of the toy benchmark set; extra sanity objective.
Objective rosenbrock_objective();

// f(theta) = 1/2 (theta - theta*)^T A (theta - theta*), A symmetric PD.
// mu = lambda_min(A), L = lambda_max(A); satisfies the PL inequality
// 1/2 ||grad f||^2 >= mu (f - f*) with f* = 0.
struct QuadraticPL {
  Mat A;
  Vec theta_star;
  double mu = 0.0;
  double L = 0.0;

  double eval(const Vec& theta) const;
  Vec grad(const Vec& theta) const;
  Objective objective() const;
};

QuadraticPL quadratic_pl(const Mat& A, const Vec& theta_star);

// Central differences (f(theta + h e_i) - f(theta - h e_i)) / (2h).
Vec finite_diff_grad(const std::function<double(const Vec&)>& f, const Vec& theta,
                     double h);

}  // namespace fop
