#include "fop/rng.hpp"

#include <cmath>

#include "fop/error.hpp"

namespace fop {

std::uint64_t Rng::next_u64() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * next_unit() - 1.0;
    v = 2.0 * next_unit() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

Mat gaussian_mat(std::size_t rows, std::size_t cols, double sigma, Rng& rng) {
  if (sigma < 0.0) throw ConfigError("gaussian_mat: sigma must be >= 0");
  Mat m(rows, cols);
  if (sigma == 0.0) return m;
  for (double& v : m.values()) v = sigma * rng.next_gaussian();
  return m;
}

}  // namespace fop
