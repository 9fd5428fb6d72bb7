#pragma once

#include <cstdint>
#include <cstddef>

#include "fop/mat.hpp"

namespace fop {

// Deterministic stream: splitmix64 output scrambler, gaussians via the
// Marsaglia polar method with a cached spare. The integer stream is exact
// across platforms; gaussians additionally depend on the libm log/sqrt.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  // Uniform in [0, 1), 53 random bits.
  double next_unit();

  // Standard normal.
  double next_gaussian();

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// rows x cols with i.i.d. N(0, sigma^2) entries, drawn row-major.
Mat gaussian_mat(std::size_t rows, std::size_t cols, double sigma, Rng& rng);

}  // namespace fop
