#pragma once

#include <cstddef>

#include "fop/mat.hpp"

namespace fop {

// k x k spatial taps, in_ch input channels, out_ch output channels.
// data layout: index(a, b, i, o) = ((a*k + b)*in_ch + i)*out_ch + o.
struct KernelTensor {
  std::size_t k = 0;
  std::size_t in_ch = 0;
  std::size_t out_ch = 0;
  Vec data;
};

// (k*k) x (in_ch*out_ch) matrix: row a*k + b, column i*out_ch + o.
Mat reshape_kernel_fwd(const KernelTensor& t);

// Inverse of the forward reshape; round trips are bit identical.
KernelTensor reshape_kernel_bwd(const Mat& m, std::size_t k, std::size_t in_ch,
                                std::size_t out_ch);

}  // namespace fop
