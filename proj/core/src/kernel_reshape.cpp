#include "fop/kernel_reshape.hpp"

#include <string>

#include "fop/error.hpp"

namespace fop {

Mat reshape_kernel_fwd(const KernelTensor& t) {
  const std::size_t expected = t.k * t.k * t.in_ch * t.out_ch;
  if (t.data.size() != expected) {
    throw ContractViolation("reshape_kernel_fwd: data length " +
                            std::to_string(t.data.size()) + ", expected " +
                            std::to_string(expected));
  }
  // The tensor layout makes row (a*k + b) of the matrix contiguous, so the
  // whole reshape is a flat copy.
  return Mat(t.k * t.k, t.in_ch * t.out_ch, t.data);
}

KernelTensor reshape_kernel_bwd(const Mat& m, std::size_t k, std::size_t in_ch,
                                std::size_t out_ch) {
  if (m.rows() != k * k || m.cols() != in_ch * out_ch) {
    throw ContractViolation("reshape_kernel_bwd: matrix is " +
                            std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                            ", expected " + std::to_string(k * k) + "x" +
                            std::to_string(in_ch * out_ch));
  }
  KernelTensor t;
  t.k = k;
  t.in_ch = in_ch;
  t.out_ch = out_ch;
  t.data = m.values();
  return t;
}

}  // namespace fop
