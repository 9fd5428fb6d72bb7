#pragma once

#include "fop/mat.hpp"

namespace fop {

struct EigenResult {
  Vec eigenvalues;   // descending
  Mat eigenvectors;  // orthonormal columns, column j pairs with eigenvalues[j]
};

// Cyclic Jacobi on a symmetric matrix. Input must satisfy
// ||A - A^T||_F <= 1e-9 * max(1, ||A||_F).
EigenResult sym_eigendecompose(const Mat& a);

// Largest eigenvalue of a symmetric PSD matrix, clamped at 0.
double spectral_norm_psd(const Mat& a);

}  // namespace fop
