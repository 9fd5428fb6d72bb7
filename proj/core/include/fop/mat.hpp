#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace fop {

using Vec = std::vector<double>;

/// Dense real64 matrix, row-major storage.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols);  // zero-filled
  Mat(std::size_t rows, std::size_t cols, Vec values);

  static Mat identity(std::size_t n);
  static Mat from_rows(std::initializer_list<std::initializer_list<double>> rows);
  /// Construction path for data read from external sources.
  /// Rejects NaN/Inf entries with FormatError.
  static Mat from_external(std::size_t rows, std::size_t cols, Vec values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  Vec& values() { return data_; }
  const Vec& values() const { return data_; }

  bool same_shape(const Mat& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vec data_;
};

Mat operator+(const Mat& a, const Mat& b);
Mat operator-(const Mat& a, const Mat& b);
Mat operator*(double s, const Mat& a);

/// a * b
Mat matmul(const Mat& a, const Mat& b);
/// transpose(a) * b without materializing the transpose
Mat matmul_tn(const Mat& a, const Mat& b);
/// a * transpose(b) without materializing the transpose
Mat matmul_nt(const Mat& a, const Mat& b);

Mat transpose(const Mat& a);
Mat hadamard(const Mat& a, const Mat& b);

/// y += alpha * x
void axpy(double alpha, const Mat& x, Mat& y);

/// Flattened inner product of two same-shape matrices.
double dot(const Mat& a, const Mat& b);

double frobenius_norm(const Mat& a);

// small helpers for flat vectors
double dot(const Vec& a, const Vec& b);
double l2_norm(const Vec& a);
double l2_norm(const Mat& a);  // same as frobenius_norm, for gradient norms

/// Column of a matrix as a flat vector.
Vec column(const Mat& a, std::size_t j);

/// n x 1 matrix view of a flat vector (copies).
Mat as_column(const Vec& v);
Vec as_vec(const Mat& single_column);

}  // namespace fop
