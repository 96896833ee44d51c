#ifndef BCC_MATRIX_HPP
#define BCC_MATRIX_HPP

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace bcc {

/// Dense row-major matrix of doubles. Rows are objects, columns are
/// features, so per-object feature access is contiguous.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    assert(r < rows_);
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    assert(r < rows_);
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Mean of column c over all rows.
inline double column_mean(const Matrix& m, std::size_t c) {
  double s = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) s += m(r, c);
  return s / static_cast<double>(m.rows());
}

/// Unbiased sample variance of column c (divides by rows-1).
inline double column_variance(const Matrix& m, std::size_t c) {
  assert(m.rows() >= 2);
  const double mean = column_mean(m, c);
  double ss = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double d = m(r, c) - mean;
    ss += d * d;
  }
  return ss / static_cast<double>(m.rows() - 1);
}

}  // namespace bcc

#endif
