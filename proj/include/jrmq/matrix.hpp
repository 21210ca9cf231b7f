#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace jrmq {

// Dense row-major matrix of doubles; just enough surface for probability
// tables and transition matrices.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, value) {}

  double& operator()(std::size_t r, std::size_t c) {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double row_sum(std::size_t r) const {
    double s = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) s += (*this)(r, c);
    return s;
  }
  double col_sum(std::size_t c) const {
    double s = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) s += (*this)(r, c);
    return s;
  }
  double total() const {
    double s = 0.0;
    for (double v : data_) s += v;
    return s;
  }

  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Four-index tensor T[a][b][c][d], used for joint transition kernels.
class Tensor4 {
 public:
  Tensor4() = default;
  Tensor4(std::size_t n0, std::size_t n1, std::size_t n2, std::size_t n3)
      : n_{n0, n1, n2, n3}, data_(n0 * n1 * n2 * n3, 0.0) {}

  double& operator()(std::size_t a, std::size_t b, std::size_t c,
                     std::size_t d) {
    return data_[((a * n_[1] + b) * n_[2] + c) * n_[3] + d];
  }
  double operator()(std::size_t a, std::size_t b, std::size_t c,
                    std::size_t d) const {
    return data_[((a * n_[1] + b) * n_[2] + c) * n_[3] + d];
  }

  std::size_t size(int axis) const { return n_[axis]; }
  bool empty() const noexcept { return data_.empty(); }
  const std::vector<double>& data() const noexcept { return data_; }

 private:
  std::size_t n_[4] = {0, 0, 0, 0};
  std::vector<double> data_;
};

} // namespace jrmq
