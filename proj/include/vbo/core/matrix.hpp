#pragma once

#include <stdexcept>
#include <vector>

namespace vbo {

/// Minimal row-major dense matrix for plain (non-differentiated) data.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}
  Matrix(int r, int c, std::vector<double> data) : rows(r), cols(c), a(std::move(data)) {
    if (a.size() != static_cast<size_t>(r) * c) throw std::invalid_argument("Matrix: data size mismatch");
  }

  double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
  const double* row(int i) const { return a.data() + static_cast<size_t>(i) * cols; }
  double* row(int i) { return a.data() + static_cast<size_t>(i) * cols; }

  std::vector<double> row_vec(int i) const {
    return std::vector<double>(row(i), row(i) + cols);
  }
};

}  // namespace vbo
