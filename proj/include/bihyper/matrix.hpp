#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "bihyper/errors.hpp"

namespace bihyper {

// Dense row-major matrix of doubles. The numeric workhorse of the library;
// kept deliberately small (no views, no sparsity, no complex).
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), v_(static_cast<size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw ShapeError("negative matrix dimension");
  }
  DenseMatrix(int rows, int cols, std::vector<double> values)
      : rows_(rows), cols_(cols), v_(std::move(values)) {
    if (v_.size() != static_cast<size_t>(rows) * cols)
      throw ShapeError("value count " + std::to_string(v_.size()) +
                       " does not match " + std::to_string(rows) + "x" +
                       std::to_string(cols));
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return v_.size(); }

  double& operator()(int r, int c) { return v_[static_cast<size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return v_[static_cast<size_t>(r) * cols_ + c]; }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  double* row(int r) { return v_.data() + static_cast<size_t>(r) * cols_; }
  const double* row(int r) const { return v_.data() + static_cast<size_t>(r) * cols_; }
  const std::vector<double>& values() const { return v_; }

  bool sameShape(const DenseMatrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  bool allFinite() const {
    for (double x : v_)
      if (!std::isfinite(x)) return false;
    return true;
  }

  static DenseMatrix identity(int n) {
    DenseMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> v_;
};

// a * b; throws ShapeError unless a.cols == b.rows.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

DenseMatrix transpose(const DenseMatrix& m);

// Elementwise a + b / a - b (shape-checked).
DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b);

double frobeniusNorm(const DenseMatrix& m);

// Column means as a length-cols vector.
std::vector<double> columnMeans(const DenseMatrix& m);

// m with the given row vector subtracted from every row.
DenseMatrix subtractRowVector(const DenseMatrix& m, const std::vector<double>& v);

}  // namespace bihyper
