#include "bihyper/matrix.hpp"

#include <string>

namespace bihyper {

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                     " * " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  DenseMatrix out(a.rows(), b.cols());
  const int n = a.rows(), k = a.cols(), m = b.cols();
  for (int i = 0; i < n; ++i) {
    double* outRow = out.row(i);
    const double* aRow = a.row(i);
    for (int p = 0; p < k; ++p) {
      const double av = aRow[p];
      if (av == 0.0) continue;
      const double* bRow = b.row(p);
      for (int j = 0; j < m; ++j) outRow[j] += av * bRow[j];
    }
  }
  return out;
}

DenseMatrix transpose(const DenseMatrix& m) {
  DenseMatrix out(m.cols(), m.rows());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
  return out;
}

DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b) {
  if (!a.sameShape(b)) throw ShapeError("add: shape mismatch");
  DenseMatrix out = a;
  for (size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b) {
  if (!a.sameShape(b)) throw ShapeError("subtract: shape mismatch");
  DenseMatrix out = a;
  for (size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.data()[i];
  return out;
}

double frobeniusNorm(const DenseMatrix& m) {
  double s = 0.0;
  for (size_t i = 0; i < m.size(); ++i) s += m.data()[i] * m.data()[i];
  return std::sqrt(s);
}

std::vector<double> columnMeans(const DenseMatrix& m) {
  std::vector<double> mean(m.cols(), 0.0);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) mean[j] += m(i, j);
  if (m.rows() > 0)
    for (double& x : mean) x /= m.rows();
  return mean;
}

DenseMatrix subtractRowVector(const DenseMatrix& m, const std::vector<double>& v) {
  if (static_cast<int>(v.size()) != m.cols())
    throw ShapeError("subtractRowVector: vector length != cols");
  DenseMatrix out = m;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out(i, j) -= v[j];
  return out;
}

}  // namespace bihyper
