#pragma once

#include <vector>

#include "bihyper/matrix.hpp"

namespace bihyper {

// Thin SVD of an n x k matrix: m = u * diag(sigma) * v^T with
// r = min(n, k) factors, sigma sorted descending, u (n x r) and v (k x r)
// with orthonormal columns. Sign convention: the largest-magnitude entry
// of each column of v is nonnegative, so factors are reproducible.
struct SvdFactors {
  DenseMatrix u;
  std::vector<double> sigma;
  DenseMatrix v;
  int rank = 0;  // number of retained factors, min(rows, cols)
};

// One-sided Jacobi (Hestenes) on the smaller dimension.
// Throws NumericError if the sweep cap is hit before the off-diagonal
// residual drops below tol * ||m||_F^2.
SvdFactors svd(const DenseMatrix& m);
SvdFactors svdWithOptions(const DenseMatrix& m, int maxSweeps, double tol);

DenseMatrix reconstruct(const SvdFactors& f);

}  // namespace bihyper
