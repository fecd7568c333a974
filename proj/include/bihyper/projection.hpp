#pragma once

#include <vector>

#include "bihyper/autodiff.hpp"
#include "bihyper/linalg.hpp"
#include "bihyper/matrix.hpp"

namespace bihyper {

// SVD-derived projection onto standardized principal components: for the
// fitting batch, columns of (H - mean) * w are orthonormal.
struct ProjectionState {
  DenseMatrix w;                      // k x kPrime, V_k' * diag(1/sigma)
  std::vector<double> mean;           // column means of the fitting batch
  std::vector<double> retainedSigma;  // leading kPrime singular values
  int kPrime = 0;
};

// Throws NumericError naming the deficient index when sigma[kPrime-1] is
// numerically zero relative to sigma[0] (projection would divide by ~0).
ProjectionState fitProjection(const DenseMatrix& batch, int kPrime);

DenseMatrix applyProjection(const DenseMatrix& h, const ProjectionState& state);

// Taped variant; w and mean enter as constants, so no gradient reaches them.
ad::Var applyProjection(ad::Var h, const ProjectionState& state, ad::Tape& tape);

}  // namespace bihyper
