#include "bihyper/projection.hpp"

#include <string>

#include "bihyper/errors.hpp"

namespace bihyper {

ProjectionState fitProjection(const DenseMatrix& batch, int kPrime) {
  if (kPrime < 1) throw ContractError("fitProjection: kPrime must be >= 1");
  if (batch.rows() < kPrime)
    throw ContractError("fitProjection: batch rows " + std::to_string(batch.rows()) +
                        " < kPrime " + std::to_string(kPrime));
  if (kPrime > batch.cols())
    throw ContractError("fitProjection: kPrime exceeds representation width");
  if (!batch.allFinite()) throw NumericError("fitProjection: non-finite representations");

  ProjectionState state;
  state.kPrime = kPrime;
  state.mean = columnMeans(batch);
  const DenseMatrix centered = subtractRowVector(batch, state.mean);
  const SvdFactors f = svd(centered);

  const double sigmaTop = f.sigma[0];
  if (sigmaTop <= 0.0 || f.sigma[kPrime - 1] < 1e-10 * sigmaTop)
    throw NumericError("fitProjection: rank-deficient batch, singular value " +
                       std::to_string(kPrime) + " is " + std::to_string(f.sigma[kPrime - 1]) +
                       " vs leading " + std::to_string(sigmaTop));

  state.retainedSigma.assign(f.sigma.begin(), f.sigma.begin() + kPrime);
  state.w = DenseMatrix(batch.cols(), kPrime);
  for (int i = 0; i < batch.cols(); ++i)
    for (int j = 0; j < kPrime; ++j) state.w(i, j) = f.v(i, j) / f.sigma[j];
  return state;
}

DenseMatrix applyProjection(const DenseMatrix& h, const ProjectionState& state) {
  if (h.cols() != state.w.rows())
    throw ShapeError("applyProjection: width " + std::to_string(h.cols()) + " != fitted " +
                     std::to_string(state.w.rows()));
  return matmul(subtractRowVector(h, state.mean), state.w);
}

ad::Var applyProjection(ad::Var h, const ProjectionState& state, ad::Tape& tape) {
  const DenseMatrix& hv = tape.value(h);
  if (hv.cols() != state.w.rows())
    throw ShapeError("applyProjection: width " + std::to_string(hv.cols()) + " != fitted " +
                     std::to_string(state.w.rows()));
  DenseMatrix negMean(1, state.w.rows());
  for (int j = 0; j < state.w.rows(); ++j) negMean(0, j) = -state.mean[j];
  ad::Var centered = ad::addRowVector(h, tape.constant(negMean));
  return ad::matmul(centered, tape.constant(state.w));
}

}  // namespace bihyper
