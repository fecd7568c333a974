#include "bihyper/mi_loss.hpp"

#include <string>

#include "bihyper/errors.hpp"

namespace bihyper {

ad::Var jsdMutualInformation(ad::Var h, ad::Var graphRepr, const std::vector<int>& indicator,
                             bool* hadNegatives) {
  ad::Tape& tape = *h.tape;
  const DenseMatrix& hv = tape.value(h);
  const DenseMatrix& gv = tape.value(graphRepr);
  if (hv.cols() != gv.cols())
    throw ShapeError("jsdMutualInformation: h width " + std::to_string(hv.cols()) +
                     " != H width " + std::to_string(gv.cols()));
  const int n = hv.rows();
  const int g = gv.rows();
  if (static_cast<int>(indicator.size()) != n)
    throw ShapeError("jsdMutualInformation: indicator length != node count");

  std::vector<int> graphSize(g, 0);
  for (int i = 0; i < n; ++i) {
    if (indicator[i] < 0 || indicator[i] >= g)
      throw ContractError("jsdMutualInformation: indicator out of range");
    graphSize[indicator[i]]++;
  }

  // score(u, j) = h_u . H_j
  ad::Var scores = ad::matmul(h, ad::transpose(graphRepr));

  DenseMatrix posWeights(n, g);
  DenseMatrix negWeights(n, g);
  const long negCount = static_cast<long>(n) * g - n;
  for (int u = 0; u < n; ++u) {
    for (int j = 0; j < g; ++j) {
      if (indicator[u] == j)
        posWeights(u, j) = 1.0 / (static_cast<double>(g) * graphSize[j]);
      else if (negCount > 0)
        negWeights(u, j) = 1.0 / static_cast<double>(negCount);
    }
  }

  // positive term: E[-softplus(-score)] ; negative term: E[softplus(score)]
  ad::Var positive = ad::weightedSum(ad::scale(ad::softplus(ad::scale(scores, -1.0)), -1.0),
                                     posWeights);
  if (hadNegatives) *hadNegatives = negCount > 0;
  if (negCount == 0) return positive;
  ad::Var negative = ad::weightedSum(ad::softplus(scores), negWeights);
  return ad::sub(positive, negative);
}

}  // namespace bihyper
