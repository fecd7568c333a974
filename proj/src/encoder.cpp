#include "bihyper/encoder.hpp"

#include <cmath>

#include "bihyper/errors.hpp"

namespace bihyper {

namespace {

void xavierFill(DenseMatrix& m, int fanIn, int fanOut, Rng& rng) {
  const double bound = std::sqrt(6.0 / (fanIn + fanOut));
  for (size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.nextUniform(-bound, bound);
}

LinearParams makeLinear(int in, int out, Rng& rng) {
  LinearParams p(in, out);
  xavierFill(p.weight.value, in, out, rng);
  return p;  // bias stays zero
}

MlpParams makeMlp(const std::vector<int>& widths, Rng& rng) {
  MlpParams mlp;
  for (size_t i = 0; i + 1 < widths.size(); ++i)
    mlp.layers.push_back(makeLinear(widths[i], widths[i + 1], rng));
  return mlp;
}

void collect(const MlpParams& mlp, std::vector<ad::Parameter*>& out) {
  for (const LinearParams& l : mlp.layers) {
    out.push_back(const_cast<ad::Parameter*>(&l.weight));
    out.push_back(const_cast<ad::Parameter*>(&l.bias));
  }
}

}  // namespace

std::vector<ad::Parameter*> EncoderParams::trainable() {
  std::vector<ad::Parameter*> out;
  for (auto& mlp : ginMlps) collect(mlp, out);
  collect(nodeHead, out);
  collect(graphHead, out);
  return out;
}

std::vector<const ad::Parameter*> EncoderParams::trainable() const {
  auto ps = const_cast<EncoderParams*>(this)->trainable();
  return {ps.begin(), ps.end()};
}

EncoderParams makeEncoder(int featureDim, int layerCount, int hiddenDim, Rng& rng) {
  if (featureDim < 1 || layerCount < 1 || hiddenDim < 1)
    throw ContractError("makeEncoder: dimensions must be positive");
  EncoderParams p;
  p.layerCount = layerCount;
  p.hiddenDim = hiddenDim;
  p.featureDim = featureDim;
  p.epsilons.assign(layerCount, 0.0);
  int in = featureDim;
  for (int l = 0; l < layerCount; ++l) {
    p.ginMlps.push_back(makeMlp({in, hiddenDim, hiddenDim}, rng));
    in = hiddenDim;
  }
  const int concatDim = layerCount * hiddenDim;
  p.nodeHead = makeMlp({concatDim, hiddenDim, hiddenDim, hiddenDim}, rng);
  p.graphHead = makeMlp({concatDim, hiddenDim, hiddenDim, hiddenDim}, rng);
  return p;
}

std::vector<ad::Parameter*> TabularEncoderParams::trainable() {
  std::vector<ad::Parameter*> out;
  collect(mlp, out);
  return out;
}

std::vector<const ad::Parameter*> TabularEncoderParams::trainable() const {
  auto ps = const_cast<TabularEncoderParams*>(this)->trainable();
  return {ps.begin(), ps.end()};
}

TabularEncoderParams makeTabularEncoder(int featureDim, int hiddenDim, Rng& rng) {
  if (featureDim < 1 || hiddenDim < 1)
    throw ContractError("makeTabularEncoder: dimensions must be positive");
  TabularEncoderParams p;
  p.hiddenDim = hiddenDim;
  p.featureDim = featureDim;
  p.mlp = makeMlp({featureDim, hiddenDim, hiddenDim, hiddenDim}, rng);
  return p;
}

ad::Var mlpForward(const MlpParams& p, ad::Var x, ad::Tape& tape) {
  ad::Var h = x;
  for (size_t i = 0; i < p.layers.size(); ++i) {
    auto& layer = const_cast<LinearParams&>(p.layers[i]);
    h = ad::addRowVector(ad::matmul(h, tape.param(layer.weight)), tape.param(layer.bias));
    if (i + 1 < p.layers.size()) h = ad::relu(h);
  }
  return h;
}

GinOutputs ginForward(const GraphBatch& batch, EncoderParams& params, ad::Tape& tape) {
  if (batch.nodeCount() == 0) throw ContractError("ginForward: empty batch");
  if (batch.nodeFeatures.cols() != params.featureDim)
    throw ShapeError("ginForward: feature dim " + std::to_string(batch.nodeFeatures.cols()) +
                     " does not match encoder input " + std::to_string(params.featureDim));

  ad::Var z = tape.constant(batch.nodeFeatures);
  std::vector<ad::Var> layerOutputs;
  for (int l = 0; l < params.layerCount; ++l) {
    ad::Var aggregated = ad::neighborSum(z, batch.adjacency, 1.0 + params.epsilons[l]);
    z = mlpForward(params.ginMlps[l], aggregated, tape);
    layerOutputs.push_back(z);
  }
  GinOutputs out;
  out.nodeConcat = ad::concatCols(layerOutputs);
  out.graphReadout = ad::segmentSum(out.nodeConcat, batch.graphIndicator, batch.graphCount);
  return out;
}

HeadOutputs heads(ad::Var nodeConcat, ad::Var graphReadout, EncoderParams& params,
                  ad::Tape& tape) {
  HeadOutputs out;
  out.node = mlpForward(params.nodeHead, nodeConcat, tape);
  out.graph = mlpForward(params.graphHead, graphReadout, tape);
  return out;
}

}  // namespace bihyper
