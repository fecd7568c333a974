#pragma once

#include <vector>

#include "bihyper/autodiff.hpp"
#include "bihyper/graph_data.hpp"
#include "bihyper/rng.hpp"

namespace bihyper {

struct LinearParams {
  ad::Parameter weight;  // in x out
  ad::Parameter bias;    // 1 x out
  LinearParams(int in, int out) : weight(DenseMatrix(in, out)), bias(DenseMatrix(1, out)) {}
};

// Stack of linear layers with relu between them (none after the last).
struct MlpParams {
  std::vector<LinearParams> layers;
};

// GIN encoder: L message-passing layers, each a 2-layer MLP applied to
// (1 + eps) * x_v + sum of neighbor features, plus the two 3-layer heads
// mapping the L*k concatenation to node-level and graph-level width k.
struct EncoderParams {
  std::vector<MlpParams> ginMlps;
  std::vector<double> epsilons;  // fixed, not trained
  MlpParams nodeHead;
  MlpParams graphHead;
  int layerCount = 4;
  int hiddenDim = 16;
  int featureDim = 0;

  std::vector<ad::Parameter*> trainable();
  std::vector<const ad::Parameter*> trainable() const;
};

EncoderParams makeEncoder(int featureDim, int layerCount, int hiddenDim, Rng& rng);

// Plain MLP encoder for the non-graph pipeline (featureDim -> k -> k -> k).
struct TabularEncoderParams {
  MlpParams mlp;
  int hiddenDim = 16;
  int featureDim = 0;
  std::vector<ad::Parameter*> trainable();
  std::vector<const ad::Parameter*> trainable() const;
};

TabularEncoderParams makeTabularEncoder(int featureDim, int hiddenDim, Rng& rng);

ad::Var mlpForward(const MlpParams& p, ad::Var x, ad::Tape& tape);

struct GinOutputs {
  ad::Var nodeConcat;    // n x (L*k)
  ad::Var graphReadout;  // |G| x (L*k), sum readout
};
GinOutputs ginForward(const GraphBatch& batch, EncoderParams& params, ad::Tape& tape);

struct HeadOutputs {
  ad::Var node;   // h, n x k
  ad::Var graph;  // H, |G| x k
};
HeadOutputs heads(ad::Var nodeConcat, ad::Var graphReadout, EncoderParams& params, ad::Tape& tape);

}  // namespace bihyper
