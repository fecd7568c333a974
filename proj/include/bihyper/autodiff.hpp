#pragma once

#include <functional>
#include <vector>

#include "bihyper/matrix.hpp"

namespace bihyper::ad {

// Trainable tensor living outside any tape. grad has the same shape as
// value and holds d(loss)/d(value) after Tape::backward.
struct Parameter {
  DenseMatrix value;
  DenseMatrix grad;

  explicit Parameter(DenseMatrix v) : value(std::move(v)), grad(value.rows(), value.cols()) {}
  void zeroGrad() { grad = DenseMatrix(value.rows(), value.cols()); }
};

class Tape;

// Lightweight handle into a tape.
struct Var {
  Tape* tape = nullptr;
  int id = -1;
  bool valid() const { return tape != nullptr && id >= 0; }
};

// Recording tape for reverse-mode differentiation. Nodes are appended in
// topological order by construction; backward visits them once in reverse.
// A tape is single-use: backward may only run once, then clear() or discard.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int)>;

  Var constant(DenseMatrix v);        // leaf whose gradient nobody reads
  Var input(DenseMatrix v);           // leaf with observable gradient
  Var param(Parameter& p);            // leaf bound to an external Parameter

  const DenseMatrix& value(Var v) const { return nodes_[check(v)].value; }
  const DenseMatrix& grad(Var v) const { return nodes_[check(v)].grad; }

  // loss must be 1x1. Fills every node's grad and accumulates bound
  // parameter gradients into Parameter::grad.
  void backward(Var loss);

  void clear();
  size_t nodeCount() const { return nodes_.size(); }

  // Primitive plumbing; prefer the free functions below.
  Var emit(DenseMatrix value, std::vector<int> inputs, BackwardFn fn);
  DenseMatrix& gradRef(int id) { return nodes_[id].grad; }
  const DenseMatrix& valueOf(int id) const { return nodes_[id].value; }

 private:
  struct Node {
    DenseMatrix value;
    DenseMatrix grad;
    std::vector<int> inputs;
    BackwardFn backward;
    Parameter* bound = nullptr;
  };

  int check(Var v) const;

  std::vector<Node> nodes_;
  bool backwardDone_ = false;
};

// Elementwise and structural primitives. All shape-check their inputs and
// record exact local gradient rules.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var matmul(Var a, Var b);
Var transpose(Var a);
Var relu(Var a);
Var softplus(Var a);
Var sqrtElem(Var a);
Var scale(Var a, double c);
Var addScalar(Var a, double c);
Var sum(Var a);   // 1x1
Var mean(Var a);  // 1x1
Var addRowVector(Var x, Var bias);                        // bias 1 x k
Var concatCols(const std::vector<Var>& parts);
Var selectRows(Var a, const std::vector<int>& rows);
Var rowSqDistance(Var x, const std::vector<double>& center);  // n x 1
Var weightedSum(Var a, const DenseMatrix& weights);           // 1x1
Var segmentSum(Var a, const std::vector<int>& segment, int segmentCount);
Var neighborSum(Var a, const std::vector<std::vector<int>>& adjacency, double selfWeight);
Var clampMin(Var a, double bound);  // max(a, bound)
Var clampMax(Var a, double bound);  // min(a, bound)

// p <- p - lr * (grad + weightDecay * p); gradients zeroed afterwards.
void sgdStep(const std::vector<Parameter*>& params, double learningRate, double weightDecay);

double sigmoid(double z);
double softplusStable(double z);

}  // namespace bihyper::ad
