#include "bihyper/autodiff.hpp"

#include <cmath>
#include <string>

#include "bihyper/errors.hpp"

namespace bihyper::ad {

namespace {

void requireSameTape(Var a, Var b) {
  if (a.tape != b.tape) throw ContractError("vars belong to different tapes");
}

void accumulate(DenseMatrix& into, const DenseMatrix& g) {
  for (size_t i = 0; i < into.size(); ++i) into.data()[i] += g.data()[i];
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplusStable(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

int Tape::check(Var v) const {
  if (v.tape != this || v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
    throw ContractError("var does not belong to this tape");
  return v.id;
}

Var Tape::emit(DenseMatrix value, std::vector<int> inputs, BackwardFn fn) {
  Node n;
  n.grad = DenseMatrix(value.rows(), value.cols());
  n.value = std::move(value);
  n.inputs = std::move(inputs);
  n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(DenseMatrix v) { return emit(std::move(v), {}, nullptr); }

Var Tape::input(DenseMatrix v) { return emit(std::move(v), {}, nullptr); }

Var Tape::param(Parameter& p) {
  Var v = emit(p.value, {}, nullptr);
  nodes_[v.id].bound = &p;
  return v;
}

void Tape::backward(Var loss) {
  if (backwardDone_)
    throw ContractError("backward already ran on this tape; clear() before reuse");
  const int id = check(loss);
  const DenseMatrix& lv = nodes_[id].value;
  if (lv.rows() != 1 || lv.cols() != 1) throw ContractError("backward: loss is not scalar");
  backwardDone_ = true;

  nodes_[id].grad(0, 0) = 1.0;
  for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
    if (nodes_[i].backward) nodes_[i].backward(*this, i);
  }
  for (auto& n : nodes_) {
    if (n.bound) accumulate(n.bound->grad, n.grad);
  }
}

void Tape::clear() {
  nodes_.clear();
  backwardDone_ = false;
}

Var add(Var a, Var b) {
  requireSameTape(a, b);
  Tape& t = *a.tape;
  const DenseMatrix& va = t.value(a);
  const DenseMatrix& vb = t.value(b);
  if (!va.sameShape(vb)) throw ShapeError("add: shape mismatch");
  DenseMatrix out = va;
  for (size_t i = 0; i < out.size(); ++i) out.data()[i] += vb.data()[i];
  const int ia = a.id, ib = b.id;
  return t.emit(std::move(out), {ia, ib}, [ia, ib](Tape& tp, int self) {
    accumulate(tp.gradRef(ia), tp.gradRef(self));
    accumulate(tp.gradRef(ib), tp.gradRef(self));
  });
}

Var sub(Var a, Var b) {
  requireSameTape(a, b);
  Tape& t = *a.tape;
  const DenseMatrix& va = t.value(a);
  const DenseMatrix& vb = t.value(b);
  if (!va.sameShape(vb)) throw ShapeError("sub: shape mismatch");
  DenseMatrix out = va;
  for (size_t i = 0; i < out.size(); ++i) out.data()[i] -= vb.data()[i];
  const int ia = a.id, ib = b.id;
  return t.emit(std::move(out), {ia, ib}, [ia, ib](Tape& tp, int self) {
    const DenseMatrix& g = tp.gradRef(self);
    accumulate(tp.gradRef(ia), g);
    DenseMatrix& gb = tp.gradRef(ib);
    for (size_t i = 0; i < gb.size(); ++i) gb.data()[i] -= g.data()[i];
  });
}

Var mul(Var a, Var b) {
  requireSameTape(a, b);
  Tape& t = *a.tape;
  const DenseMatrix& va = t.value(a);
  const DenseMatrix& vb = t.value(b);
  if (!va.sameShape(vb)) throw ShapeError("mul: shape mismatch");
  DenseMatrix out = va;
  for (size_t i = 0; i < out.size(); ++i) out.data()[i] *= vb.data()[i];
  const int ia = a.id, ib = b.id;
  return t.emit(std::move(out), {ia, ib}, [ia, ib](Tape& tp, int self) {
    const DenseMatrix& g = tp.gradRef(self);
    const DenseMatrix& va2 = tp.valueOf(ia);
    const DenseMatrix& vb2 = tp.valueOf(ib);
    DenseMatrix& ga = tp.gradRef(ia);
    DenseMatrix& gb = tp.gradRef(ib);
    for (size_t i = 0; i < g.size(); ++i) {
      ga.data()[i] += g.data()[i] * vb2.data()[i];
      gb.data()[i] += g.data()[i] * va2.data()[i];
    }
  });
}

Var matmul(Var a, Var b) {
  requireSameTape(a, b);
  Tape& t = *a.tape;
  DenseMatrix out = bihyper::matmul(t.value(a), t.value(b));
  const int ia = a.id, ib = b.id;
  return t.emit(std::move(out), {ia, ib}, [ia, ib](Tape& tp, int self) {
    const DenseMatrix& g = tp.gradRef(self);
    accumulate(tp.gradRef(ia), bihyper::matmul(g, bihyper::transpose(tp.valueOf(ib))));
    accumulate(tp.gradRef(ib), bihyper::matmul(bihyper::transpose(tp.valueOf(ia)), g));
  });
}

Var transpose(Var a) {
  Tape& t = *a.tape;
  DenseMatrix out = bihyper::transpose(t.value(a));
  const int ia = a.id;
  return t.emit(std::move(out), {ia}, [ia](Tape& tp, int self) {
    accumulate(tp.gradRef(ia), bihyper::transpose(tp.gradRef(self)));
  });
}

Var relu(Var a) {
  Tape& t = *a.tape;
  DenseMatrix out = t.value(a);
  for (size_t i = 0; i < out.size(); ++i) out.data()[i] = std::max(out.data()[i], 0.0);
  const int ia = a.id;
  return t.emit(std::move(out), {ia}, [ia](Tape& tp, int self) {
    const DenseMatrix& g = tp.gradRef(self);
    const DenseMatrix& v = tp.valueOf(ia);
    DenseMatrix& ga = tp.gradRef(ia);
    for (size_t i = 0; i < g.size(); ++i)
      if (v.data()[i] > 0.0) ga.data()[i] += g.data()[i];
  });
}

Var softplus(Var a) {
  Tape& t = *a.tape;
  DenseMatrix out = t.value(a);
  for (size_t i = 0; i < out.size(); ++i) out.data()[i] = softplusStable(out.data()[i]);
  const int ia = a.id;
  return t.emit(std::move(out), {ia}, [ia](Tape& tp, int self) {
    const DenseMatrix& g = tp.gradRef(self);
    const DenseMatrix& v = tp.valueOf(ia);
    DenseMatrix& ga = tp.gradRef(ia);
    for (size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i] * sigmoid(v.data()[i]);
  });
}

Var sqrtElem(Var a) {
  Tape& t = *a.tape;
  DenseMatrix out = t.value(a);
  for (size_t i = 0; i < out.size(); ++i) out.data()[i] = std::sqrt(out.data()[i]);
  const int ia = a.id;
  return t.emit(std::move(out), {ia}, [ia](Tape& tp, int self) {
    const DenseMatrix& g = tp.gradRef(self);
    const DenseMatrix& y = tp.valueOf(self);
    DenseMatrix& ga = tp.gradRef(ia);
    for (size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i] * 0.5 / y.data()[i];
  });
}

Var scale(Var a, double c) {
  Tape& t = *a.tape;
  DenseMatrix out = t.value(a);
  for (size_t i = 0; i < out.size(); ++i) out.data()[i] *= c;
  const int ia = a.id;
  return t.emit(std::move(out), {ia}, [ia, c](Tape& tp, int self) {
    const DenseMatrix& g = tp.gradRef(self);
    DenseMatrix& ga = tp.gradRef(ia);
    for (size_t i = 0; i < g.size(); ++i) ga.data()[i] += c * g.data()[i];
  });
}

Var addScalar(Var a, double c) {
  Tape& t = *a.tape;
  DenseMatrix out = t.value(a);
  for (size_t i = 0; i < out.size(); ++i) out.data()[i] += c;
  const int ia = a.id;
  return t.emit(std::move(out), {ia}, [ia](Tape& tp, int self) {
    accumulate(tp.gradRef(ia), tp.gradRef(self));
  });
}

Var sum(Var a) {
  Tape& t = *a.tape;
  const DenseMatrix& v = t.value(a);
  double s = 0.0;
  for (size_t i = 0; i < v.size(); ++i) s += v.data()[i];
  const int ia = a.id;
  return t.emit(DenseMatrix(1, 1, {s}), {ia}, [ia](Tape& tp, int self) {
    const double g = tp.gradRef(self)(0, 0);
    DenseMatrix& ga = tp.gradRef(ia);
    for (size_t i = 0; i < ga.size(); ++i) ga.data()[i] += g;
  });
}

Var mean(Var a) {
  Tape& t = *a.tape;
  const DenseMatrix& v = t.value(a);
  if (v.size() == 0) throw ContractError("mean of empty matrix");
  double s = 0.0;
  for (size_t i = 0; i < v.size(); ++i) s += v.data()[i];
  const double n = static_cast<double>(v.size());
  const int ia = a.id;
  return t.emit(DenseMatrix(1, 1, {s / n}), {ia}, [ia, n](Tape& tp, int self) {
    const double g = tp.gradRef(self)(0, 0) / n;
    DenseMatrix& ga = tp.gradRef(ia);
    for (size_t i = 0; i < ga.size(); ++i) ga.data()[i] += g;
  });
}

Var addRowVector(Var x, Var bias) {
  requireSameTape(x, bias);
  Tape& t = *x.tape;
  const DenseMatrix& vx = t.value(x);
  const DenseMatrix& vb = t.value(bias);
  if (vb.rows() != 1 || vb.cols() != vx.cols())
    throw ShapeError("addRowVector: bias must be 1 x cols");
  DenseMatrix out = vx;
  for (int i = 0; i < out.rows(); ++i)
    for (int jj = 0; jj < out.cols(); ++jj) out(i, jj) += vb(0, jj);
  const int ix = x.id, ib = bias.id;
  return t.emit(std::move(out), {ix, ib}, [ix, ib](Tape& tp, int self) {
    const DenseMatrix& g = tp.gradRef(self);
    accumulate(tp.gradRef(ix), g);
    DenseMatrix& gb = tp.gradRef(ib);
    for (int i = 0; i < g.rows(); ++i)
      for (int jj = 0; jj < g.cols(); ++jj) gb(0, jj) += g(i, jj);
  });
}

Var concatCols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ContractError("concatCols: no inputs");
  Tape& t = *parts[0].tape;
  const int rows = t.value(parts[0]).rows();
  int cols = 0;
  std::vector<int> ids;
  for (Var p : parts) {
    requireSameTape(parts[0], p);
    if (t.value(p).rows() != rows) throw ShapeError("concatCols: row mismatch");
    cols += t.value(p).cols();
    ids.push_back(p.id);
  }
  DenseMatrix out(rows, cols);
  int off = 0;
  for (Var p : parts) {
    const DenseMatrix& v = t.value(p);
    for (int i = 0; i < rows; ++i)
      for (int jj = 0; jj < v.cols(); ++jj) out(i, off + jj) = v(i, jj);
    off += v.cols();
  }
  return t.emit(std::move(out), ids, [ids](Tape& tp, int self) {
    const DenseMatrix& g = tp.gradRef(self);
    int off2 = 0;
    for (int id : ids) {
      DenseMatrix& gi = tp.gradRef(id);
      for (int i = 0; i < gi.rows(); ++i)
        for (int jj = 0; jj < gi.cols(); ++jj) gi(i, jj) += g(i, off2 + jj);
      off2 += gi.cols();
    }
  });
}

Var selectRows(Var a, const std::vector<int>& rows) {
  Tape& t = *a.tape;
  const DenseMatrix& v = t.value(a);
  DenseMatrix out(static_cast<int>(rows.size()), v.cols());
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= v.rows()) throw ContractError("selectRows: index out of range");
    for (int jj = 0; jj < v.cols(); ++jj) out(static_cast<int>(i), jj) = v(rows[i], jj);
  }
  const int ia = a.id;
  auto idx = rows;
  return t.emit(std::move(out), {ia}, [ia, idx](Tape& tp, int self) {
    const DenseMatrix& g = tp.gradRef(self);
    DenseMatrix& ga = tp.gradRef(ia);
    for (size_t i = 0; i < idx.size(); ++i)
      for (int jj = 0; jj < g.cols(); ++jj) ga(idx[i], jj) += g(static_cast<int>(i), jj);
  });
}

Var rowSqDistance(Var x, const std::vector<double>& center) {
  Tape& t = *x.tape;
  const DenseMatrix& v = t.value(x);
  if (static_cast<int>(center.size()) != v.cols())
    throw ShapeError("rowSqDistance: center length != cols");
  DenseMatrix out(v.rows(), 1);
  for (int i = 0; i < v.rows(); ++i) {
    double s = 0.0;
    for (int jj = 0; jj < v.cols(); ++jj) {
      const double d = v(i, jj) - center[jj];
      s += d * d;
    }
    out(i, 0) = s;
  }
  const int ix = x.id;
  auto c = center;
  return t.emit(std::move(out), {ix}, [ix, c](Tape& tp, int self) {
    const DenseMatrix& g = tp.gradRef(self);
    const DenseMatrix& v2 = tp.valueOf(ix);
    DenseMatrix& gx = tp.gradRef(ix);
    for (int i = 0; i < v2.rows(); ++i)
      for (int jj = 0; jj < v2.cols(); ++jj)
        gx(i, jj) += g(i, 0) * 2.0 * (v2(i, jj) - c[jj]);
  });
}

Var weightedSum(Var a, const DenseMatrix& weights) {
  Tape& t = *a.tape;
  const DenseMatrix& v = t.value(a);
  if (!v.sameShape(weights)) throw ShapeError("weightedSum: weight shape mismatch");
  double s = 0.0;
  for (size_t i = 0; i < v.size(); ++i) s += v.data()[i] * weights.data()[i];
  const int ia = a.id;
  auto w = weights;
  return t.emit(DenseMatrix(1, 1, {s}), {ia}, [ia, w](Tape& tp, int self) {
    const double g = tp.gradRef(self)(0, 0);
    DenseMatrix& ga = tp.gradRef(ia);
    for (size_t i = 0; i < ga.size(); ++i) ga.data()[i] += g * w.data()[i];
  });
}

Var segmentSum(Var a, const std::vector<int>& segment, int segmentCount) {
  Tape& t = *a.tape;
  const DenseMatrix& v = t.value(a);
  if (static_cast<int>(segment.size()) != v.rows())
    throw ShapeError("segmentSum: segment length != rows");
  DenseMatrix out(segmentCount, v.cols());
  for (int i = 0; i < v.rows(); ++i) {
    if (segment[i] < 0 || segment[i] >= segmentCount)
      throw ContractError("segmentSum: segment id out of range");
    for (int jj = 0; jj < v.cols(); ++jj) out(segment[i], jj) += v(i, jj);
  }
  const int ia = a.id;
  auto seg = segment;
  return t.emit(std::move(out), {ia}, [ia, seg](Tape& tp, int self) {
    const DenseMatrix& g = tp.gradRef(self);
    DenseMatrix& ga = tp.gradRef(ia);
    for (int i = 0; i < ga.rows(); ++i)
      for (int jj = 0; jj < ga.cols(); ++jj) ga(i, jj) += g(seg[i], jj);
  });
}

Var neighborSum(Var a, const std::vector<std::vector<int>>& adjacency, double selfWeight) {
  Tape& t = *a.tape;
  const DenseMatrix& v = t.value(a);
  if (static_cast<int>(adjacency.size()) != v.rows())
    throw ShapeError("neighborSum: adjacency size != rows");
  DenseMatrix out(v.rows(), v.cols());
  for (int i = 0; i < v.rows(); ++i) {
    for (int jj = 0; jj < v.cols(); ++jj) out(i, jj) = selfWeight * v(i, jj);
    for (int u : adjacency[i]) {
      if (u < 0 || u >= v.rows()) throw ContractError("neighborSum: neighbor out of range");
      for (int jj = 0; jj < v.cols(); ++jj) out(i, jj) += v(u, jj);
    }
  }
  const int ia = a.id;
  const auto* adj = &adjacency;  // caller keeps the batch alive for the tape's lifetime
  return t.emit(std::move(out), {ia}, [ia, adj, selfWeight](Tape& tp, int self) {
    const DenseMatrix& g = tp.gradRef(self);
    DenseMatrix& ga = tp.gradRef(ia);
    for (int i = 0; i < g.rows(); ++i) {
      for (int jj = 0; jj < g.cols(); ++jj) ga(i, jj) += selfWeight * g(i, jj);
      for (int u : (*adj)[i])
        for (int jj = 0; jj < g.cols(); ++jj) ga(u, jj) += g(i, jj);
    }
  });
}

Var clampMin(Var a, double bound) {
  Tape& t = *a.tape;
  DenseMatrix out = t.value(a);
  for (size_t i = 0; i < out.size(); ++i) out.data()[i] = std::max(out.data()[i], bound);
  const int ia = a.id;
  return t.emit(std::move(out), {ia}, [ia, bound](Tape& tp, int self) {
    const DenseMatrix& g = tp.gradRef(self);
    const DenseMatrix& v = tp.valueOf(ia);
    DenseMatrix& ga = tp.gradRef(ia);
    for (size_t i = 0; i < g.size(); ++i)
      if (v.data()[i] > bound) ga.data()[i] += g.data()[i];
  });
}

Var clampMax(Var a, double bound) {
  Tape& t = *a.tape;
  DenseMatrix out = t.value(a);
  for (size_t i = 0; i < out.size(); ++i) out.data()[i] = std::min(out.data()[i], bound);
  const int ia = a.id;
  return t.emit(std::move(out), {ia}, [ia, bound](Tape& tp, int self) {
    const DenseMatrix& g = tp.gradRef(self);
    const DenseMatrix& v = tp.valueOf(ia);
    DenseMatrix& ga = tp.gradRef(ia);
    for (size_t i = 0; i < g.size(); ++i)
      if (v.data()[i] < bound) ga.data()[i] += g.data()[i];
  });
}

void sgdStep(const std::vector<Parameter*>& params, double learningRate, double weightDecay) {
  for (Parameter* p : params) {
    for (size_t i = 0; i < p->value.size(); ++i)
      p->value.data()[i] -= learningRate * (p->grad.data()[i] + weightDecay * p->value.data()[i]);
    p->zeroGrad();
  }
}

}  // namespace bihyper::ad
