#pragma once

// Test-side oracles, deliberately independent of the library's own
// implementation paths: naive matmul, pairwise AUC, sort-and-count
// quantiles, power iteration and a two-sided Jacobi eigensolver.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "bihyper/autodiff.hpp"
#include "bihyper/matrix.hpp"
#include "bihyper/rng.hpp"

namespace oracles {

using bihyper::DenseMatrix;
using bihyper::Rng;

inline DenseMatrix randomMatrix(Rng& rng, int rows, int cols, double lo = -1.0, double hi = 1.0) {
  DenseMatrix m(rows, cols);
  for (size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.nextUniform(lo, hi);
  return m;
}

inline DenseMatrix naiveMatmul(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (int k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

inline double maxAbsDiff(const DenseMatrix& a, const DenseMatrix& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

// Smallest value v with count(x <= v)/N >= q, by explicit counting.
inline double quantileOracle(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  for (double candidate : values) {
    long count = 0;
    for (double x : values) count += x <= candidate;
    if (static_cast<double>(count) / n >= q) return candidate;
  }
  return values.back();
}

// O(n^2) pairwise AUC with half credit for ties.
inline double pairwiseAucOracle(const std::vector<double>& scores,
                                const std::vector<int>& labels) {
  double wins = 0.0;
  long pairs = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 0) continue;
    for (size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j])
        wins += 1.0;
      else if (scores[i] == scores[j])
        wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

// Dominant eigenvalues of a symmetric PSD matrix by power iteration with
// deflation.
inline std::vector<double> powerIterationEigenvalues(DenseMatrix m, int count, Rng& rng,
                                                     int iterations = 3000) {
  const int n = m.rows();
  std::vector<double> eigs;
  for (int e = 0; e < count; ++e) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.nextUniform(-1.0, 1.0);
    double lambda = 0.0;
    for (int it = 0; it < iterations; ++it) {
      std::vector<double> w(n, 0.0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) w[i] += m(i, j) * v[j];
      double norm = 0.0;
      for (double x : w) norm += x * x;
      norm = std::sqrt(norm);
      if (norm == 0.0) break;
      for (int i = 0; i < n; ++i) v[i] = w[i] / norm;
      lambda = norm;
    }
    // Rayleigh quotient for the final estimate
    double num = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) num += v[i] * m(i, j) * v[j];
    lambda = num;
    eigs.push_back(lambda);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) -= lambda * v[i] * v[j];
  }
  return eigs;
}

// Cyclic two-sided Jacobi eigendecomposition of a symmetric matrix;
// eigenvalues descending, eigenvectors in columns.
inline void symmetricEigen(DenseMatrix a, std::vector<double>& eigenvalues,
                           DenseMatrix& vectors) {
  const int n = a.rows();
  vectors = DenseMatrix::identity(n);
  for (int sweep = 0; sweep < 200; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
    if (off < 1e-14) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t =
            (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int i = 0; i < n; ++i) {
          const double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (int i = 0; i < n; ++i) {
          const double api = a(p, i), aqi = a(q, i);
          a(p, i) = c * api - s * aqi;
          a(q, i) = s * api + c * aqi;
        }
        for (int i = 0; i < n; ++i) {
          const double vip = vectors(i, p), viq = vectors(i, q);
          vectors(i, p) = c * vip - s * viq;
          vectors(i, q) = s * vip + c * viq;
        }
      }
    }
  }
  eigenvalues.resize(n);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return a(x, x) > a(y, y); });
  DenseMatrix sorted(n, n);
  for (int c = 0; c < n; ++c) {
    eigenvalues[c] = a(order[c], order[c]);
    for (int i = 0; i < n; ++i) sorted(i, c) = vectors(i, order[c]);
  }
  vectors = sorted;
}

// Central finite differences for a scalar loss built from leaf inputs.
// `build` gets a fresh tape plus input Vars and returns the loss Var.
// Returns the max relative error between analytic and numeric gradients.
using BuildLoss = std::function<bihyper::ad::Var(bihyper::ad::Tape&,
                                                 std::vector<bihyper::ad::Var>&)>;

inline double maxFiniteDiffError(const std::vector<DenseMatrix>& inputs, const BuildLoss& build,
                                 double step = 1e-5) {
  namespace ad = bihyper::ad;

  auto evaluate = [&](const std::vector<DenseMatrix>& values) {
    ad::Tape tape;
    std::vector<ad::Var> vars;
    for (const auto& v : values) vars.push_back(tape.input(v));
    ad::Var loss = build(tape, vars);
    return tape.value(loss)(0, 0);
  };

  ad::Tape tape;
  std::vector<ad::Var> vars;
  for (const auto& v : inputs) vars.push_back(tape.input(v));
  ad::Var loss = build(tape, vars);
  tape.backward(loss);

  double worst = 0.0;
  for (size_t k = 0; k < inputs.size(); ++k) {
    const DenseMatrix& analytic = tape.grad(vars[k]);
    for (size_t e = 0; e < inputs[k].size(); ++e) {
      std::vector<DenseMatrix> plus = inputs, minus = inputs;
      plus[k].data()[e] += step;
      minus[k].data()[e] -= step;
      const double numeric = (evaluate(plus) - evaluate(minus)) / (2.0 * step);
      const double a = analytic.data()[e];
      const double err = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
      worst = std::max(worst, err);
    }
  }
  return worst;
}

// Nudges entries away from a kink location so finite differences stay valid.
inline void avoidKink(DenseMatrix& m, double kink, double margin) {
  for (size_t i = 0; i < m.size(); ++i) {
    const double d = m.data()[i] - kink;
    if (std::abs(d) < margin) m.data()[i] = kink + (d >= 0 ? margin : -margin);
  }
}

}  // namespace oracles
