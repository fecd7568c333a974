#include "bihyper/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace bihyper {

namespace {

constexpr int kDefaultMaxSweeps = 100;
constexpr double kDefaultTol = 1e-12;

double columnDot(const DenseMatrix& a, int p, int q) {
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i) s += a(i, p) * a(i, q);
  return s;
}

// Fill u columns whose singular value is numerically zero with unit vectors
// orthogonal to everything already placed, so u keeps orthonormal columns.
void completeOrthonormal(DenseMatrix& u, const std::vector<bool>& filled) {
  const int n = u.rows();
  const int r = u.cols();
  std::vector<int> done;
  for (int j = 0; j < r; ++j)
    if (filled[j]) done.push_back(j);

  for (int j = 0; j < r; ++j) {
    if (filled[j]) continue;
    int best = -1;
    double bestNorm = -1.0;
    std::vector<double> bestVec;
    for (int e = 0; e < n; ++e) {
      std::vector<double> cand(n, 0.0);
      cand[e] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (int d : done) {
          double dot = 0.0;
          for (int i = 0; i < n; ++i) dot += cand[i] * u(i, d);
          for (int i = 0; i < n; ++i) cand[i] -= dot * u(i, d);
        }
      }
      double norm = 0.0;
      for (double x : cand) norm += x * x;
      norm = std::sqrt(norm);
      if (norm > bestNorm) {
        bestNorm = norm;
        best = e;
        bestVec = cand;
      }
      if (norm > 0.9) break;  // canonical vector already mostly outside span
    }
    if (best < 0 || bestNorm <= 0.0)
      throw NumericError("svd: unable to complete orthonormal basis");
    for (int i = 0; i < n; ++i) u(i, j) = bestVec[i] / bestNorm;
    done.push_back(j);
  }
}

}  // namespace

SvdFactors svdWithOptions(const DenseMatrix& m, int maxSweeps, double tol) {
  if (m.rows() < 1 || m.cols() < 1) throw ShapeError("svd: empty matrix");
  if (!m.allFinite()) throw NumericError("svd: input has non-finite entries");

  const bool transposed = m.rows() < m.cols();
  DenseMatrix a = transposed ? transpose(m) : m;
  const int n = a.rows();
  const int k = a.cols();

  DenseMatrix j = DenseMatrix::identity(k);

  double frobSq = 0.0;
  for (size_t i = 0; i < a.size(); ++i) frobSq += a.data()[i] * a.data()[i];
  // Pairwise criterion: rotating until |a_p . a_q| <= pairTol * |a_p||a_q|
  // bounds every u_p . u_q by pairTol directly, independent of column scale,
  // and is stricter than the tol * ||A||_F^2 stop the caller asked for.
  const double pairTol = std::min(tol, 1e-14);

  bool converged = frobSq == 0.0;
  for (int sweep = 0; sweep < maxSweeps && !converged; ++sweep) {
    int rotations = 0;
    for (int p = 0; p < k - 1; ++p) {
      for (int q = p + 1; q < k; ++q) {
        const double gamma = columnDot(a, p, q);
        const double alpha = columnDot(a, p, p);
        const double beta = columnDot(a, q, q);
        if (std::abs(gamma) <= pairTol * std::sqrt(alpha * beta)) continue;
        const double tau = (beta - alpha) / (2.0 * gamma);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int i = 0; i < n; ++i) {
          const double ap = a(i, p), aq = a(i, q);
          a(i, p) = c * ap - s * aq;
          a(i, q) = s * ap + c * aq;
        }
        for (int i = 0; i < k; ++i) {
          const double jp = j(i, p), jq = j(i, q);
          j(i, p) = c * jp - s * jq;
          j(i, q) = s * jp + c * jq;
        }
        ++rotations;
      }
    }
    if (rotations == 0) converged = true;
  }
  if (!converged && frobSq > 0.0) {
    // The cap may have landed exactly on convergence; accept if the
    // off-diagonal residual meets the requested Frobenius-relative tolerance.
    double residual = 0.0;
    for (int p = 0; p < k - 1; ++p)
      for (int q = p + 1; q < k; ++q)
        residual = std::max(residual, std::abs(columnDot(a, p, q)));
    if (residual > tol * frobSq)
      throw NumericError("svd: no convergence after " + std::to_string(maxSweeps) +
                         " sweeps, off-diagonal residual " + std::to_string(residual / frobSq) +
                         " relative to squared Frobenius norm");
  }

  std::vector<double> norms(k);
  for (int c = 0; c < k; ++c) norms[c] = std::sqrt(columnDot(a, c, c));

  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return norms[x] > norms[y]; });

  SvdFactors f;
  f.rank = k;
  f.sigma.resize(k);
  f.u = DenseMatrix(n, k);
  f.v = DenseMatrix(k, k);

  // Columns with nonzero norm are orthogonal within pairTol after the sweep
  // loop, so they normalize safely; exact zeros get an orthonormal completion.
  const double zeroTol = std::sqrt(frobSq) * 1e-200;
  std::vector<bool> filled(k, false);
  for (int c = 0; c < k; ++c) {
    const int src = order[c];
    f.sigma[c] = norms[src];
    for (int i = 0; i < k; ++i) f.v(i, c) = j(i, src);
    if (norms[src] > zeroTol) {
      for (int i = 0; i < n; ++i) f.u(i, c) = a(i, src) / norms[src];
      filled[c] = true;
    }
  }
  completeOrthonormal(f.u, filled);

  if (transposed) std::swap(f.u, f.v);

  // Sign convention on the returned v.
  for (int c = 0; c < f.v.cols(); ++c) {
    int arg = 0;
    double best = -1.0;
    for (int i = 0; i < f.v.rows(); ++i) {
      if (std::abs(f.v(i, c)) > best) {
        best = std::abs(f.v(i, c));
        arg = i;
      }
    }
    if (f.v(arg, c) < 0.0) {
      for (int i = 0; i < f.v.rows(); ++i) f.v(i, c) = -f.v(i, c);
      for (int i = 0; i < f.u.rows(); ++i) f.u(i, c) = -f.u(i, c);
    }
  }
  return f;
}

SvdFactors svd(const DenseMatrix& m) { return svdWithOptions(m, kDefaultMaxSweeps, kDefaultTol); }

DenseMatrix reconstruct(const SvdFactors& f) {
  DenseMatrix us = f.u;
  for (int i = 0; i < us.rows(); ++i)
    for (int c = 0; c < us.cols(); ++c) us(i, c) *= f.sigma[c];
  return matmul(us, transpose(f.v));
}

}  // namespace bihyper
