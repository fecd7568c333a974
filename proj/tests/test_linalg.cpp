#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bihyper/errors.hpp"
#include "bihyper/linalg.hpp"
#include "bihyper/matrix.hpp"
#include "bihyper/rng.hpp"
#include "support/oracles.hpp"

using namespace bihyper;

namespace {

double orthonormalityError(const DenseMatrix& m) {
  const DenseMatrix gram = matmul(transpose(m), m);
  DenseMatrix eye = DenseMatrix::identity(gram.rows());
  return frobeniusNorm(subtract(gram, eye));
}

}  // namespace

TEST_CASE("matmul identity and hand cases") {
  Rng rng(7);
  DenseMatrix m = oracles::randomMatrix(rng, 3, 5);
  CHECK(oracles::maxAbsDiff(matmul(DenseMatrix::identity(3), m), m) == 0.0);

  DenseMatrix a(2, 2, {1, 2, 3, 4});
  DenseMatrix b(2, 1, {0, 1});
  DenseMatrix p = matmul(a, b);
  CHECK(p(0, 0) == 2.0);
  CHECK(p(1, 0) == 4.0);
}

TEST_CASE("matmul matches the triple-loop oracle") {
  Rng rng(11);
  DenseMatrix a = oracles::randomMatrix(rng, 5, 7);
  DenseMatrix b = oracles::randomMatrix(rng, 7, 3);
  CHECK(oracles::maxAbsDiff(matmul(a, b), oracles::naiveMatmul(a, b)) < 1e-12);
}

TEST_CASE("matmul rejects mismatched shapes") {
  DenseMatrix a(2, 3), b(2, 3);
  CHECK_THROWS_AS(matmul(a, b), ShapeError);
}

TEST_CASE("matmul associativity on random conformable triples") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    DenseMatrix a = oracles::randomMatrix(rng, 4, 6);
    DenseMatrix b = oracles::randomMatrix(rng, 6, 5);
    DenseMatrix c = oracles::randomMatrix(rng, 5, 3);
    DenseMatrix left = matmul(matmul(a, b), c);
    DenseMatrix right = matmul(a, matmul(b, c));
    CHECK(frobeniusNorm(subtract(left, right)) <= 1e-10 * std::max(1.0, frobeniusNorm(left)));
  }
}

TEST_CASE("svd of the identity") {
  SvdFactors f = svd(DenseMatrix::identity(3));
  REQUIRE(f.rank == 3);
  for (double s : f.sigma) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("svd of a diagonal matrix") {
  DenseMatrix d(2, 2, {3, 0, 0, 2});
  SvdFactors f = svd(d);
  CHECK(f.sigma[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.sigma[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(oracles::maxAbsDiff(f.u, DenseMatrix::identity(2)) < 1e-12);
  CHECK(oracles::maxAbsDiff(f.v, DenseMatrix::identity(2)) < 1e-12);
}

TEST_CASE("svd reconstruction on random shapes") {
  Rng rng(17);
  for (auto [r, c] : {std::pair{8, 4}, {4, 8}, {16, 16}, {64, 16}, {256, 64}, {5, 1}, {1, 5}}) {
    DenseMatrix m = oracles::randomMatrix(rng, r, c);
    SvdFactors f = svd(m);
    REQUIRE(f.rank == std::min(r, c));
    const double relErr = frobeniusNorm(subtract(reconstruct(f), m)) / frobeniusNorm(m);
    CHECK(relErr <= 1e-10);
    CHECK(orthonormalityError(f.u) <= 1e-8 * f.rank);
    CHECK(orthonormalityError(f.v) <= 1e-8 * f.rank);
    for (size_t i = 1; i < f.sigma.size(); ++i) CHECK(f.sigma[i - 1] >= f.sigma[i]);
    for (double s : f.sigma) CHECK(s >= 0.0);
  }
}

TEST_CASE("svd handles rank-deficient and zero matrices") {
  Rng rng(19);
  DenseMatrix m = oracles::randomMatrix(rng, 6, 4);
  for (int i = 0; i < 6; ++i) m(i, 3) = m(i, 1);  // duplicate column
  SvdFactors f = svd(m);
  CHECK(f.sigma[3] <= 1e-12 * f.sigma[0]);
  CHECK(orthonormalityError(f.u) <= 1e-8 * f.rank);
  CHECK(frobeniusNorm(subtract(reconstruct(f), m)) <= 1e-10 * frobeniusNorm(m));

  SvdFactors z = svd(DenseMatrix(3, 2));
  CHECK(z.sigma[0] == 0.0);
  CHECK(orthonormalityError(z.u) <= 1e-8 * z.rank);
}

TEST_CASE("singular values match sqrt of Gram eigenvalues (power iteration oracle)") {
  for (uint64_t seed : {23ull, 29ull, 31ull}) {
    Rng rng(seed);
    DenseMatrix m = oracles::randomMatrix(rng, 8, 8);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < i; ++j) m(i, j) = m(j, i);  // symmetrize
    SvdFactors f = svd(m);
    DenseMatrix gram = matmul(transpose(m), m);
    Rng oracleRng(seed + 1000);
    const auto eigs = oracles::powerIterationEigenvalues(gram, 8, oracleRng);
    for (int i = 0; i < 8; ++i)
      CHECK(f.sigma[i] == doctest::Approx(std::sqrt(std::max(0.0, eigs[i]))).epsilon(1e-8));
  }
}

TEST_CASE("svd sign convention pins the factor signs") {
  Rng rng(37);
  DenseMatrix m = oracles::randomMatrix(rng, 10, 4);
  SvdFactors a = svd(m);
  SvdFactors b = svd(m);
  CHECK(oracles::maxAbsDiff(a.v, b.v) == 0.0);
  CHECK(oracles::maxAbsDiff(a.u, b.u) == 0.0);
  for (int c = 0; c < a.v.cols(); ++c) {
    double best = 0.0;
    int arg = 0;
    for (int i = 0; i < a.v.rows(); ++i)
      if (std::abs(a.v(i, c)) > best) {
        best = std::abs(a.v(i, c));
        arg = i;
      }
    CHECK(a.v(arg, c) >= 0.0);
  }
}

TEST_CASE("svd reports non-convergence when the sweep cap is too small") {
  Rng rng(41);
  DenseMatrix m = oracles::randomMatrix(rng, 6, 6);
  CHECK_THROWS_AS(svdWithOptions(m, 0, 1e-12), NumericError);
}

TEST_CASE("svd rejects empty and non-finite input") {
  CHECK_THROWS_AS(svd(DenseMatrix(0, 3)), ShapeError);
  DenseMatrix bad(2, 2, {1.0, 2.0, std::nan(""), 0.0});
  CHECK_THROWS_AS(svd(bad), NumericError);
}
