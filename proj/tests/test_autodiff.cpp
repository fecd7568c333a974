#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bihyper/autodiff.hpp"
#include "bihyper/errors.hpp"
#include "support/oracles.hpp"

using namespace bihyper;
namespace adx = bihyper::ad;

TEST_CASE("softplus and relu values") {
  adx::Tape tape;
  adx::Var x = tape.input(DenseMatrix(1, 3, {0.0, -1.5, 2.0}));
  const DenseMatrix& sp = tape.value(adx::softplus(x));
  CHECK(sp(0, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  const DenseMatrix& r = tape.value(adx::relu(x));
  CHECK(r(0, 1) == 0.0);
  CHECK(r(0, 2) == 2.0);
}

TEST_CASE("softplus is stable for large magnitudes") {
  adx::Tape tape;
  adx::Var x = tape.input(DenseMatrix(1, 2, {800.0, -800.0}));
  const DenseMatrix& sp = tape.value(adx::softplus(x));
  CHECK(sp(0, 0) == doctest::Approx(800.0));
  CHECK(sp(0, 1) == 0.0);
  CHECK(std::isfinite(sp(0, 0)));
}

TEST_CASE("rowwise squared distance basics") {
  adx::Tape tape;
  adx::Var x = tape.input(DenseMatrix(1, 2, {1.0, 0.0}));
  const DenseMatrix& d = tape.value(adx::rowSqDistance(x, {0.0, 0.0}));
  CHECK(d(0, 0) == 1.0);
}

TEST_CASE("backward of a squared distance") {
  adx::Tape tape;
  adx::Var x = tape.input(DenseMatrix(1, 2, {3.0, 4.0}));
  adx::Var loss = adx::sum(adx::rowSqDistance(x, {0.0, 0.0}));
  tape.backward(loss);
  CHECK(tape.grad(x)(0, 0) == doctest::Approx(6.0));
  CHECK(tape.grad(x)(0, 1) == doctest::Approx(8.0));
}

TEST_CASE("backward of summed softplus at zero") {
  adx::Tape tape;
  adx::Var x = tape.input(DenseMatrix(2, 2));
  tape.backward(adx::sum(adx::softplus(x)));
  for (size_t i = 0; i < 4; ++i) CHECK(tape.grad(x).data()[i] == doctest::Approx(0.5));
}

TEST_CASE("backward demands a scalar loss and runs once") {
  adx::Tape tape;
  adx::Var x = tape.input(DenseMatrix(2, 2));
  CHECK_THROWS_AS(tape.backward(x), ContractError);
  adx::Var loss = adx::sum(x);
  tape.backward(loss);
  CHECK_THROWS_AS(tape.backward(loss), ContractError);
}

TEST_CASE("three-layer MLP gradient matches finite differences") {
  Rng rng(101);
  std::vector<DenseMatrix> inputs = {
      oracles::randomMatrix(rng, 3, 4),  // x
      oracles::randomMatrix(rng, 4, 5),  // w1
      oracles::randomMatrix(rng, 1, 5),  // b1
      oracles::randomMatrix(rng, 5, 4),  // w2
      oracles::randomMatrix(rng, 1, 4),  // b2
      oracles::randomMatrix(rng, 4, 2),  // w3
      oracles::randomMatrix(rng, 1, 2),  // b3
  };
  const double err = oracles::maxFiniteDiffError(inputs, [](adx::Tape& t, std::vector<adx::Var>& v) {
    adx::Var h = adx::relu(adx::addRowVector(adx::matmul(v[0], v[1]), v[2]));
    h = adx::relu(adx::addRowVector(adx::matmul(h, v[3]), v[4]));
    h = adx::addRowVector(adx::matmul(h, v[5]), v[6]);
    return adx::sum(adx::softplus(h));
  });
  CHECK(err <= 1e-4);
}

TEST_CASE("every primitive matches finite differences across seeds") {
  double worst = 0.0;
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    Rng rng(seed);
    DenseMatrix a = oracles::randomMatrix(rng, 3, 4);
    DenseMatrix b = oracles::randomMatrix(rng, 3, 4);
    DenseMatrix c = oracles::randomMatrix(rng, 4, 3);
    DenseMatrix w = oracles::randomMatrix(rng, 3, 4);
    DenseMatrix pos = oracles::randomMatrix(rng, 3, 4, 0.5, 2.0);
    oracles::avoidKink(a, 0.0, 0.05);   // relu kink
    oracles::avoidKink(a, 0.25, 0.05);  // clamp kinks
    oracles::avoidKink(a, -0.25, 0.05);
    std::vector<double> center = {0.1, -0.2, 0.3, 0.4};
    const std::vector<int> segment = {0, 1, 1};
    const std::vector<std::vector<int>> adjacency = {{1}, {0, 2}, {1}};
    const std::vector<int> rows = {2, 0, 1, 0};

    auto linear = [&](adx::Var out, adx::Tape& t) { return adx::weightedSum(out, w); };

    struct Case {
      const char* name;
      oracles::BuildLoss build;
    };
    const DenseMatrix wTall = oracles::randomMatrix(rng, 4, 3);
    const DenseMatrix wWide = oracles::randomMatrix(rng, 3, 3);
    const DenseMatrix wSeg = oracles::randomMatrix(rng, 2, 4);
    const DenseMatrix wRows = oracles::randomMatrix(rng, 4, 4);
    const DenseMatrix wCol = oracles::randomMatrix(rng, 3, 1);
    const DenseMatrix wCat = oracles::randomMatrix(rng, 3, 8);

    std::vector<Case> cases = {
        {"add", [&](adx::Tape& t, std::vector<adx::Var>& v) {
           return adx::weightedSum(adx::add(v[0], v[1]), w);
         }},
        {"sub", [&](adx::Tape& t, std::vector<adx::Var>& v) {
           return adx::weightedSum(adx::sub(v[0], v[1]), w);
         }},
        {"mul", [&](adx::Tape& t, std::vector<adx::Var>& v) {
           return adx::weightedSum(adx::mul(v[0], v[1]), w);
         }},
        {"matmul", [&](adx::Tape& t, std::vector<adx::Var>& v) {
           return adx::weightedSum(adx::matmul(v[0], v[2]), wWide);
         }},
        {"transpose", [&](adx::Tape& t, std::vector<adx::Var>& v) {
           return adx::weightedSum(adx::transpose(v[0]), wTall);
         }},
        {"relu", [&](adx::Tape& t, std::vector<adx::Var>& v) {
           return adx::weightedSum(adx::relu(v[0]), w);
         }},
        {"softplus", [&](adx::Tape& t, std::vector<adx::Var>& v) {
           return adx::weightedSum(adx::softplus(v[0]), w);
         }},
        {"sqrt", [&](adx::Tape& t, std::vector<adx::Var>& v) {
           return adx::weightedSum(adx::sqrtElem(v[4]), w);
         }},
        {"scale", [&](adx::Tape& t, std::vector<adx::Var>& v) {
           return adx::weightedSum(adx::scale(v[0], -2.5), w);
         }},
        {"addScalar", [&](adx::Tape& t, std::vector<adx::Var>& v) {
           return adx::weightedSum(adx::addScalar(v[0], 1.25), w);
         }},
        {"sum", [&](adx::Tape& t, std::vector<adx::Var>& v) { return adx::sum(v[0]); }},
        {"mean", [&](adx::Tape& t, std::vector<adx::Var>& v) { return adx::mean(v[0]); }},
        {"addRowVector", [&](adx::Tape& t, std::vector<adx::Var>& v) {
           return adx::weightedSum(adx::addRowVector(v[0], v[3]), w);
         }},
        {"concatCols", [&](adx::Tape& t, std::vector<adx::Var>& v) {
           std::vector<adx::Var> parts = {v[0], v[1]};
           return adx::weightedSum(adx::concatCols(parts), wCat);
         }},
        {"selectRows", [&](adx::Tape& t, std::vector<adx::Var>& v) {
           return adx::weightedSum(adx::selectRows(v[0], rows), wRows);
         }},
        {"rowSqDistance", [&](adx::Tape& t, std::vector<adx::Var>& v) {
           return adx::weightedSum(adx::rowSqDistance(v[0], center), wCol);
         }},
        {"weightedSum", [&](adx::Tape& t, std::vector<adx::Var>& v) {
           return adx::weightedSum(v[0], w);
         }},
        {"segmentSum", [&](adx::Tape& t, std::vector<adx::Var>& v) {
           return adx::weightedSum(adx::segmentSum(v[0], segment, 2), wSeg);
         }},
        {"neighborSum", [&](adx::Tape& t, std::vector<adx::Var>& v) {
           return adx::weightedSum(adx::neighborSum(v[0], adjacency, 1.0), w);
         }},
        {"clampMin", [&](adx::Tape& t, std::vector<adx::Var>& v) {
           return adx::weightedSum(adx::clampMin(v[0], 0.25), w);
         }},
        {"clampMax", [&](adx::Tape& t, std::vector<adx::Var>& v) {
           return adx::weightedSum(adx::clampMax(v[0], -0.25), w);
         }},
    };
    (void)linear;
    const std::vector<DenseMatrix> inputs = {a, b, c, oracles::randomMatrix(rng, 1, 4), pos};
    for (const Case& cse : cases) {
      const double err = oracles::maxFiniteDiffError(inputs, cse.build);
      INFO(cse.name << " seed " << seed);
      CHECK(err <= 1e-4);
      worst = std::max(worst, err);
    }
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("gradient of a batch sum equals the sum of per-sample gradients") {
  Rng rng(202);
  DenseMatrix batch = oracles::randomMatrix(rng, 5, 3);
  std::vector<double> center = {0.5, -0.5, 0.25};

  adx::Tape whole;
  adx::Var xb = whole.input(batch);
  whole.backward(adx::sum(adx::rowSqDistance(xb, center)));

  for (int i = 0; i < 5; ++i) {
    DenseMatrix row(1, 3);
    for (int j = 0; j < 3; ++j) row(0, j) = batch(i, j);
    adx::Tape single;
    adx::Var xr = single.input(row);
    single.backward(adx::sum(adx::rowSqDistance(xr, center)));
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(whole.grad(xb)(i, j) - single.grad(xr)(0, j)) <= 1e-10);
  }
}

TEST_CASE("sgd step applies decay and zeroes gradients") {
  adx::Parameter p(DenseMatrix(1, 1, {1.0}));
  adx::sgdStep({&p}, 1.0, 0.1);  // zero grad, pure decay
  CHECK(p.value(0, 0) == doctest::Approx(0.9));

  adx::Parameter q(DenseMatrix(1, 1, {0.0}));
  q.grad(0, 0) = 2.0;
  adx::sgdStep({&q}, 0.5, 0.0);
  CHECK(q.value(0, 0) == doctest::Approx(-1.0));
  CHECK(q.grad(0, 0) == 0.0);
}

TEST_CASE("sgd matches a hand-rolled scalar oracle on a quadratic") {
  // loss = (x - 3)^2 + 2 * (y + 1)^2 with decay mu
  double x = 0.5, y = -0.25;
  const double lr = 0.1, mu = 0.05;
  adx::Parameter px(DenseMatrix(1, 1, {x}));
  adx::Parameter py(DenseMatrix(1, 1, {y}));

  adx::Tape tape;
  adx::Var vx = tape.param(px);
  adx::Var vy = tape.param(py);
  adx::Var loss = adx::add(adx::sum(adx::rowSqDistance(vx, {3.0})),
                           adx::scale(adx::sum(adx::rowSqDistance(vy, {-1.0})), 2.0));
  tape.backward(loss);
  adx::sgdStep({&px, &py}, lr, mu);

  const double gx = 2.0 * (x - 3.0);
  const double gy = 4.0 * (y + 1.0);
  CHECK(px.value(0, 0) == doctest::Approx(x - lr * (gx + mu * x)).epsilon(1e-12));
  CHECK(py.value(0, 0) == doctest::Approx(y - lr * (gy + mu * y)).epsilon(1e-12));
}

TEST_CASE("parameters appearing twice accumulate both contributions") {
  adx::Parameter p(DenseMatrix(1, 1, {2.0}));
  adx::Tape tape;
  adx::Var a = tape.param(p);
  adx::Var b = tape.param(p);
  tape.backward(adx::sum(adx::mul(a, b)));  // d(p^2)/dp = 2p
  CHECK(p.grad(0, 0) == doctest::Approx(4.0));
}
