#pragma once

#include <cstdint>
#include <vector>

#include "bihyper/matrix.hpp"
#include "bihyper/metrics.hpp"

namespace bihyper {

// Euclidean norms of n i.i.d. standard normal vectors in d dimensions.
struct GaussianSample {
  int dimension = 0;
  int count = 0;
  std::vector<double> distances;
  uint64_t seed = 0;
};

GaussianSample sampleDistances(int dimension, int count, uint64_t seed);

// Empirical distance quantiles per dimension; values(i, j) is the
// quantiles[j] quantile at dims[i].
struct QuantileTable {
  std::vector<int> dims;
  std::vector<double> quantiles;
  DenseMatrix values;
};

QuantileTable quantileTable(const std::vector<int>& dims, const std::vector<double>& quantiles,
                            int count, uint64_t seed);

// Empirical check of P[||z|| >= sqrt(d - 2*sqrt(d*t))] >= 1 - e^{-t}
// with a 3-sigma sampling slack on the Monte-Carlo fraction.
struct Prop1Check {
  double bound = 0.0;
  double requiredProbability = 0.0;
  double empiricalFraction = 0.0;
  double slack = 0.0;
  bool holds = false;
};

Prop1Check checkProp1(int dimension, double t, int count, uint64_t seed);

// 16-dimensional mixture: 10,000 normals from N(0, I) against three anomaly
// groups (1,000 from N(mu1, I/10), 500 from N(mu2, I), 2,000 from N(mu3, 5I),
// each mu uniform in [0,1]^16). Radii come from the normals' distance
// quantiles at nu; both score styles share the true center 0.
struct MixtureDemo {
  double nu = 0.05;
  double rHat = 0.0;  // (1-nu)-quantile of the normals
  double rMin = 0.0, rMax = 0.0;
  std::vector<double> normalDistances;
  std::vector<std::vector<double>> groupDistances;  // 3 anomaly groups
  ScoredSet dohscScores;   // all normals + all anomalies, label 1 = anomaly
  ScoredSet do2hscScores;
  std::vector<double> dohscGroupAuc;   // per anomaly group vs normals
  std::vector<double> do2hscGroupAuc;
  std::vector<double> dohscGroupDetectionRate;   // fraction scoring positive
  std::vector<double> do2hscGroupDetectionRate;
  double normalInsideFraction = 0.0;  // normals with rMin <= d <= rMax
};

MixtureDemo mixtureDemo(uint64_t seed, double nu = 0.05);

}  // namespace bihyper
