#include "bihyper/soap_bubble.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <string>

#include "bihyper/detector.hpp"
#include "bihyper/errors.hpp"
#include "bihyper/rng.hpp"
#include "bihyper/stats.hpp"
#include "bihyper/util.hpp"

namespace bihyper {

namespace {

constexpr int kChunk = 4096;

// Norms for one chunk with its own derived seed, so the stream is identical
// no matter how chunks are scheduled.
void sampleChunk(int dimension, int offset, int count, uint64_t seed, std::vector<double>& out) {
  Rng rng(Rng::derive(seed, static_cast<uint64_t>(offset / kChunk)));
  for (int i = 0; i < count; ++i) {
    double sq = 0.0;
    for (int j = 0; j < dimension; ++j) {
      const double z = rng.nextNormal();
      sq += z * z;
    }
    out[offset + i] = std::sqrt(sq);
  }
}

}  // namespace

GaussianSample sampleDistances(int dimension, int count, uint64_t seed) {
  if (dimension < 1 || count < 1)
    throw ContractError("sampleDistances: dimension and count must be >= 1");
  GaussianSample s;
  s.dimension = dimension;
  s.count = count;
  s.seed = seed;
  s.distances.resize(count);

  const int chunks = (count + kChunk - 1) / kChunk;
  const int threads = std::min(workerThreadCap(), chunks);
  if (threads <= 1) {
    for (int c = 0; c < chunks; ++c)
      sampleChunk(dimension, c * kChunk, std::min(kChunk, count - c * kChunk), seed, s.distances);
    return s;
  }
  std::vector<std::future<void>> pending;
  for (int t = 0; t < threads; ++t) {
    pending.push_back(std::async(std::launch::async, [&, t] {
      for (int c = t; c < chunks; c += threads)
        sampleChunk(dimension, c * kChunk, std::min(kChunk, count - c * kChunk), seed,
                    s.distances);
    }));
  }
  for (auto& f : pending) f.get();
  return s;
}

QuantileTable quantileTable(const std::vector<int>& dims, const std::vector<double>& quantiles,
                            int count, uint64_t seed) {
  for (double q : quantiles)
    if (q <= 0.0 || q >= 1.0) throw ContractError("quantileTable: quantiles must lie in (0, 1)");
  QuantileTable table;
  table.dims = dims;
  table.quantiles = quantiles;
  table.values = DenseMatrix(static_cast<int>(dims.size()), static_cast<int>(quantiles.size()));
  for (size_t i = 0; i < dims.size(); ++i) {
    const GaussianSample s =
        sampleDistances(dims[i], count, Rng::derive(seed, 0xD000 + static_cast<uint64_t>(i)));
    for (size_t j = 0; j < quantiles.size(); ++j)
      table.values(static_cast<int>(i), static_cast<int>(j)) =
          empiricalQuantile(s.distances, quantiles[j]);
  }
  return table;
}

Prop1Check checkProp1(int dimension, double t, int count, uint64_t seed) {
  if (t < 0.0) throw ContractError("checkProp1: t must be >= 0");
  Prop1Check check;
  const double inner = dimension - 2.0 * std::sqrt(dimension * t);
  check.bound = inner > 0.0 ? std::sqrt(inner) : 0.0;
  check.requiredProbability = 1.0 - std::exp(-t);

  const GaussianSample s = sampleDistances(dimension, count, seed);
  long hits = 0;
  for (double d : s.distances) hits += d >= check.bound;
  check.empiricalFraction = static_cast<double>(hits) / count;

  const double p = check.requiredProbability;
  check.slack = 3.0 * std::sqrt(p * (1.0 - p) / count);
  check.holds = check.empiricalFraction >= p - check.slack;
  return check;
}

MixtureDemo mixtureDemo(uint64_t seed, double nu) {
  if (nu <= 0.0 || nu >= 0.5) throw ContractError("mixtureDemo: nu must lie in (0, 0.5)");
  constexpr int kDim = 16;
  constexpr int kNormals = 10000;
  const int groupSizes[3] = {1000, 500, 2000};
  const double groupStd[3] = {std::sqrt(1.0 / 10.0), 1.0, std::sqrt(5.0)};

  MixtureDemo demo;
  demo.nu = nu;
  demo.normalDistances = sampleDistances(kDim, kNormals, Rng::derive(seed, 1)).distances;

  Rng rng(Rng::derive(seed, 2));
  demo.groupDistances.resize(3);
  for (int g = 0; g < 3; ++g) {
    double mean[kDim];
    for (double& m : mean) m = rng.nextUniform();
    demo.groupDistances[g].resize(groupSizes[g]);
    for (int i = 0; i < groupSizes[g]; ++i) {
      double sq = 0.0;
      for (double m : mean) {
        const double x = m + groupStd[g] * rng.nextNormal();
        sq += x * x;
      }
      demo.groupDistances[g][i] = std::sqrt(sq);
    }
  }

  demo.rHat = empiricalQuantile(demo.normalDistances, 1.0 - nu);
  demo.rMin = empiricalQuantile(demo.normalDistances, nu);
  demo.rMax = demo.rHat;

  long inside = 0;
  for (double d : demo.normalDistances) inside += d >= demo.rMin && d <= demo.rMax;
  demo.normalInsideFraction = static_cast<double>(inside) / kNormals;

  auto pushScores = [&](double d, int label) {
    demo.dohscScores.scores.push_back(dohscScore(d, demo.rHat));
    demo.dohscScores.labels.push_back(label);
    demo.do2hscScores.scores.push_back(do2hscScore(d, demo.rMin, demo.rMax));
    demo.do2hscScores.labels.push_back(label);
  };
  for (double d : demo.normalDistances) pushScores(d, 0);
  for (const auto& group : demo.groupDistances)
    for (double d : group) pushScores(d, 1);

  for (int g = 0; g < 3; ++g) {
    ScoredSet dohscSet, do2hscSet;
    for (double d : demo.normalDistances) {
      dohscSet.scores.push_back(dohscScore(d, demo.rHat));
      dohscSet.labels.push_back(0);
      do2hscSet.scores.push_back(do2hscScore(d, demo.rMin, demo.rMax));
      do2hscSet.labels.push_back(0);
    }
    long dohscHits = 0, do2hscHits = 0;
    for (double d : demo.groupDistances[g]) {
      const double s1 = dohscScore(d, demo.rHat);
      const double s2 = do2hscScore(d, demo.rMin, demo.rMax);
      dohscSet.scores.push_back(s1);
      dohscSet.labels.push_back(1);
      do2hscSet.scores.push_back(s2);
      do2hscSet.labels.push_back(1);
      dohscHits += s1 > 0.0;
      do2hscHits += s2 > 0.0;
    }
    demo.dohscGroupAuc.push_back(auc(dohscSet));
    demo.do2hscGroupAuc.push_back(auc(do2hscSet));
    demo.dohscGroupDetectionRate.push_back(static_cast<double>(dohscHits) /
                                           demo.groupDistances[g].size());
    demo.do2hscGroupDetectionRate.push_back(static_cast<double>(do2hscHits) /
                                            demo.groupDistances[g].size());
  }
  return demo;
}

}  // namespace bihyper
