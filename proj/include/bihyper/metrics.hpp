#pragma once

#include <filesystem>
#include <vector>

namespace bihyper {

struct ScoredSet {
  std::vector<double> scores;
  std::vector<int> labels;  // 1 = anomalous
};

// Probability that a random anomalous score exceeds a random normal score,
// ties counted 1/2 (Mann-Whitney mid-rank). Throws MetricError unless both
// classes are present.
double auc(const ScoredSet& s);

// Threshold at the (1 - contamination)-quantile of the scores, predict
// anomalous strictly above it, return F1 of the anomalous class.
double f1AtContamination(const ScoredSet& s, double contamination,
                         bool* degenerateWarning = nullptr);

struct HistogramRow {
  double binLeft = 0.0, binRight = 0.0;
  long countNormal = 0, countAnomalous = 0;
  double propNormal = 0.0, propAnomalous = 0.0;
};

std::vector<HistogramRow> distanceHistogram(const std::vector<double>& distances,
                                            const std::vector<int>& labels, int bins);

// CSV: bin_left,bin_right,count_normal,count_anomalous,prop_normal,prop_anomalous
void exportDistanceHistogram(const std::vector<double>& distances,
                             const std::vector<int>& labels, int bins,
                             const std::filesystem::path& file);

}  // namespace bihyper
