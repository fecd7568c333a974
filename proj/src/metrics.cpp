#include "bihyper/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "bihyper/errors.hpp"
#include "bihyper/stats.hpp"
#include "bihyper/util.hpp"

namespace bihyper {

double auc(const ScoredSet& s) {
  if (s.scores.size() != s.labels.size()) throw MetricError("auc: scores/labels length mismatch");
  const size_t n = s.scores.size();
  long positives = 0;
  for (int l : s.labels) positives += l != 0;
  const long negatives = static_cast<long>(n) - positives;
  if (positives == 0 || negatives == 0)
    throw MetricError("auc: both classes must be present");

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return s.scores[a] < s.scores[b]; });

  // mid-rank sum over the anomalous class
  double rankSum = 0.0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && s.scores[order[j + 1]] == s.scores[order[i]]) ++j;
    const double midRank = 0.5 * static_cast<double>(i + j) + 1.0;  // ranks are 1-based
    for (size_t k = i; k <= j; ++k)
      if (s.labels[order[k]] != 0) rankSum += midRank;
    i = j + 1;
  }
  const double u = rankSum - 0.5 * static_cast<double>(positives) * (positives + 1);
  return u / (static_cast<double>(positives) * static_cast<double>(negatives));
}

double f1AtContamination(const ScoredSet& s, double contamination, bool* degenerateWarning) {
  if (contamination <= 0.0 || contamination >= 1.0)
    throw MetricError("f1AtContamination: contamination must lie in (0, 1)");
  if (s.scores.empty() || s.scores.size() != s.labels.size())
    throw MetricError("f1AtContamination: bad scored set");

  const double threshold = empiricalQuantile(s.scores, 1.0 - contamination);
  if (degenerateWarning) {
    const auto [mn, mx] = std::minmax_element(s.scores.begin(), s.scores.end());
    *degenerateWarning = *mn == *mx;
  }
  long tp = 0, fp = 0, fn = 0;
  for (size_t i = 0; i < s.scores.size(); ++i) {
    const bool predicted = s.scores[i] > threshold;
    const bool actual = s.labels[i] != 0;
    tp += predicted && actual;
    fp += predicted && !actual;
    fn += !predicted && actual;
  }
  if (2 * tp + fp + fn == 0) return 0.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

std::vector<HistogramRow> distanceHistogram(const std::vector<double>& distances,
                                            const std::vector<int>& labels, int bins) {
  if (bins < 1) throw ContractError("distanceHistogram: bins must be >= 1");
  if (distances.empty() || distances.size() != labels.size())
    throw ContractError("distanceHistogram: bad input lengths");

  const auto [mnIt, mxIt] = std::minmax_element(distances.begin(), distances.end());
  const double lo = *mnIt, hi = *mxIt;
  const double width = (hi - lo) / bins;

  std::vector<HistogramRow> rows(bins);
  for (int b = 0; b < bins; ++b) {
    rows[b].binLeft = lo + b * width;
    rows[b].binRight = b + 1 == bins ? hi : lo + (b + 1) * width;
  }
  long totalNormal = 0, totalAnomalous = 0;
  for (size_t i = 0; i < distances.size(); ++i) {
    int b = width > 0.0 ? static_cast<int>((distances[i] - lo) / width) : 0;
    b = std::clamp(b, 0, bins - 1);
    if (labels[i] != 0) {
      rows[b].countAnomalous++;
      totalAnomalous++;
    } else {
      rows[b].countNormal++;
      totalNormal++;
    }
  }
  for (auto& r : rows) {
    r.propNormal = totalNormal > 0 ? static_cast<double>(r.countNormal) / totalNormal : 0.0;
    r.propAnomalous =
        totalAnomalous > 0 ? static_cast<double>(r.countAnomalous) / totalAnomalous : 0.0;
  }
  return rows;
}

void exportDistanceHistogram(const std::vector<double>& distances,
                             const std::vector<int>& labels, int bins,
                             const std::filesystem::path& file) {
  const auto rows = distanceHistogram(distances, labels, bins);
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  out << "bin_left,bin_right,count_normal,count_anomalous,prop_normal,prop_anomalous\n";
  for (const auto& r : rows)
    out << formatDouble(r.binLeft) << ',' << formatDouble(r.binRight) << ',' << r.countNormal
        << ',' << r.countAnomalous << ',' << formatDouble(r.propNormal) << ','
        << formatDouble(r.propAnomalous) << '\n';
  if (!out) throw IoError("write failure on " + file.string());
}

}  // namespace bihyper
