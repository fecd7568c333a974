#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "bihyper/matrix.hpp"

namespace bihyper {

// One undirected graph. Edges are stored once with u <= v (0-based);
// adjacency lists materialize both directions.
struct Graph {
  int nodeCount = 0;
  std::vector<std::pair<int, int>> edges;
  DenseMatrix nodeFeatures;          // nodeCount x featureDim
  int label = 0;                     // remapped to 0..C-1
  int originalLabel = 0;             // as read from the label file
  std::vector<int> nodeLabels;       // original values; empty when absent
};

enum class FeatureKind { NodeLabelOneHot, DegreeOneHot };

struct GraphDataset {
  std::string name;
  int featureDim = 0;
  FeatureKind featureKind = FeatureKind::DegreeOneHot;
  std::vector<Graph> graphs;
  std::vector<int> nodeLabelValues;   // sorted distinct originals (one-hot order)
  std::vector<int> graphLabelValues;  // sorted distinct originals (remap order)

  int graphCount() const { return static_cast<int>(graphs.size()); }
};

// Block-diagonal mini-batch over concatenated nodes.
struct GraphBatch {
  std::vector<std::vector<int>> adjacency;  // both directions, no cross-graph edges
  DenseMatrix nodeFeatures;
  std::vector<int> graphIndicator;          // per node, 0..graphCount-1, nondecreasing
  int graphCount = 0;
  std::vector<int> memberIndices;           // dataset index of each member graph
  int nodeCount() const { return static_cast<int>(adjacency.size()); }
};

// Reads NAME_A.txt, NAME_graph_indicator.txt, NAME_graph_labels.txt and the
// optional NAME_node_labels.txt from `directory`. Node labels become one-hot
// features; without them, node degree one-hot capped at the dataset maximum.
GraphDataset parseTuDataset(const std::filesystem::path& directory, const std::string& name);

// Inverse of the parser, for fixtures and round-trip checks.
void writeTuDataset(const GraphDataset& ds, const std::filesystem::path& directory);

struct SplitResult {
  GraphDataset train;
  GraphDataset test;
  std::vector<int> testLabels;   // 0 = normal, 1 = anomalous
  std::vector<int> trainIndices; // into the source dataset
  std::vector<int> testIndices;
  std::vector<std::string> warnings;
};

// 80% of the normal class (seeded, without replacement) for training; the
// held-out normals plus an equal number of sampled anomalies for testing.
// When anomalies run short, uses all of them and records a warning.
SplitResult oneClassSplit(const GraphDataset& ds, int normalClass, uint64_t seed);

// Shared split protocol for label vectors (tabular path).
struct IndexSplit {
  std::vector<int> trainIndices;
  std::vector<int> testIndices;
  std::vector<int> testLabels;
  std::vector<std::string> warnings;
};
IndexSplit oneClassSplitIndices(const std::vector<int>& labels, int normalClass, uint64_t seed);

std::vector<GraphBatch> makeBatches(const GraphDataset& ds, int batchSize, uint64_t seed,
                                    bool shuffle);

// The whole dataset as a single batch (order preserved).
GraphBatch fullBatch(const GraphDataset& ds);

struct TabularDataset {
  DenseMatrix features;
  std::vector<int> labels;
  std::vector<std::string> columnNames;
};

// CSV with a header row; every column numeric, last column = integer label.
TabularDataset loadCsvDataset(const std::filesystem::path& file);

// Erdos-Renyi style synthetic dataset with degree one-hot features;
// label 0 graphs use normalDensity, label 1 graphs anomalyDensity.
GraphDataset generateErDataset(int normalCount, int anomalyCount, int nodeCount,
                               double normalDensity, double anomalyDensity, uint64_t seed);

}  // namespace bihyper
