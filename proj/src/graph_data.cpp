#include "bihyper/graph_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "bihyper/errors.hpp"
#include "bihyper/rng.hpp"

namespace bihyper {

namespace {

std::vector<std::string> readLines(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IngestError("missing file " + file.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

int parseIntField(const std::string& raw, const std::string& context) {
  const std::string s = trim(raw);
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw IngestError("bad integer '" + raw + "' in " + context);
  return value;
}

void buildDegreeOneHot(GraphDataset& ds) {
  int maxDegree = 0;
  std::vector<std::vector<int>> degrees(ds.graphs.size());
  for (size_t g = 0; g < ds.graphs.size(); ++g) {
    const Graph& graph = ds.graphs[g];
    std::vector<int> deg(graph.nodeCount, 0);
    for (auto [u, v] : graph.edges) {
      deg[u]++;
      if (u != v) deg[v]++;
    }
    for (int d : deg) maxDegree = std::max(maxDegree, d);
    degrees[g] = std::move(deg);
  }
  ds.featureDim = maxDegree + 1;
  ds.featureKind = FeatureKind::DegreeOneHot;
  for (size_t g = 0; g < ds.graphs.size(); ++g) {
    Graph& graph = ds.graphs[g];
    graph.nodeFeatures = DenseMatrix(graph.nodeCount, ds.featureDim);
    for (int i = 0; i < graph.nodeCount; ++i) graph.nodeFeatures(i, degrees[g][i]) = 1.0;
  }
}

void buildNodeLabelOneHot(GraphDataset& ds) {
  std::set<int> values;
  for (const Graph& g : ds.graphs)
    for (int v : g.nodeLabels) values.insert(v);
  ds.nodeLabelValues.assign(values.begin(), values.end());
  ds.featureDim = static_cast<int>(ds.nodeLabelValues.size());
  ds.featureKind = FeatureKind::NodeLabelOneHot;
  std::map<int, int> index;
  for (size_t i = 0; i < ds.nodeLabelValues.size(); ++i) index[ds.nodeLabelValues[i]] = static_cast<int>(i);
  for (Graph& g : ds.graphs) {
    g.nodeFeatures = DenseMatrix(g.nodeCount, ds.featureDim);
    for (int i = 0; i < g.nodeCount; ++i) g.nodeFeatures(i, index[g.nodeLabels[i]]) = 1.0;
  }
}

void remapGraphLabels(GraphDataset& ds) {
  std::set<int> values;
  for (const Graph& g : ds.graphs) values.insert(g.originalLabel);
  ds.graphLabelValues.assign(values.begin(), values.end());
  std::map<int, int> index;
  for (size_t i = 0; i < ds.graphLabelValues.size(); ++i) index[ds.graphLabelValues[i]] = static_cast<int>(i);
  for (Graph& g : ds.graphs) g.label = index[g.originalLabel];
}

GraphDataset subset(const GraphDataset& ds, const std::vector<int>& indices) {
  GraphDataset out;
  out.name = ds.name;
  out.featureDim = ds.featureDim;
  out.featureKind = ds.featureKind;
  out.nodeLabelValues = ds.nodeLabelValues;
  out.graphLabelValues = ds.graphLabelValues;
  out.graphs.reserve(indices.size());
  for (int i : indices) out.graphs.push_back(ds.graphs[i]);
  return out;
}

}  // namespace

GraphDataset parseTuDataset(const std::filesystem::path& directory, const std::string& name) {
  const auto edgeFile = directory / (name + "_A.txt");
  const auto indicatorFile = directory / (name + "_graph_indicator.txt");
  const auto graphLabelFile = directory / (name + "_graph_labels.txt");
  const auto nodeLabelFile = directory / (name + "_node_labels.txt");

  const auto indicatorLines = readLines(indicatorFile);
  const auto graphLabelLines = readLines(graphLabelFile);

  const int nodeTotal = static_cast<int>(indicatorLines.size());
  const int graphTotal = static_cast<int>(graphLabelLines.size());
  if (graphTotal == 0) throw IngestError("empty graph label file " + graphLabelFile.string());

  // Global node id (1-based) -> (graph, local index).
  std::vector<int> nodeGraph(nodeTotal);
  std::vector<int> nodeLocal(nodeTotal);
  std::vector<int> graphSize(graphTotal, 0);
  for (int i = 0; i < nodeTotal; ++i) {
    const int g = parseIntField(indicatorLines[i],
                                indicatorFile.filename().string() + " line " + std::to_string(i + 1));
    if (g < 1 || g > graphTotal)
      throw IngestError("graph indicator " + std::to_string(g) + " out of range at line " +
                        std::to_string(i + 1) + " of " + indicatorFile.filename().string());
    nodeGraph[i] = g - 1;
    nodeLocal[i] = graphSize[g - 1]++;
  }

  GraphDataset ds;
  ds.name = name;
  ds.graphs.resize(graphTotal);
  for (int g = 0; g < graphTotal; ++g) {
    ds.graphs[g].nodeCount = graphSize[g];
    ds.graphs[g].originalLabel = parseIntField(
        graphLabelLines[g], graphLabelFile.filename().string() + " line " + std::to_string(g + 1));
  }

  std::vector<std::set<std::pair<int, int>>> edgeSets(graphTotal);
  const auto edgeLines = readLines(edgeFile);
  for (size_t ln = 0; ln < edgeLines.size(); ++ln) {
    const std::string& line = edgeLines[ln];
    if (trim(line).empty()) continue;
    const auto comma = line.find(',');
    const std::string where = edgeFile.filename().string() + " line " + std::to_string(ln + 1);
    if (comma == std::string::npos) throw IngestError("expected 'i, j' in " + where);
    const int a = parseIntField(line.substr(0, comma), where);
    const int b = parseIntField(line.substr(comma + 1), where);
    if (a < 1 || a > nodeTotal || b < 1 || b > nodeTotal)
      throw IngestError("node index out of range (" + std::to_string(a) + ", " +
                        std::to_string(b) + ") in " + where);
    if (nodeGraph[a - 1] != nodeGraph[b - 1])
      throw IngestError("edge crosses graph boundary in " + where);
    const int g = nodeGraph[a - 1];
    int u = nodeLocal[a - 1], v = nodeLocal[b - 1];
    if (u > v) std::swap(u, v);
    edgeSets[g].insert({u, v});
  }
  for (int g = 0; g < graphTotal; ++g)
    ds.graphs[g].edges.assign(edgeSets[g].begin(), edgeSets[g].end());

  if (std::filesystem::exists(nodeLabelFile)) {
    const auto nodeLabelLines = readLines(nodeLabelFile);
    if (static_cast<int>(nodeLabelLines.size()) != nodeTotal)
      throw IngestError(nodeLabelFile.filename().string() + " has " +
                        std::to_string(nodeLabelLines.size()) + " lines, expected " +
                        std::to_string(nodeTotal));
    for (Graph& g : ds.graphs) g.nodeLabels.resize(g.nodeCount);
    for (int i = 0; i < nodeTotal; ++i) {
      const int value = parseIntField(
          nodeLabelLines[i], nodeLabelFile.filename().string() + " line " + std::to_string(i + 1));
      ds.graphs[nodeGraph[i]].nodeLabels[nodeLocal[i]] = value;
    }
    buildNodeLabelOneHot(ds);
  } else {
    buildDegreeOneHot(ds);
  }
  remapGraphLabels(ds);
  return ds;
}

void writeTuDataset(const GraphDataset& ds, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  std::ofstream edges(directory / (ds.name + "_A.txt"));
  std::ofstream indicator(directory / (ds.name + "_graph_indicator.txt"));
  std::ofstream labels(directory / (ds.name + "_graph_labels.txt"));
  std::ofstream nodeLabels;
  const bool hasNodeLabels = ds.featureKind == FeatureKind::NodeLabelOneHot;
  if (hasNodeLabels) nodeLabels.open(directory / (ds.name + "_node_labels.txt"));
  if (!edges || !indicator || !labels) throw IoError("cannot write dataset to " + directory.string());

  int offset = 0;
  for (size_t g = 0; g < ds.graphs.size(); ++g) {
    const Graph& graph = ds.graphs[g];
    for (auto [u, v] : graph.edges)
      edges << (offset + u + 1) << ", " << (offset + v + 1) << "\n";
    for (int i = 0; i < graph.nodeCount; ++i) {
      indicator << (g + 1) << "\n";
      if (hasNodeLabels) nodeLabels << graph.nodeLabels[i] << "\n";
    }
    labels << graph.originalLabel << "\n";
    offset += graph.nodeCount;
  }
}

IndexSplit oneClassSplitIndices(const std::vector<int>& labels, int normalClass, uint64_t seed) {
  std::vector<int> normals, anomalies;
  for (size_t i = 0; i < labels.size(); ++i)
    (labels[i] == normalClass ? normals : anomalies).push_back(static_cast<int>(i));
  if (normals.empty())
    throw ContractError("normal class " + std::to_string(normalClass) + " not present");

  Rng rng(seed);
  rng.shuffle(normals);
  rng.shuffle(anomalies);

  const int trainCount = static_cast<int>(normals.size() * 8 / 10);  // floor of 80%
  IndexSplit split;
  split.trainIndices.assign(normals.begin(), normals.begin() + trainCount);
  std::vector<int> heldOut(normals.begin() + trainCount, normals.end());

  size_t anomalyCount = heldOut.size();
  if (anomalies.size() < anomalyCount) {
    anomalyCount = anomalies.size();
    split.warnings.push_back("anomaly shortfall: wanted " + std::to_string(heldOut.size()) +
                             " anomalies for a 1:1 test mix, only " +
                             std::to_string(anomalies.size()) + " available");
  }
  for (int i : heldOut) {
    split.testIndices.push_back(i);
    split.testLabels.push_back(0);
  }
  for (size_t i = 0; i < anomalyCount; ++i) {
    split.testIndices.push_back(anomalies[i]);
    split.testLabels.push_back(1);
  }
  return split;
}

SplitResult oneClassSplit(const GraphDataset& ds, int normalClass, uint64_t seed) {
  std::vector<int> labels;
  labels.reserve(ds.graphs.size());
  for (const Graph& g : ds.graphs) labels.push_back(g.label);
  IndexSplit idx = oneClassSplitIndices(labels, normalClass, seed);

  SplitResult out;
  out.train = subset(ds, idx.trainIndices);
  out.test = subset(ds, idx.testIndices);
  out.testLabels = std::move(idx.testLabels);
  out.trainIndices = std::move(idx.trainIndices);
  out.testIndices = std::move(idx.testIndices);
  out.warnings = std::move(idx.warnings);
  return out;
}

static GraphBatch assembleBatch(const GraphDataset& ds, const std::vector<int>& members) {
  GraphBatch batch;
  batch.graphCount = static_cast<int>(members.size());
  batch.memberIndices = members;
  int nodeTotal = 0;
  for (int m : members) nodeTotal += ds.graphs[m].nodeCount;
  batch.adjacency.resize(nodeTotal);
  batch.nodeFeatures = DenseMatrix(nodeTotal, ds.featureDim);
  batch.graphIndicator.resize(nodeTotal);

  int offset = 0;
  for (size_t b = 0; b < members.size(); ++b) {
    const Graph& g = ds.graphs[members[b]];
    for (int i = 0; i < g.nodeCount; ++i) {
      batch.graphIndicator[offset + i] = static_cast<int>(b);
      for (int j = 0; j < ds.featureDim; ++j)
        batch.nodeFeatures(offset + i, j) = g.nodeFeatures(i, j);
    }
    for (auto [u, v] : g.edges) {
      batch.adjacency[offset + u].push_back(offset + v);
      if (u != v) batch.adjacency[offset + v].push_back(offset + u);
    }
    offset += g.nodeCount;
  }
  return batch;
}

std::vector<GraphBatch> makeBatches(const GraphDataset& ds, int batchSize, uint64_t seed,
                                    bool shuffle) {
  if (ds.graphs.empty()) throw ContractError("makeBatches: empty dataset");
  if (batchSize < 1) throw ContractError("makeBatches: batch size must be >= 1");
  std::vector<int> order(ds.graphs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  if (shuffle) {
    Rng rng(seed);
    rng.shuffle(order);
  }
  std::vector<GraphBatch> batches;
  for (size_t start = 0; start < order.size(); start += batchSize) {
    const size_t end = std::min(order.size(), start + batchSize);
    batches.push_back(assembleBatch(ds, {order.begin() + start, order.begin() + end}));
  }
  return batches;
}

GraphBatch fullBatch(const GraphDataset& ds) {
  if (ds.graphs.empty()) throw ContractError("fullBatch: empty dataset");
  std::vector<int> all(ds.graphs.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return assembleBatch(ds, all);
}

TabularDataset loadCsvDataset(const std::filesystem::path& file) {
  const auto lines = readLines(file);
  if (lines.size() < 2) throw IngestError("csv " + file.string() + " needs a header and data rows");

  auto splitRow = [](const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
  };

  TabularDataset ds;
  for (const auto& h : splitRow(lines[0])) ds.columnNames.push_back(trim(h));
  const int cols = static_cast<int>(ds.columnNames.size());
  if (cols < 2) throw IngestError("csv needs at least one feature column and a label column");

  const int featureCols = cols - 1;
  const int rows = static_cast<int>(lines.size()) - 1;
  ds.features = DenseMatrix(rows, featureCols);
  ds.labels.resize(rows);
  for (int r = 0; r < rows; ++r) {
    const auto fields = splitRow(lines[r + 1]);
    if (static_cast<int>(fields.size()) != cols)
      throw IngestError("csv row " + std::to_string(r + 2) + " has " +
                        std::to_string(fields.size()) + " fields, expected " + std::to_string(cols));
    for (int c = 0; c < featureCols; ++c) {
      const std::string cell = trim(fields[c]);
      char* endp = nullptr;
      const double value = std::strtod(cell.c_str(), &endp);
      if (cell.empty() || endp != cell.c_str() + cell.size() || !std::isfinite(value))
        throw IngestError("non-numeric cell at row " + std::to_string(r + 2) + ", column " +
                          std::to_string(c + 1));
      ds.features(r, c) = value;
    }
    ds.labels[r] = parseIntField(fields[featureCols],
                                 "row " + std::to_string(r + 2) + " label column");
  }
  return ds;
}

GraphDataset generateErDataset(int normalCount, int anomalyCount, int nodeCount,
                               double normalDensity, double anomalyDensity, uint64_t seed) {
  GraphDataset ds;
  ds.name = "SYNTH";
  Rng rng(seed);
  auto makeGraph = [&](double density, int label) {
    Graph g;
    g.nodeCount = nodeCount;
    g.label = label;
    g.originalLabel = label;
    for (int u = 0; u < nodeCount; ++u)
      for (int v = u + 1; v < nodeCount; ++v)
        if (rng.nextUniform() < density) g.edges.push_back({u, v});
    return g;
  };
  for (int i = 0; i < normalCount; ++i) ds.graphs.push_back(makeGraph(normalDensity, 0));
  for (int i = 0; i < anomalyCount; ++i) ds.graphs.push_back(makeGraph(anomalyDensity, 1));
  buildDegreeOneHot(ds);
  ds.graphLabelValues = {0, 1};
  return ds;
}

}  // namespace bihyper
