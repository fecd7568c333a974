#include "bihyper/runner.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "bihyper/checkpoint.hpp"
#include "bihyper/errors.hpp"
#include "bihyper/metrics.hpp"
#include "bihyper/soap_bubble.hpp"
#include "bihyper/util.hpp"

namespace bihyper {

using nlohmann::json;

namespace {

bool isTabularMode(const std::string& mode) { return mode.rfind("tabular", 0) == 0; }

DetectorMode detectorModeOf(const std::string& mode) {
  if (mode == "dohsc" || mode == "tabular-dohsc") return DetectorMode::Dohsc;
  if (mode == "do2hsc" || mode == "tabular-do2hsc") return DetectorMode::Do2hsc;
  throw ContractError("unknown mode '" + mode + "'");
}

json runConfigJson(const RunConfig& c) {
  json j = configToJson(c.train);
  j["mode"] = c.mode;
  j["dataset_path"] = c.datasetPath;
  j["dataset_name"] = c.datasetName;
  j["normal_class"] = c.normalClass;
  return j;
}

std::string runIdOf(const RunConfig& c) { return runIdFor(runConfigJson(c), "bihyper"); }

std::filesystem::path ensureOutputDir(const RunConfig& c) {
  const std::filesystem::path dir(c.outputDir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec && !std::filesystem::is_directory(dir))
    throw IoError("cannot create output directory " + dir.string());
  return dir;
}

void requireProjectionKind(const RunConfig& c) {
  if (c.projectionKind == "svd") return;
  if (c.projectionKind == "penalty")
    throw ContractError(
        "projection kind 'penalty' (gradient-trained orthogonality) is not implemented; "
        "only the SVD projection is supported");
  throw ContractError("unknown projection kind '" + c.projectionKind + "'");
}

void writeLossCsv(const std::filesystem::path& file, const TrainLog& log,
                  const std::string& runId, uint64_t seed) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  out << "# run_id=" << runId << " seed=" << seed << "\n";
  out << "epoch,batch,total_loss,decision_term,mi_term\n";
  for (const LossRecord& r : log.steps)
    out << r.epoch << ',' << r.batch << ',' << formatDouble(r.totalLoss) << ','
        << formatDouble(r.decisionTerm) << ',' << formatDouble(r.miTerm) << '\n';
  if (!out) throw IoError("write failure on " + file.string());
}

struct ScoresFile {
  std::string runId;
  std::vector<int> indices;
  std::vector<int> labels;
  std::vector<double> distances;
  std::vector<double> scores;
};

void writeScoresCsv(const std::filesystem::path& file, const ScoresFile& s, uint64_t seed) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  out << "# run_id=" << s.runId << " seed=" << seed << "\n";
  out << "graph_index,label,distance,score\n";
  for (size_t i = 0; i < s.indices.size(); ++i)
    out << s.indices[i] << ',' << s.labels[i] << ',' << formatDouble(s.distances[i]) << ','
        << formatDouble(s.scores[i]) << '\n';
  if (!out) throw IoError("write failure on " + file.string());
}

ScoresFile readScoresCsv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IngestError("missing scores file " + file.string());
  ScoresFile s;
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("run_id=");
      if (pos != std::string::npos) s.runId = line.substr(pos + 7, 16);
      continue;
    }
    if (line.rfind("graph_index", 0) == 0) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 4)
      throw IngestError("scores row " + std::to_string(lineNo) + " needs 4 fields");
    s.indices.push_back(std::stoi(fields[0]));
    s.labels.push_back(std::stoi(fields[1]));
    s.distances.push_back(std::stod(fields[2]));
    s.scores.push_back(std::stod(fields[3]));
  }
  if (s.indices.empty()) throw IngestError("scores file " + file.string() + " has no rows");
  return s;
}

json datasetSummary(const GraphDataset& ds) {
  long nodes = 0, edges = 0;
  for (const Graph& g : ds.graphs) {
    nodes += g.nodeCount;
    edges += static_cast<long>(g.edges.size());
  }
  return json{{"graphs", ds.graphCount()},
              {"feature_dim", ds.featureDim},
              {"feature_encoding", ds.featureKind == FeatureKind::NodeLabelOneHot
                                       ? "node_label_onehot"
                                       : "degree_onehot"},
              {"avg_nodes", ds.graphCount() ? static_cast<double>(nodes) / ds.graphCount() : 0.0},
              {"avg_edges", ds.graphCount() ? static_cast<double>(edges) / ds.graphCount() : 0.0}};
}

void writeMetadata(const std::filesystem::path& file, const RunConfig& c,
                   const std::string& runId, const json& datasetInfo,
                   const std::vector<std::string>& warnings, double seconds) {
  json j;
  j["run_id"] = runId;
  j["command"] = c.command;
  j["config"] = runConfigJson(c);
  j["dataset"] = datasetInfo;
  j["warnings"] = warnings;
  j["train_seconds"] = seconds;
  j["decisions"] = {
      {"optimizer", "sgd"},
      {"learning_rate", c.train.learningRate},
      {"weight_decay_mu", c.train.mu},
      {"batch_size", c.train.batchSize},
      {"readout", "sum"},
      {"projection_refit", c.train.refitPerBatch ? "per-batch" : "per-epoch"},
      {"mi_objective", c.train.flipMiSign ? "minimized (flipped for ablation)" : "maximized"},
      {"mi_scope", "per-batch"},
      {"radius_quantile", "1-nu"},
      {"r_min_quantile", "nu"},
      {"unlabeled_node_features", "degree one-hot"},
  };
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  out << j.dump(1) << "\n";
}

}  // namespace

RunConfig runConfigFromJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("missing config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IngestError("config " + path + ": " + e.what());
  }
  RunConfig c;
  c.command = j.value("command", c.command);
  c.datasetPath = j.value("dataset_path", c.datasetPath);
  c.datasetName = j.value("dataset_name", c.datasetName);
  c.mode = j.value("mode", c.mode);
  c.normalClass = j.value("normal_class", c.normalClass);
  c.outputDir = j.value("output_dir", c.outputDir);
  c.checkpointPath = j.value("checkpoint", c.checkpointPath);
  c.scoresPath = j.value("scores", c.scoresPath);
  c.projectionKind = j.value("projection", c.projectionKind);
  c.histogramBins = j.value("histogram_bins", c.histogramBins);
  c.contamination = j.value("contamination", c.contamination);
  c.simulateDims = j.value("simulate_dims", c.simulateDims);
  c.simulateQuantiles = j.value("simulate_quantiles", c.simulateQuantiles);
  c.simulateSamples = j.value("simulate_samples", c.simulateSamples);
  c.train = configFromJson(j);
  return c;
}

void runTrain(const RunConfig& config) {
  requireProjectionKind(config);
  if (config.datasetPath.empty()) throw ContractError("train: --dataset is required");
  const auto dir = ensureOutputDir(config);
  const std::string runId = runIdOf(config);
  const DetectorMode mode = detectorModeOf(config.mode);

  TrainLog log;
  DetectorModel model;
  json datasetInfo;
  const auto started = std::chrono::steady_clock::now();

  if (isTabularMode(config.mode)) {
    const TabularDataset ds = loadCsvDataset(config.datasetPath);
    const IndexSplit split = oneClassSplitIndices(ds.labels, config.normalClass, config.train.seed);
    DenseMatrix trainRows(static_cast<int>(split.trainIndices.size()), ds.features.cols());
    for (size_t i = 0; i < split.trainIndices.size(); ++i)
      for (int j = 0; j < ds.features.cols(); ++j)
        trainRows(static_cast<int>(i), j) = ds.features(split.trainIndices[i], j);
    for (const auto& w : split.warnings) log.warnings.push_back(w);
    model = trainTabular(trainRows, config.train, mode, &log);
    datasetInfo = json{{"rows", ds.features.rows()},
                       {"feature_dim", ds.features.cols()},
                       {"train_rows", split.trainIndices.size()},
                       {"test_rows", split.testIndices.size()}};
  } else {
    if (config.datasetName.empty()) throw ContractError("train: --name is required");
    const GraphDataset ds = parseTuDataset(config.datasetPath, config.datasetName);
    const SplitResult split = oneClassSplit(ds, config.normalClass, config.train.seed);
    for (const auto& w : split.warnings) log.warnings.push_back(w);
    model = mode == DetectorMode::Dohsc ? trainDohsc(split.train, config.train, &log)
                                        : trainDo2hsc(split.train, config.train, &log);
    datasetInfo = datasetSummary(ds);
    datasetInfo["train_graphs"] = split.train.graphCount();
    datasetInfo["test_graphs"] = split.test.graphCount();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  CheckpointInfo info{runId, config.datasetPath, config.datasetName, config.mode,
                      config.normalClass};
  saveCheckpoint(model, info, dir / "checkpoint.json");
  writeLossCsv(dir / "training_loss.csv", log, runId, config.train.seed);
  writeMetadata(dir / "metadata.json", config, runId, datasetInfo, log.warnings, seconds);
}

void runScore(const RunConfig& config) {
  if (config.checkpointPath.empty()) throw ContractError("score: --checkpoint is required");
  const auto dir = ensureOutputDir(config);

  CheckpointInfo info;
  const DetectorModel model = loadCheckpoint(config.checkpointPath, &info);
  const std::string datasetPath =
      config.datasetPath.empty() ? info.datasetPath : config.datasetPath;
  const std::string datasetName =
      config.datasetName.empty() ? info.datasetName : config.datasetName;
  if (datasetPath.empty()) throw ContractError("score: no dataset recorded or given");

  ScoresFile out;
  out.runId = info.runId;

  if (model.tabular) {
    const TabularDataset ds = loadCsvDataset(datasetPath);
    const IndexSplit split =
        oneClassSplitIndices(ds.labels, info.normalClass, model.config.seed);
    DenseMatrix rows(static_cast<int>(split.testIndices.size()), ds.features.cols());
    for (size_t i = 0; i < split.testIndices.size(); ++i)
      for (int j = 0; j < ds.features.cols(); ++j)
        rows(static_cast<int>(i), j) = ds.features(split.testIndices[i], j);
    const auto scored = scoreRows(model, rows);
    for (size_t i = 0; i < scored.size(); ++i) {
      out.indices.push_back(split.testIndices[i]);
      out.labels.push_back(split.testLabels[i]);
      out.distances.push_back(scored[i].distance);
      out.scores.push_back(scored[i].score);
    }
  } else {
    const GraphDataset ds = parseTuDataset(datasetPath, datasetName);
    const SplitResult split = oneClassSplit(ds, info.normalClass, model.config.seed);
    const auto scored = scoreGraphs(model, split.test);
    for (size_t i = 0; i < scored.size(); ++i) {
      out.indices.push_back(split.testIndices[i]);
      out.labels.push_back(split.testLabels[i]);
      out.distances.push_back(scored[i].distance);
      out.scores.push_back(scored[i].score);
    }
  }
  writeScoresCsv(dir / "scores.csv", out, model.config.seed);
}

void runEval(const RunConfig& config) {
  if (config.scoresPath.empty()) throw ContractError("eval: --scores is required");
  const auto dir = ensureOutputDir(config);
  const ScoresFile s = readScoresCsv(config.scoresPath);

  if (!config.checkpointPath.empty()) {
    CheckpointInfo info;
    loadCheckpoint(config.checkpointPath, &info);
    if (!info.runId.empty() && !s.runId.empty() && info.runId != s.runId)
      throw ContractError("run id mismatch: scores " + s.runId + " vs checkpoint " +
                          info.runId);
  }

  ScoredSet set{s.scores, s.labels};
  long anomalous = 0;
  for (int l : s.labels) anomalous += l != 0;
  const double contamination =
      config.contamination > 0.0
          ? config.contamination
          : static_cast<double>(anomalous) / static_cast<double>(s.labels.size());

  bool degenerate = false;
  json j;
  j["run_id"] = s.runId;
  j["count"] = s.labels.size();
  j["anomalous"] = anomalous;
  j["auc"] = auc(set);
  j["contamination"] = contamination;
  j["f1_at_contamination"] = f1AtContamination(set, contamination, &degenerate);
  if (degenerate) j["warnings"] = json::array({"all scores identical: all-or-nothing F1"});

  std::ofstream out(dir / "eval.json");
  if (!out) throw IoError("cannot write " + (dir / "eval.json").string());
  out << j.dump(1) << "\n";

  exportDistanceHistogram(s.distances, s.labels, config.histogramBins,
                          dir / "distance_histogram.csv");
}

void runSimulate(const RunConfig& config) {
  const auto dir = ensureOutputDir(config);
  const std::string runId = runIdOf(config);
  const uint64_t seed = config.train.seed;

  const QuantileTable table =
      quantileTable(config.simulateDims, config.simulateQuantiles, config.simulateSamples, seed);
  {
    std::ofstream out(dir / "quantile_table.csv");
    if (!out) throw IoError("cannot write quantile_table.csv");
    out << "# run_id=" << runId << " seed=" << seed << "\n";
    out << "dim";
    for (double q : table.quantiles) out << ",q" << formatDouble(q);
    out << "\n";
    for (size_t i = 0; i < table.dims.size(); ++i) {
      out << table.dims[i];
      for (size_t j = 0; j < table.quantiles.size(); ++j)
        out << ',' << formatDouble(table.values(static_cast<int>(i), static_cast<int>(j)));
      out << "\n";
    }
  }

  for (size_t i = 0; i < config.simulateDims.size(); ++i) {
    const GaussianSample s = sampleDistances(config.simulateDims[i], config.simulateSamples,
                                             Rng::derive(seed, 0xD000 + i));
    const std::vector<int> labels(s.distances.size(), 0);
    exportDistanceHistogram(
        s.distances, labels, 50,
        dir / ("distance_histogram_dim" + std::to_string(config.simulateDims[i]) + ".csv"));
  }

  {
    std::ofstream out(dir / "prop1_check.csv");
    if (!out) throw IoError("cannot write prop1_check.csv");
    out << "# run_id=" << runId << " seed=" << seed << "\n";
    out << "dim,t,bound,required_probability,empirical_fraction,slack,holds\n";
    for (int d : {10, 50, 100, 500}) {
      for (double t : {0.1, 0.5, 1.0, 2.0}) {
        const Prop1Check c = checkProp1(d, t, config.simulateSamples,
                                        Rng::derive(seed, 0xE000 + d * 8 + static_cast<int>(4 * t)));
        out << d << ',' << formatDouble(t) << ',' << formatDouble(c.bound) << ','
            << formatDouble(c.requiredProbability) << ',' << formatDouble(c.empiricalFraction)
            << ',' << formatDouble(c.slack) << ',' << (c.holds ? 1 : 0) << '\n';
      }
    }
  }

  {
    const MixtureDemo demo = mixtureDemo(seed, 0.05);
    std::vector<double> distances = demo.normalDistances;
    std::vector<int> labels(demo.normalDistances.size(), 0);
    for (size_t g = 0; g < demo.groupDistances.size(); ++g) {
      for (double d : demo.groupDistances[g]) {
        distances.push_back(d);
        labels.push_back(static_cast<int>(g) + 1);
      }
    }
    std::vector<int> binary(labels.size());
    for (size_t i = 0; i < labels.size(); ++i) binary[i] = labels[i] != 0;
    exportDistanceHistogram(distances, binary, 60, dir / "mixture_histogram.csv");

    json j;
    j["run_id"] = runId;
    j["nu"] = demo.nu;
    j["r_hat"] = demo.rHat;
    j["r_min"] = demo.rMin;
    j["r_max"] = demo.rMax;
    j["normal_inside_fraction"] = demo.normalInsideFraction;
    j["dohsc_overall_auc"] = auc(demo.dohscScores);
    j["do2hsc_overall_auc"] = auc(demo.do2hscScores);
    j["dohsc_group_auc"] = demo.dohscGroupAuc;
    j["do2hsc_group_auc"] = demo.do2hscGroupAuc;
    j["dohsc_group_detection_rate"] = demo.dohscGroupDetectionRate;
    j["do2hsc_group_detection_rate"] = demo.do2hscGroupDetectionRate;
    std::ofstream out(dir / "mixture_summary.json");
    if (!out) throw IoError("cannot write mixture_summary.json");
    out << j.dump(1) << "\n";
  }
}

void runFixture(const RunConfig& config) {
  const auto dir = ensureOutputDir(config);
  GraphDataset ds = generateErDataset(24, 12, 12, 0.18, 0.45, config.train.seed);
  ds.name = config.datasetName.empty() ? "FIXTURE" : config.datasetName;
  writeTuDataset(ds, dir);
}

int runCommand(const RunConfig& config) {
  try {
    if (config.command == "train")
      runTrain(config);
    else if (config.command == "score")
      runScore(config);
    else if (config.command == "eval")
      runEval(config);
    else if (config.command == "simulate")
      runSimulate(config);
    else if (config.command == "fixture")
      runFixture(config);
    else
      throw ContractError("unknown command '" + config.command + "'");
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace bihyper
