#pragma once

#include <string>
#include <vector>

#include "bihyper/detector.hpp"

namespace bihyper {

// One CLI invocation, assembled from a JSON config file and/or flags.
struct RunConfig {
  std::string command;  // train | score | eval | simulate | fixture
  std::string datasetPath;
  std::string datasetName;
  std::string mode = "dohsc";  // dohsc | do2hsc | tabular-dohsc | tabular-do2hsc
  int normalClass = 0;
  std::string outputDir = ".";
  std::string checkpointPath;
  std::string scoresPath;
  std::string projectionKind = "svd";  // "penalty" is an unimplemented ablation stub
  int histogramBins = 20;
  double contamination = 0.0;  // 0 -> use the observed anomaly fraction
  std::vector<int> simulateDims{1, 10, 50, 100, 200, 500};
  std::vector<double> simulateQuantiles{0.01, 0.25, 0.5, 0.75, 0.99};
  int simulateSamples = 10000;
  TrainConfig train;
};

RunConfig runConfigFromJsonFile(const std::string& path);

// Executes one command, writing its artifacts under outputDir.
// Returns 0 iff every declared artifact was written.
int runCommand(const RunConfig& config);

// Individual commands (used by tests and the CLI).
void runTrain(const RunConfig& config);
void runScore(const RunConfig& config);
void runEval(const RunConfig& config);
void runSimulate(const RunConfig& config);
void runFixture(const RunConfig& config);

}  // namespace bihyper
