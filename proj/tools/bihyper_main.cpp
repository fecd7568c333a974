#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bihyper/errors.hpp"
#include "bihyper/runner.hpp"

namespace {

// Pre-scan for --config so flags parsed afterwards override file values.
std::string findConfigPath(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return argv[i + 1];
    if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
  }
  return "";
}

void addTrainingFlags(CLI::App* cmd, bihyper::RunConfig& rc, bool& paperDefaults) {
  cmd->add_option("--dataset", rc.datasetPath, "dataset directory (TU format) or CSV file");
  cmd->add_option("--name", rc.datasetName, "TU dataset name prefix");
  cmd->add_option("--mode", rc.mode, "dohsc | do2hsc | tabular-dohsc | tabular-do2hsc");
  cmd->add_option("--normal-class", rc.normalClass, "label treated as normal");
  cmd->add_option("--nu", rc.train.nu, "decision quantile parameter in (0, 0.5)");
  cmd->add_option("--lambda", rc.train.lambda, "MI trade-off factor");
  cmd->add_option("--mu", rc.train.mu, "weight decay");
  cmd->add_option("--lr", rc.train.learningRate, "SGD learning rate");
  cmd->add_option("--epochs", rc.train.trainEpochs, "training epochs");
  cmd->add_option("--pretrain-epochs", rc.train.pretrainEpochs, "MI-only epochs");
  cmd->add_option("--warmup-epochs", rc.train.radiiInitEpochs,
                  "hypersphere epochs before radii init (DO2HSC)");
  cmd->add_option("--batch-size", rc.train.batchSize, "graphs per batch");
  cmd->add_option("--gin-layers", rc.train.ginLayers, "message-passing layers");
  cmd->add_option("--hidden-dim", rc.train.hiddenDim, "representation width k");
  cmd->add_option("--projected-dim", rc.train.projectedDim, "projected width k'");
  cmd->add_option("--seed", rc.train.seed, "RNG seed");
  cmd->add_option("--projection", rc.projectionKind, "svd | penalty (penalty: ablation stub)");
  cmd->add_flag("--flip-mi-sign", rc.train.flipMiSign,
                "ablation: keep the printed +lambda*I sign instead of maximizing MI");
  cmd->add_flag("--refit-per-batch", rc.train.refitPerBatch,
                "refit the projection after every batch instead of once per epoch");
  cmd->add_flag("--early-stop", rc.train.earlyStop, "stop on a 20-epoch loss plateau");
  cmd->add_flag("--paper-defaults", paperDefaults,
                "reset lambda=10, k=16, k'=8, nu=0.01, 500 epochs, 4 GIN layers");
}

}  // namespace

int main(int argc, char** argv) {
  bihyper::RunConfig rc;
  const std::string configPath = findConfigPath(argc, argv);
  if (!configPath.empty()) {
    try {
      rc = bihyper::runConfigFromJsonFile(configPath);
    } catch (const bihyper::Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }

  CLI::App app{"Graph-level one-class anomaly detection by deep orthogonal hypersphere "
               "contraction (DOHSC) and bi-hypersphere compression (DO2HSC)"};
  app.require_subcommand(0, 1);
  std::string configDummy;
  app.add_option("--config", configDummy, "JSON config file; flags override its values");

  bool paperDefaults = false;

  CLI::App* train = app.add_subcommand("train", "train a detector and write a checkpoint");
  addTrainingFlags(train, rc, paperDefaults);
  train->add_option("--out", rc.outputDir, "output directory");

  CLI::App* score = app.add_subcommand("score", "score the test split against a checkpoint");
  score->add_option("--checkpoint", rc.checkpointPath, "checkpoint.json from train")
      ->required();
  score->add_option("--dataset", rc.datasetPath, "override the recorded dataset path");
  score->add_option("--name", rc.datasetName, "override the recorded dataset name");
  score->add_option("--out", rc.outputDir, "output directory");

  CLI::App* eval = app.add_subcommand("eval", "AUC/F1 and distance histogram from scores");
  eval->add_option("--scores", rc.scoresPath, "scores.csv from score")->required();
  eval->add_option("--checkpoint", rc.checkpointPath, "cross-check the scores' run id");
  eval->add_option("--contamination", rc.contamination,
                   "threshold quantile; default: observed anomaly fraction");
  eval->add_option("--bins", rc.histogramBins, "histogram bins");
  eval->add_option("--out", rc.outputDir, "output directory");

  CLI::App* simulate =
      app.add_subcommand("simulate", "high-dimensional Gaussian distance artifacts");
  simulate->add_option("--dims", rc.simulateDims, "dimensions")->delimiter(',');
  simulate->add_option("--quantiles", rc.simulateQuantiles, "quantiles in (0,1)")
      ->delimiter(',');
  simulate->add_option("--samples", rc.simulateSamples, "samples per dimension");
  simulate->add_option("--seed", rc.train.seed, "RNG seed");
  simulate->add_option("--out", rc.outputDir, "output directory");

  CLI::App* fixture = app.add_subcommand("fixture", "write the bundled TU-format test dataset");
  fixture->add_option("--name", rc.datasetName, "dataset name prefix (default FIXTURE)");
  fixture->add_option("--seed", rc.train.seed, "RNG seed");
  fixture->add_option("--out", rc.outputDir, "output directory");

  CLI11_PARSE(app, argc, argv);

  if (paperDefaults) {
    rc.train.lambda = 10.0;
    rc.train.hiddenDim = 16;
    rc.train.projectedDim = 8;
    rc.train.nu = 0.01;
    rc.train.trainEpochs = 500;
    rc.train.ginLayers = 4;
    rc.train.pretrainEpochs = 1;
    rc.train.radiiInitEpochs = 5;
  }

  for (CLI::App* sub : {train, score, eval, simulate, fixture})
    if (sub->parsed()) rc.command = sub->get_name();
  if (rc.command.empty()) {
    std::cerr << "error: usage: no command given (train | score | eval | simulate | fixture)\n";
    return 1;
  }
  return bihyper::runCommand(rc);
}
