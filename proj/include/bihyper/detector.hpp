#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bihyper/autodiff.hpp"
#include "bihyper/encoder.hpp"
#include "bihyper/graph_data.hpp"
#include "bihyper/projection.hpp"

namespace bihyper {

struct TrainConfig {
  double lambda = 10.0;        // MI trade-off
  double mu = 1e-4;            // weight decay
  double learningRate = 1e-3;
  int pretrainEpochs = 1;      // MI-only stage
  int radiiInitEpochs = 5;     // hypersphere warm-up before radii init
  int trainEpochs = 500;
  double nu = 0.01;            // quantile parameter, in (0, 0.5)
  int batchSize = 64;
  int ginLayers = 4;
  int hiddenDim = 16;          // k
  int projectedDim = 8;        // k'
  uint64_t seed = 1;
  bool shuffle = true;
  bool flipMiSign = false;     // ablation: minimize +lambda*I instead of -lambda*I
  bool refitPerBatch = false;  // refit projection after every batch instead of per epoch
  bool earlyStop = false;      // stop when relative loss change < 1e-6 over 20 epochs

  void validate() const;
};

enum class DetectorMode { Dohsc, Do2hsc };

struct DetectorModel {
  DetectorMode mode = DetectorMode::Dohsc;
  bool tabular = false;
  EncoderParams encoder;          // graph pipeline
  TabularEncoderParams tabularEncoder;
  std::vector<double> featureMean, featureStd;  // tabular standardization
  ProjectionState projection;
  std::vector<double> center;
  double radius = 0.0;            // DOHSC
  double rMin = 0.0, rMax = 0.0;  // DO2HSC
  TrainConfig config;
};

struct LossRecord {
  int epoch = 0;
  int batch = 0;
  double totalLoss = 0.0;
  double decisionTerm = 0.0;  // distance term (DOHSC) or interval term (DO2HSC)
  double miTerm = 0.0;
};

struct TrainLog {
  std::vector<LossRecord> steps;
  std::vector<std::string> warnings;
};

// Mean of the projected training representations (Eq-style center init).
std::vector<double> initCenter(const DenseMatrix& projectedAll);

// Smallest distance r with #{d <= r}/N >= 1 - nu.
double computeRadius(const std::vector<double>& distances, double nu);

// (rMin, rMax) = (nu-quantile, (1-nu)-quantile); rMin <= rMax always.
std::pair<double, double> initRadii(const std::vector<double>& distances, double nu);

double dohscScore(double distance, double radius);
double do2hscScore(double distance, double rMin, double rMax);

struct DetectorLoss {
  ad::Var total;
  ad::Var decisionTerm;  // distance term (DOHSC) or interval term (DO2HSC)
};

// mean ||row - center||^2 + signed lambda * miTerm + (mu/2) * sum ||Q||_F^2.
// The decay term is taped through `params`, so the optimizer runs with
// weight decay 0 during joint training (the regularizer gradient mu*Q is
// already in the tape).
DetectorLoss dohscTotalLoss(ad::Var projected, const std::vector<double>& center,
                            std::optional<ad::Var> miTerm, const TrainConfig& config,
                            const std::vector<ad::Parameter*>& params, ad::Tape& tape);

// distances is an n x 1 column of (unsquared) distances to the center.
// The interval term mean(max{d, rMax} - min{d, rMin}) never drops below
// rMax - rMin, including in floating point.
DetectorLoss do2hscTotalLoss(ad::Var distances, double rMin, double rMax,
                             std::optional<ad::Var> miTerm, const TrainConfig& config,
                             const std::vector<ad::Parameter*>& params, ad::Tape& tape);

DetectorModel trainDohsc(const GraphDataset& trainSet, const TrainConfig& config,
                         TrainLog* log = nullptr);
DetectorModel trainDo2hsc(const GraphDataset& trainSet, const TrainConfig& config,
                          TrainLog* log = nullptr);

// Non-graph pipeline: rows are standardized with training statistics, the
// encoder is a 3-layer MLP, and there is no MI term.
DetectorModel trainTabular(const DenseMatrix& rows, const TrainConfig& config, DetectorMode mode,
                           TrainLog* log = nullptr);

struct ScoredInstance {
  int index = 0;
  double distance = 0.0;
  double score = 0.0;
};

std::vector<ScoredInstance> scoreGraphs(const DetectorModel& model, const GraphDataset& ds);
std::vector<ScoredInstance> scoreRows(const DetectorModel& model, const DenseMatrix& rows);

// Graph representations H (no tape): one row per graph.
DenseMatrix encodeGraphs(const DetectorModel& model, const GraphDataset& ds);

}  // namespace bihyper
