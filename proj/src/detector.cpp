#include "bihyper/detector.hpp"

#include <cmath>
#include <string>

#include "bihyper/errors.hpp"
#include "bihyper/mi_loss.hpp"
#include "bihyper/stats.hpp"

namespace bihyper {

namespace {

constexpr double kEarlyStopTol = 1e-6;
constexpr int kEarlyStopWindow = 20;

void addWarning(TrainLog* log, const std::string& message) {
  if (!log) return;
  for (const auto& w : log->warnings)
    if (w == message) return;
  log->warnings.push_back(message);
}

// Full-dataset graph representations with throwaway tapes (no gradients).
DenseMatrix encodeAll(EncoderParams& enc, const GraphDataset& ds) {
  const GraphBatch batch = fullBatch(ds);
  ad::Tape tape;
  GinOutputs gin = ginForward(batch, enc, tape);
  HeadOutputs hs = heads(gin.nodeConcat, gin.graphReadout, enc, tape);
  return tape.value(hs.graph);
}

DenseMatrix encodeAllRows(TabularEncoderParams& enc, const DenseMatrix& rows) {
  ad::Tape tape;
  ad::Var out = mlpForward(enc.mlp, tape.constant(rows), tape);
  return tape.value(out);
}

std::vector<double> rowDistances(const DenseMatrix& projected, const std::vector<double>& center) {
  std::vector<double> d(projected.rows());
  for (int i = 0; i < projected.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < projected.cols(); ++j) {
      const double diff = projected(i, j) - center[j];
      s += diff * diff;
    }
    d[i] = std::sqrt(s);
  }
  return d;
}

ad::Var taperDecay(const TrainConfig& config, const std::vector<ad::Parameter*>& params,
                   ad::Tape& tape) {
  ad::Var acc = tape.constant(DenseMatrix(1, 1));
  for (ad::Parameter* p : params) {
    ad::Var v = tape.param(*p);
    acc = ad::add(acc, ad::sum(ad::mul(v, v)));
  }
  return ad::scale(acc, config.mu / 2.0);
}

ad::Var attachRegularizers(ad::Var decisionTerm, std::optional<ad::Var> miTerm,
                           const TrainConfig& config, const std::vector<ad::Parameter*>& params,
                           ad::Tape& tape) {
  ad::Var loss = decisionTerm;
  if (miTerm) {
    const double sign = config.flipMiSign ? 1.0 : -1.0;
    loss = ad::add(loss, ad::scale(*miTerm, sign * config.lambda));
  }
  if (!params.empty() && config.mu != 0.0)
    loss = ad::add(loss, taperDecay(config, params, tape));
  return loss;
}

struct EpochState {
  ProjectionState projection;
  std::vector<double> center;
};

}  // namespace

void TrainConfig::validate() const {
  if (!(nu > 0.0 && nu < 0.5)) throw ContractError("nu must lie in (0, 0.5)");
  if (batchSize < 1) throw ContractError("batchSize must be >= 1");
  if (ginLayers < 1 || hiddenDim < 1 || projectedDim < 1)
    throw ContractError("network dimensions must be >= 1");
  if (projectedDim > hiddenDim) throw ContractError("projectedDim must be <= hiddenDim");
  if (pretrainEpochs < 0 || radiiInitEpochs < 0 || trainEpochs < 0)
    throw ContractError("epoch counts must be >= 0");
  if (learningRate <= 0.0) throw ContractError("learningRate must be positive");
  if (lambda < 0.0 || mu < 0.0) throw ContractError("lambda and mu must be nonnegative");
}

std::vector<double> initCenter(const DenseMatrix& projectedAll) {
  if (projectedAll.rows() < 1) throw ContractError("initCenter: no rows");
  return columnMeans(projectedAll);
}

double computeRadius(const std::vector<double>& distances, double nu) {
  if (distances.empty()) throw ContractError("computeRadius: empty distances");
  return empiricalQuantile(distances, 1.0 - nu);
}

std::pair<double, double> initRadii(const std::vector<double>& distances, double nu) {
  if (distances.empty()) throw ContractError("initRadii: empty distances");
  const double rMin = empiricalQuantile(distances, nu);
  const double rMax = empiricalQuantile(distances, 1.0 - nu);
  return {rMin, rMax};
}

double dohscScore(double distance, double radius) {
  return distance * distance - radius * radius;
}

double do2hscScore(double distance, double rMin, double rMax) {
  return (distance - rMax) * (distance - rMin);
}

DetectorLoss dohscTotalLoss(ad::Var projected, const std::vector<double>& center,
                            std::optional<ad::Var> miTerm, const TrainConfig& config,
                            const std::vector<ad::Parameter*>& params, ad::Tape& tape) {
  ad::Var distTerm = ad::mean(ad::rowSqDistance(projected, center));
  return {attachRegularizers(distTerm, miTerm, config, params, tape), distTerm};
}

DetectorLoss do2hscTotalLoss(ad::Var distances, double rMin, double rMax,
                             std::optional<ad::Var> miTerm, const TrainConfig& config,
                             const std::vector<ad::Parameter*>& params, ad::Tape& tape) {
  if (rMin > rMax) throw ContractError("do2hscTotalLoss: rMin > rMax");
  const DenseMatrix& d = tape.value(distances);
  if (d.cols() != 1) throw ShapeError("do2hscTotalLoss: distances must be a column");
  // max{d, rMax} - min{d, rMin} rearranged around its lower bound so the
  // computed value cannot round below rMax - rMin.
  ad::Var over = ad::addScalar(ad::clampMin(distances, rMax), -rMax);
  ad::Var under = ad::scale(ad::addScalar(ad::clampMax(distances, rMin), -rMin), -1.0);
  ad::Var decision = ad::addScalar(ad::mean(ad::add(over, under)), rMax - rMin);
  return {attachRegularizers(decision, miTerm, config, params, tape), decision};
}

namespace {

// Shared state and loops for the graph trainers.
class GraphTrainer {
 public:
  GraphTrainer(const GraphDataset& ds, const TrainConfig& config, TrainLog* log)
      : ds_(ds), config_(config), log_(log), rng_(config.seed) {
    config_.validate();
    if (ds_.graphCount() == 0) throw ContractError("training set is empty");
    encoder_ = makeEncoder(ds_.featureDim, config_.ginLayers, config_.hiddenDim, rng_);
    params_ = encoder_.trainable();
  }

  void pretrain(int epochs) {
    for (int epoch = 0; epoch < epochs; ++epoch) {
      const auto batches =
          makeBatches(ds_, config_.batchSize, Rng::derive(config_.seed, 0x10000 + epoch),
                      config_.shuffle);
      for (const GraphBatch& batch : batches) {
        ad::Tape tape;
        ad::Var mi = miOnBatch(batch, tape);
        ad::Var loss = ad::scale(mi, config_.flipMiSign ? 1.0 : -1.0);
        guardFinite(tape.value(loss)(0, 0), "MI pretraining", epoch);
        tape.backward(loss);
        ad::sgdStep(params_, config_.learningRate, 0.0);
      }
    }
  }

  void refit() {
    const DenseMatrix all = encodeAll(encoder_, ds_);
    state_.projection = fitProjection(all, config_.projectedDim);
    state_.center = initCenter(applyProjection(all, state_.projection));
  }

  std::vector<double> trainingDistances() {
    const DenseMatrix all = encodeAll(encoder_, ds_);
    return rowDistances(applyProjection(all, state_.projection), state_.center);
  }

  // One pass of epochs minimizing the given objective; mode selects the
  // DOHSC distance loss or the DO2HSC interval loss with fixed radii.
  void runEpochs(int epochs, bool interval, double rMin, double rMax, int epochBase,
                 const char* stage) {
    std::vector<double> epochLosses;
    int stablePlateau = 0;
    for (int epoch = 0; epoch < epochs; ++epoch) {
      refit();
      const auto batches =
          makeBatches(ds_, config_.batchSize, Rng::derive(config_.seed, epochBase + epoch),
                      config_.shuffle);
      double epochLoss = 0.0;
      for (size_t b = 0; b < batches.size(); ++b) {
        const GraphBatch& batch = batches[b];
        ad::Tape tape;
        GinOutputs gin = ginForward(batch, encoder_, tape);
        HeadOutputs hs = heads(gin.nodeConcat, gin.graphReadout, encoder_, tape);
        bool hadNegatives = true;
        ad::Var mi =
            jsdMutualInformation(hs.node, hs.graph, batch.graphIndicator, &hadNegatives);
        if (!hadNegatives)
          addWarning(log_, "single-graph batch: MI estimated from positive pairs only");
        ad::Var projected = applyProjection(hs.graph, state_.projection, tape);

        DetectorLoss loss =
            interval
                ? do2hscTotalLoss(ad::sqrtElem(ad::rowSqDistance(projected, state_.center)),
                                  rMin, rMax, mi, config_, params_, tape)
                : dohscTotalLoss(projected, state_.center, mi, config_, params_, tape);

        const double lossValue = tape.value(loss.total)(0, 0);
        const double decisionValue = tape.value(loss.decisionTerm)(0, 0);
        guardFinite(lossValue, stage, epoch);
        if (interval && decisionValue < rMax - rMin)
          throw ContractError("interval decision term fell below its lower bound");
        if (log_)
          log_->steps.push_back({epoch, static_cast<int>(b), lossValue, decisionValue,
                                 tape.value(mi)(0, 0)});
        tape.backward(loss.total);
        ad::sgdStep(params_, config_.learningRate, 0.0);
        if (config_.refitPerBatch && b + 1 < batches.size()) refit();
        epochLoss += lossValue;
      }
      epochLoss /= static_cast<double>(batches.size());
      if (config_.earlyStop && !epochLosses.empty()) {
        const double prev = epochLosses.back();
        const double rel = std::abs(epochLoss - prev) / std::max(1.0, std::abs(prev));
        stablePlateau = rel < kEarlyStopTol ? stablePlateau + 1 : 0;
        if (stablePlateau >= kEarlyStopWindow) {
          addWarning(log_, std::string(stage) + ": early stop after epoch " +
                               std::to_string(epoch + 1));
          epochLosses.push_back(epochLoss);
          break;
        }
      }
      epochLosses.push_back(epochLoss);
    }
  }

  ad::Var miOnBatch(const GraphBatch& batch, ad::Tape& tape) {
    GinOutputs gin = ginForward(batch, encoder_, tape);
    HeadOutputs hs = heads(gin.nodeConcat, gin.graphReadout, encoder_, tape);
    bool hadNegatives = true;
    ad::Var mi = jsdMutualInformation(hs.node, hs.graph, batch.graphIndicator, &hadNegatives);
    if (!hadNegatives)
      addWarning(log_, "single-graph batch: MI estimated from positive pairs only");
    return mi;
  }

  void guardFinite(double value, const std::string& stage, int epoch) const {
    if (!std::isfinite(value))
      throw NumericError(stage + " diverged at epoch " + std::to_string(epoch + 1));
  }

  const GraphDataset& ds_;
  TrainConfig config_;
  TrainLog* log_;
  Rng rng_;
  EncoderParams encoder_;
  std::vector<ad::Parameter*> params_;
  EpochState state_;
};

}  // namespace

DetectorModel trainDohsc(const GraphDataset& trainSet, const TrainConfig& config, TrainLog* log) {
  GraphTrainer trainer(trainSet, config, log);
  trainer.pretrain(config.pretrainEpochs);
  trainer.refit();
  trainer.runEpochs(config.trainEpochs, false, 0.0, 0.0, 0x20000, "DOHSC training");
  trainer.refit();  // final frame for the stored model
  const auto distances = trainer.trainingDistances();

  DetectorModel model;
  model.mode = DetectorMode::Dohsc;
  model.config = config;
  model.projection = trainer.state_.projection;
  model.center = trainer.state_.center;
  model.radius = computeRadius(distances, config.nu);
  model.encoder = std::move(trainer.encoder_);
  return model;
}

DetectorModel trainDo2hsc(const GraphDataset& trainSet, const TrainConfig& config, TrainLog* log) {
  GraphTrainer trainer(trainSet, config, log);
  trainer.pretrain(config.pretrainEpochs);
  trainer.refit();
  trainer.runEpochs(config.radiiInitEpochs, false, 0.0, 0.0, 0x30000, "DOHSC warm-up");
  trainer.refit();

  const auto warmDistances = trainer.trainingDistances();
  const auto [rMin, rMax] = initRadii(warmDistances, config.nu);
  if (rMin == rMax)
    addWarning(log, "degenerate radii: rMin == rMax, interval collapses to a sphere shell");

  trainer.runEpochs(config.trainEpochs, true, rMin, rMax, 0x40000, "DO2HSC training");
  trainer.refit();  // final frame for the stored model

  DetectorModel model;
  model.mode = DetectorMode::Do2hsc;
  model.config = config;
  model.projection = trainer.state_.projection;
  model.center = trainer.state_.center;
  model.rMin = rMin;
  model.rMax = rMax;
  model.encoder = std::move(trainer.encoder_);
  return model;
}

namespace {

class TabularTrainer {
 public:
  TabularTrainer(const DenseMatrix& rows, const TrainConfig& config, TrainLog* log)
      : config_(config), log_(log), rng_(config.seed) {
    config_.validate();
    if (rows.rows() < 1) throw ContractError("training set is empty");
    standardize(rows);
    encoder_ = makeTabularEncoder(rows.cols(), config_.hiddenDim, rng_);
    params_ = encoder_.trainable();
  }

  void standardize(const DenseMatrix& rows) {
    featureMean_ = columnMeans(rows);
    featureStd_.assign(rows.cols(), 0.0);
    for (int i = 0; i < rows.rows(); ++i)
      for (int j = 0; j < rows.cols(); ++j) {
        const double d = rows(i, j) - featureMean_[j];
        featureStd_[j] += d * d;
      }
    for (int j = 0; j < rows.cols(); ++j) {
      featureStd_[j] = std::sqrt(featureStd_[j] / rows.rows());
      if (featureStd_[j] == 0.0) featureStd_[j] = 1.0;
    }
    data_ = rows;
    for (int i = 0; i < rows.rows(); ++i)
      for (int j = 0; j < rows.cols(); ++j)
        data_(i, j) = (rows(i, j) - featureMean_[j]) / featureStd_[j];
  }

  void refit() {
    const DenseMatrix all = encodeAllRows(encoder_, data_);
    state_.projection = fitProjection(all, config_.projectedDim);
    state_.center = initCenter(applyProjection(all, state_.projection));
  }

  std::vector<double> trainingDistances() {
    const DenseMatrix all = encodeAllRows(encoder_, data_);
    return rowDistances(applyProjection(all, state_.projection), state_.center);
  }

  void runEpochs(int epochs, bool interval, double rMin, double rMax, int epochBase,
                 const char* stage) {
    for (int epoch = 0; epoch < epochs; ++epoch) {
      refit();
      const auto batches = rowBatches(Rng::derive(config_.seed, epochBase + epoch));
      for (size_t b = 0; b < batches.size(); ++b) {
        ad::Tape tape;
        DenseMatrix rows(static_cast<int>(batches[b].size()), data_.cols());
        for (size_t i = 0; i < batches[b].size(); ++i)
          for (int j = 0; j < data_.cols(); ++j)
            rows(static_cast<int>(i), j) = data_(batches[b][i], j);
        ad::Var repr = mlpForward(encoder_.mlp, tape.constant(rows), tape);
        ad::Var projected = applyProjection(repr, state_.projection, tape);

        DetectorLoss loss =
            interval
                ? do2hscTotalLoss(ad::sqrtElem(ad::rowSqDistance(projected, state_.center)),
                                  rMin, rMax, std::nullopt, config_, params_, tape)
                : dohscTotalLoss(projected, state_.center, std::nullopt, config_, params_, tape);

        const double lossValue = tape.value(loss.total)(0, 0);
        if (!std::isfinite(lossValue))
          throw NumericError(std::string(stage) + " diverged at epoch " +
                             std::to_string(epoch + 1));
        if (log_)
          log_->steps.push_back({epoch, static_cast<int>(b), lossValue,
                                 tape.value(loss.decisionTerm)(0, 0), 0.0});
        tape.backward(loss.total);
        ad::sgdStep(params_, config_.learningRate, 0.0);
        if (config_.refitPerBatch && b + 1 < batches.size()) refit();
      }
    }
  }

  std::vector<std::vector<int>> rowBatches(uint64_t seed) {
    std::vector<int> order(data_.rows());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    if (config_.shuffle) {
      Rng rng(seed);
      rng.shuffle(order);
    }
    std::vector<std::vector<int>> batches;
    for (size_t start = 0; start < order.size(); start += config_.batchSize) {
      const size_t end = std::min(order.size(), start + config_.batchSize);
      batches.emplace_back(order.begin() + start, order.begin() + end);
    }
    return batches;
  }

  TrainConfig config_;
  TrainLog* log_;
  Rng rng_;
  DenseMatrix data_;
  std::vector<double> featureMean_, featureStd_;
  TabularEncoderParams encoder_;
  std::vector<ad::Parameter*> params_;
  EpochState state_;
};

}  // namespace

DetectorModel trainTabular(const DenseMatrix& rows, const TrainConfig& config, DetectorMode mode,
                           TrainLog* log) {
  TabularTrainer trainer(rows, config, log);
  trainer.refit();

  DetectorModel model;
  model.tabular = true;
  model.config = config;
  model.mode = mode;

  if (mode == DetectorMode::Dohsc) {
    trainer.runEpochs(config.trainEpochs, false, 0.0, 0.0, 0x50000, "tabular DOHSC");
    trainer.refit();
    model.radius = computeRadius(trainer.trainingDistances(), config.nu);
  } else {
    trainer.runEpochs(config.radiiInitEpochs, false, 0.0, 0.0, 0x60000, "tabular warm-up");
    trainer.refit();
    const auto warmDistances = trainer.trainingDistances();
    const auto [rMin, rMax] = initRadii(warmDistances, config.nu);
    if (rMin == rMax)
      addWarning(log, "degenerate radii: rMin == rMax, interval collapses to a sphere shell");
    trainer.runEpochs(config.trainEpochs, true, rMin, rMax, 0x70000, "tabular DO2HSC");
    trainer.refit();
    model.rMin = rMin;
    model.rMax = rMax;
  }
  model.projection = trainer.state_.projection;
  model.center = trainer.state_.center;
  model.featureMean = trainer.featureMean_;
  model.featureStd = trainer.featureStd_;
  model.tabularEncoder = std::move(trainer.encoder_);
  return model;
}

DenseMatrix encodeGraphs(const DetectorModel& model, const GraphDataset& ds) {
  if (model.tabular) throw ContractError("encodeGraphs: model was trained on tabular data");
  return encodeAll(const_cast<DetectorModel&>(model).encoder, ds);
}

static std::vector<ScoredInstance> scoreDistances(const DetectorModel& model,
                                                  const std::vector<double>& distances) {
  std::vector<ScoredInstance> out(distances.size());
  for (size_t i = 0; i < distances.size(); ++i) {
    out[i].index = static_cast<int>(i);
    out[i].distance = distances[i];
    out[i].score = model.mode == DetectorMode::Dohsc
                       ? dohscScore(distances[i], model.radius)
                       : do2hscScore(distances[i], model.rMin, model.rMax);
  }
  return out;
}

std::vector<ScoredInstance> scoreGraphs(const DetectorModel& model, const GraphDataset& ds) {
  const DenseMatrix all = encodeGraphs(model, ds);
  return scoreDistances(model,
                        rowDistances(applyProjection(all, model.projection), model.center));
}

std::vector<ScoredInstance> scoreRows(const DetectorModel& model, const DenseMatrix& rows) {
  if (!model.tabular) throw ContractError("scoreRows: model was trained on graphs");
  if (rows.cols() != static_cast<int>(model.featureMean.size()))
    throw ShapeError("scoreRows: feature width mismatch");
  DenseMatrix standardized = rows;
  for (int i = 0; i < rows.rows(); ++i)
    for (int j = 0; j < rows.cols(); ++j)
      standardized(i, j) = (rows(i, j) - model.featureMean[j]) / model.featureStd[j];
  const DenseMatrix all =
      encodeAllRows(const_cast<DetectorModel&>(model).tabularEncoder, standardized);
  return scoreDistances(model,
                        rowDistances(applyProjection(all, model.projection), model.center));
}

}  // namespace bihyper
