#include "bihyper/checkpoint.hpp"

#include <cstdio>
#include <fstream>

#include "bihyper/errors.hpp"
#include "bihyper/util.hpp"

namespace bihyper {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

json matrixToJson(const DenseMatrix& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"values", m.values()}};
}

DenseMatrix matrixFromJson(const json& j) {
  return DenseMatrix(j.at("rows").get<int>(), j.at("cols").get<int>(),
                     j.at("values").get<std::vector<double>>());
}

json mlpToJson(const MlpParams& mlp) {
  json layers = json::array();
  for (const LinearParams& l : mlp.layers)
    layers.push_back(json{{"weight", matrixToJson(l.weight.value)},
                          {"bias", matrixToJson(l.bias.value)}});
  return layers;
}

MlpParams mlpFromJson(const json& j) {
  MlpParams mlp;
  for (const json& layer : j) {
    const DenseMatrix w = matrixFromJson(layer.at("weight"));
    const DenseMatrix b = matrixFromJson(layer.at("bias"));
    LinearParams l(w.rows(), w.cols());
    l.weight.value = w;
    l.bias.value = b;
    mlp.layers.push_back(std::move(l));
  }
  return mlp;
}

}  // namespace

json configToJson(const TrainConfig& c) {
  return json{{"lambda", c.lambda},
              {"mu", c.mu},
              {"learning_rate", c.learningRate},
              {"pretrain_epochs", c.pretrainEpochs},
              {"radii_init_epochs", c.radiiInitEpochs},
              {"train_epochs", c.trainEpochs},
              {"nu", c.nu},
              {"batch_size", c.batchSize},
              {"gin_layers", c.ginLayers},
              {"hidden_dim", c.hiddenDim},
              {"projected_dim", c.projectedDim},
              {"seed", c.seed},
              {"shuffle", c.shuffle},
              {"flip_mi_sign", c.flipMiSign},
              {"refit_per_batch", c.refitPerBatch},
              {"early_stop", c.earlyStop}};
}

TrainConfig configFromJson(const json& j) {
  TrainConfig c;
  c.lambda = j.value("lambda", c.lambda);
  c.mu = j.value("mu", c.mu);
  c.learningRate = j.value("learning_rate", c.learningRate);
  c.pretrainEpochs = j.value("pretrain_epochs", c.pretrainEpochs);
  c.radiiInitEpochs = j.value("radii_init_epochs", c.radiiInitEpochs);
  c.trainEpochs = j.value("train_epochs", c.trainEpochs);
  c.nu = j.value("nu", c.nu);
  c.batchSize = j.value("batch_size", c.batchSize);
  c.ginLayers = j.value("gin_layers", c.ginLayers);
  c.hiddenDim = j.value("hidden_dim", c.hiddenDim);
  c.projectedDim = j.value("projected_dim", c.projectedDim);
  c.seed = j.value("seed", c.seed);
  c.shuffle = j.value("shuffle", c.shuffle);
  c.flipMiSign = j.value("flip_mi_sign", c.flipMiSign);
  c.refitPerBatch = j.value("refit_per_batch", c.refitPerBatch);
  c.earlyStop = j.value("early_stop", c.earlyStop);
  return c;
}

json modelToJson(const DetectorModel& model) {
  json j;
  j["format_version"] = kFormatVersion;
  j["mode"] = model.mode == DetectorMode::Dohsc ? "dohsc" : "do2hsc";
  j["data_kind"] = model.tabular ? "tabular" : "graph";
  j["config"] = configToJson(model.config);
  if (model.tabular) {
    j["encoder"] = {{"feature_dim", model.tabularEncoder.featureDim},
                    {"hidden_dim", model.tabularEncoder.hiddenDim},
                    {"mlp", mlpToJson(model.tabularEncoder.mlp)}};
    j["feature_mean"] = model.featureMean;
    j["feature_std"] = model.featureStd;
  } else {
    json mlps = json::array();
    for (const MlpParams& mlp : model.encoder.ginMlps) mlps.push_back(mlpToJson(mlp));
    j["encoder"] = {{"feature_dim", model.encoder.featureDim},
                    {"layer_count", model.encoder.layerCount},
                    {"hidden_dim", model.encoder.hiddenDim},
                    {"epsilons", model.encoder.epsilons},
                    {"gin_mlps", mlps},
                    {"node_head", mlpToJson(model.encoder.nodeHead)},
                    {"graph_head", mlpToJson(model.encoder.graphHead)}};
  }
  j["projection"] = {{"w", matrixToJson(model.projection.w)},
                     {"mean", model.projection.mean},
                     {"retained_sigma", model.projection.retainedSigma},
                     {"k_prime", model.projection.kPrime}};
  j["center"] = model.center;
  if (model.mode == DetectorMode::Dohsc)
    j["boundary"] = {{"radius", model.radius}};
  else
    j["boundary"] = {{"r_min", model.rMin}, {"r_max", model.rMax}};
  return j;
}

DetectorModel modelFromJson(const json& j) {
  if (j.value("format_version", -1) != kFormatVersion)
    throw IngestError("checkpoint: unsupported format_version");
  DetectorModel model;
  model.mode = j.at("mode").get<std::string>() == "dohsc" ? DetectorMode::Dohsc
                                                          : DetectorMode::Do2hsc;
  model.tabular = j.at("data_kind").get<std::string>() == "tabular";
  model.config = configFromJson(j.at("config"));
  const json& enc = j.at("encoder");
  if (model.tabular) {
    model.tabularEncoder.featureDim = enc.at("feature_dim").get<int>();
    model.tabularEncoder.hiddenDim = enc.at("hidden_dim").get<int>();
    model.tabularEncoder.mlp = mlpFromJson(enc.at("mlp"));
    model.featureMean = j.at("feature_mean").get<std::vector<double>>();
    model.featureStd = j.at("feature_std").get<std::vector<double>>();
  } else {
    model.encoder.featureDim = enc.at("feature_dim").get<int>();
    model.encoder.layerCount = enc.at("layer_count").get<int>();
    model.encoder.hiddenDim = enc.at("hidden_dim").get<int>();
    model.encoder.epsilons = enc.at("epsilons").get<std::vector<double>>();
    for (const json& mlp : enc.at("gin_mlps"))
      model.encoder.ginMlps.push_back(mlpFromJson(mlp));
    model.encoder.nodeHead = mlpFromJson(enc.at("node_head"));
    model.encoder.graphHead = mlpFromJson(enc.at("graph_head"));
  }
  const json& proj = j.at("projection");
  model.projection.w = matrixFromJson(proj.at("w"));
  model.projection.mean = proj.at("mean").get<std::vector<double>>();
  model.projection.retainedSigma = proj.at("retained_sigma").get<std::vector<double>>();
  model.projection.kPrime = proj.at("k_prime").get<int>();
  model.center = j.at("center").get<std::vector<double>>();
  const json& boundary = j.at("boundary");
  if (model.mode == DetectorMode::Dohsc) {
    model.radius = boundary.at("radius").get<double>();
  } else {
    model.rMin = boundary.at("r_min").get<double>();
    model.rMax = boundary.at("r_max").get<double>();
    if (model.rMin > model.rMax) throw IngestError("checkpoint: r_min > r_max");
  }
  return model;
}

std::string runIdFor(const json& configJson, const std::string& salt) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(configJson.dump() + "|" + salt)));
  return buf;
}

void saveCheckpoint(const DetectorModel& model, const CheckpointInfo& info,
                    const std::filesystem::path& file) {
  json j = modelToJson(model);
  j["run_id"] = info.runId;
  j["dataset"] = {{"path", info.datasetPath},
                  {"name", info.datasetName},
                  {"mode", info.mode},
                  {"normal_class", info.normalClass}};
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  out << j.dump(1) << "\n";
  if (!out) throw IoError("write failure on " + file.string());
}

DetectorModel loadCheckpoint(const std::filesystem::path& file, CheckpointInfo* info) {
  std::ifstream in(file);
  if (!in) throw IngestError("missing checkpoint " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IngestError("checkpoint " + file.string() + ": " + e.what());
  }
  if (info) {
    info->runId = j.value("run_id", "");
    const json ds = j.value("dataset", json::object());
    info->datasetPath = ds.value("path", "");
    info->datasetName = ds.value("name", "");
    info->mode = ds.value("mode", "");
    info->normalClass = ds.value("normal_class", 0);
  }
  return modelFromJson(j);
}

}  // namespace bihyper
