#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "bihyper/detector.hpp"

namespace bihyper {

nlohmann::json configToJson(const TrainConfig& config);
TrainConfig configFromJson(const nlohmann::json& j);

nlohmann::json modelToJson(const DetectorModel& model);
DetectorModel modelFromJson(const nlohmann::json& j);

// 16-hex-digit id derived from the canonical config JSON (seed included).
std::string runIdFor(const nlohmann::json& configJson, const std::string& salt);

struct CheckpointInfo {
  std::string runId;
  std::string datasetPath;
  std::string datasetName;
  std::string mode;  // dohsc | do2hsc | tabular-dohsc | tabular-do2hsc
  int normalClass = 0;
};

void saveCheckpoint(const DetectorModel& model, const CheckpointInfo& info,
                    const std::filesystem::path& file);
DetectorModel loadCheckpoint(const std::filesystem::path& file, CheckpointInfo* info = nullptr);

}  // namespace bihyper
