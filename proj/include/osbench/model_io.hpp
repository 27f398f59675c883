#pragma once

#include "osbench/classifiers.hpp"

#include <filesystem>
#include <memory>
#include <string>

namespace osbench {

// Model document: an `osbench_model_v1` header of key=value lines (variant,
// kernel, hyperparameters, class registry, declared array lengths) followed by
// `binary_bytes=N`, a newline, and N bytes of little-endian float64 payload.
std::string serialize_model(const TrainedModel& model);
std::unique_ptr<TrainedModel> deserialize_model(const std::string& bytes);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
std::unique_ptr<TrainedModel> load_model(const std::filesystem::path& path);

} // namespace osbench
