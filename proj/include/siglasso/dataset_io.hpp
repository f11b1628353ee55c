#pragma once

#include <json.hpp>
#include <string>

#include "siglasso/pipeline.hpp"
#include "siglasso/signature.hpp"
#include "siglasso/simulate.hpp"

namespace siglasso {

// JSON Lines dataset: one object per individual with keys id,
// feature_times, feature_values, target_times, target_values.
Dataset load_dataset_jsonl(const std::string& path);
void save_dataset_jsonl(const Dataset& ds, const std::string& path);

nlohmann::json record_to_json(const IndividualRecord& rec);
IndividualRecord record_from_json(const nlohmann::json& j);

// Model file: {"d", "N", "p", "weights", "intercept", "coefficients"} with
// coefficients keyed by comma-separated words; zero rows are omitted.
nlohmann::json model_to_json(const SigLassoModel& model);
SigLassoModel model_from_json(const nlohmann::json& j);
SigLassoModel load_model(const std::string& path);
void save_model(const SigLassoModel& model, const std::string& path);

// Debug dump of a signature: {"d", "N", "layers"}.
nlohmann::json signature_to_json(const TruncatedSignature& sig);
// Word-keyed export {"": 1, "1": ..., "1,2": ...}.
nlohmann::json signature_to_word_map(const TruncatedSignature& sig);

nlohmann::json config_to_json(const SimulationConfig& config);
SimulationConfig config_from_json(const nlohmann::json& j);

// Ground-truth sidecar written by the simulator: dense grid plus noise-free
// feature and target paths per individual.
nlohmann::json truth_to_json(const SimulationOutput& out,
                             const SimulationConfig& config);

}  // namespace siglasso
