#pragma once

#include <filesystem>

#include <json.hpp>

#include "msnb/data.hpp"

namespace msnb {

/// JSON keys mirror the GenerationConfig fields:
///
///   { "kernel": "nb", "seed": 7, "periods": 200, "segments_per_period": 30,
///     "true_params": { "beta0": [...], "beta1": [...], "alpha0": 0.4,
///                      "alpha1": 1.2, "p01": 0.15, "p10": 0.6 },
///     "covariates": [ { "name": "x1", "distribution": "bernoulli",
///                       "probability": 0.5, "level": "segment" } ] }
///
/// Missing or mistyped keys raise UsageError naming the key.
GenerationConfig generation_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GenerationConfig& cfg);
GenerationConfig load_generation_config(const std::filesystem::path& path);

nlohmann::json to_json(const TrueParams& p);
TrueParams true_params_from_json(const nlohmann::json& j);

}  // namespace msnb
