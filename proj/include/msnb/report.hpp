#pragma once

#include <string>

#include <json.hpp>

#include "msnb/inference.hpp"
#include "msnb/mle.hpp"
#include "msnb/priors.hpp"
#include "msnb/sampler.hpp"

namespace msnb {

/// Label of the goodness-of-fit column.
inline constexpr const char* kGofLabel = "posterior-predictive p (χ² discrepancy)";

nlohmann::json to_json(const SummaryReport& report);
nlohmann::json to_json(const MleResult& mle, std::size_t n_obs);
nlohmann::json to_json(const PriorSpec& prior);
/// Scalar settings only; per-chain overrides are omitted.
nlohmann::json to_json(const ChainConfig& cfg);

/// Fixed-width table, one "est [lo, hi]" row per parameter at the first level.
std::string render_summary(const SummaryReport& report);
std::string render_mle(const MleResult& mle, std::size_t n_obs);

}  // namespace msnb
