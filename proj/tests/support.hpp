#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "msnb/data.hpp"

namespace msnb::test {

/// Fresh empty directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("msnb_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Two-state generation config with one Bernoulli and one uniform segment-level covariate.
inline GenerationConfig two_state_config(std::uint64_t seed, std::size_t periods = 200, std::size_t segments = 30) {
  GenerationConfig cfg;
  cfg.kernel = Kernel::NegativeBinomial;
  cfg.seed = seed;
  cfg.periods = periods;
  cfg.segments_per_period = {segments};
  cfg.true_params.beta0 = {0.0, 0.4, -0.5};
  cfg.true_params.beta1 = {1.2, 0.2, -0.5};
  cfg.true_params.alpha0 = 0.4;
  cfg.true_params.alpha1 = 1.2;
  cfg.true_params.tp = {0.15, 0.6};
  CovariateSpec x1;
  x1.name = "x1";
  x1.distribution = CovariateSpec::Distribution::Bernoulli;
  x1.probability = 0.5;
  CovariateSpec x2;
  x2.name = "x2";
  x2.distribution = CovariateSpec::Distribution::Uniform;
  x2.low = 0.0;
  x2.high = 1.0;
  cfg.covariates = {x1, x2};
  return cfg;
}

/// Same covariates, both states sharing (beta0, alpha0).
inline GenerationConfig single_state_config(std::uint64_t seed, std::size_t periods = 200, std::size_t segments = 30) {
  GenerationConfig cfg = two_state_config(seed, periods, segments);
  cfg.true_params.beta0 = {0.3, 0.4, -0.5};
  cfg.true_params.beta1 = cfg.true_params.beta0;
  cfg.true_params.alpha0 = 0.6;
  cfg.true_params.alpha1 = 0.6;
  return cfg;
}

/// Panel of iid observations: intercept plus optional extra columns.
inline PanelDataset make_panel(std::vector<std::size_t> segments, std::vector<std::int64_t> counts,
                               std::vector<double> covariates, std::vector<std::string> names) {
  return PanelDataset(std::move(segments), std::move(counts), std::move(covariates), std::move(names));
}

}  // namespace msnb::test
