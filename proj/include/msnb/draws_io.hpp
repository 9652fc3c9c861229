#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "msnb/data.hpp"
#include "msnb/inference.hpp"
#include "msnb/sampler.hpp"

namespace msnb {

/// Draws file, version 1:
///
///   # msnb-draws v1
///   chain,sweep,<coordinate names...>[,p01,p10],loglik,logjoint
///   0,10009,0.52,...
///
/// One row per retained draw; dispersion columns hold log alpha. Values use
/// the shortest round-trip decimal form.
void write_draws(const PosteriorSample& sample, const std::filesystem::path& path);

/// States file, version 1:
///
///   # msnb-states v1
///   # periods <T>
///   <chain> <sweep> <T characters of 0/1>
void write_states(const PosteriorSample& sample, const std::filesystem::path& path);

/// "period,prob,sd" with the dataset's period ids.
void write_state_probs(const StateProbSeries& series, const PanelDataset& data, const std::filesystem::path& path);

struct DrawsTable {
  std::vector<std::string> parameters;  // columns between sweep and loglik
  std::vector<std::size_t> chain;
  std::vector<std::size_t> sweep;
  std::vector<std::vector<double>> values;  // per row
  std::vector<double> loglik;
  std::vector<double> log_joint;

  std::size_t n_chains() const;
  /// Column p of chain c in file order.
  std::vector<double> series(std::size_t c, std::size_t p) const;
};

/// Throws DataError on a malformed or unversioned file.
DrawsTable read_draws(const std::filesystem::path& path);

struct StateProbTable {
  std::vector<std::int64_t> period;
  std::vector<double> prob;
  std::vector<double> sd;
};

StateProbTable read_state_probs(const std::filesystem::path& path);

}  // namespace msnb
