#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "msnb/markov.hpp"

namespace msnb {

enum class Kernel { NegativeBinomial, Poisson };

/// How a regression coefficient behaves across the two states.
enum class CoefMask {
  FreePerState,
  SharedAcrossStates,
  FixedZeroState0,
  FixedZeroState1,
  FixedZeroBoth,
};

enum class DispersionMask { FreePerState, SharedAcrossStates };

/// Kernel plus the sharing pattern of coefficients and dispersion. The
/// standard, restricted and full switching models are all expressed as masks.
struct ModelSpec {
  Kernel kernel = Kernel::NegativeBinomial;
  std::vector<CoefMask> coef_mask;
  DispersionMask dispersion_mask = DispersionMask::FreePerState;
  bool switching = true;

  /// Single-state model: every coefficient shared, one dispersion.
  static ModelSpec standard(Kernel kernel, std::size_t n_covariates);
  /// Only the intercept (and dispersion, for NB) switch.
  static ModelSpec restricted(Kernel kernel, std::size_t n_covariates);
  /// Every coefficient and the dispersion switch.
  static ModelSpec full(Kernel kernel, std::size_t n_covariates);

  /// Throws UsageError on mask/size violations.
  void validate(std::size_t n_covariates) const;

  bool has_dispersion() const { return kernel == Kernel::NegativeBinomial; }
  bool coefficient_free_in(std::size_t k, int state) const;
  bool dispersion_shared() const {
    return !switching || dispersion_mask == DispersionMask::SharedAcrossStates;
  }
};

const char* to_string(Kernel kernel);
const char* to_string(CoefMask mask);
Kernel parse_kernel(const std::string& text);
CoefMask parse_coef_mask(const std::string& text);

/// Count panel stored period-major: the observations of period t occupy
/// [period_begin(t), period_end(t)). Covariate rows are stored contiguously
/// and always start with the intercept column (identically 1).
class PanelDataset {
 public:
  PanelDataset() = default;

  /// `covariates` is row-major, one row of `covariate_names.size()` values per
  /// observation, intercept included. Ids default to 1-based positions.
  PanelDataset(std::vector<std::size_t> segments_per_period, std::vector<std::int64_t> counts,
               std::vector<double> covariates, std::vector<std::string> covariate_names,
               std::vector<std::int64_t> period_ids = {}, std::vector<std::int64_t> segment_ids = {});

  std::size_t periods() const { return segments_per_period_.size(); }
  std::size_t observations() const { return counts_.size(); }
  std::size_t covariate_count() const { return covariate_names_.size(); }

  std::size_t period_begin(std::size_t t) const { return offsets_[t]; }
  std::size_t period_end(std::size_t t) const { return offsets_[t + 1]; }
  std::span<const std::size_t> segments_per_period() const { return segments_per_period_; }

  std::int64_t count(std::size_t i) const { return counts_[i]; }
  std::span<const std::int64_t> counts() const { return counts_; }
  std::span<const double> covariates(std::size_t i) const {
    return {covariates_.data() + i * covariate_count(), covariate_count()};
  }
  std::span<const double> covariate_matrix() const { return covariates_; }
  const std::vector<std::string>& covariate_names() const { return covariate_names_; }

  std::int64_t period_id(std::size_t t) const { return period_ids_[t]; }
  std::int64_t segment_id(std::size_t i) const { return segment_ids_[i]; }

 private:
  std::vector<std::size_t> segments_per_period_;
  std::vector<std::size_t> offsets_;
  std::vector<std::int64_t> counts_;
  std::vector<double> covariates_;
  std::vector<std::string> covariate_names_;
  std::vector<std::int64_t> period_ids_;
  std::vector<std::int64_t> segment_ids_;
};

/// Column mapping for CSV ingestion. An empty covariate list selects every
/// column not named as period, segment or count, in file order.
struct PanelSchema {
  std::string period_column = "period";
  std::string segment_column = "segment";
  std::string count_column = "count";
  std::vector<std::string> covariate_columns;
};

PanelDataset load_panel(const std::filesystem::path& path, const PanelSchema& schema = {});

/// Writes the canonical CSV layout (period, segment, count, covariates
/// without the intercept). Values use the shortest round-trip decimal form.
void write_panel(const PanelDataset& data, const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// 64-bit FNV-1a hash of the dataset's numeric content, rendered as hex.
std::string fingerprint(const PanelDataset& data);

struct CovariateSpec {
  enum class Distribution { Constant, Uniform, Bernoulli };
  /// Segment-level covariates are drawn once per segment and reused in every
  /// period; observation-level ones are drawn independently per cell.
  enum class Level { Segment, Observation };

  std::string name;
  Distribution distribution = Distribution::Constant;
  Level level = Level::Segment;
  double value = 0.0;  // Constant
  double low = 0.0;    // Uniform
  double high = 1.0;   // Uniform
  double probability = 0.5;  // Bernoulli
};

/// Ground truth for simulation. Coefficient vectors include the intercept.
/// alpha = 0 under the NB kernel selects the Poisson limit.
struct TrueParams {
  std::vector<double> beta0;
  std::vector<double> beta1;
  double alpha0 = 0.0;
  double alpha1 = 0.0;
  TransitionProbs tp;
};

struct GenerationConfig {
  Kernel kernel = Kernel::NegativeBinomial;
  TrueParams true_params;
  std::uint64_t seed = 0;
  std::size_t periods = 0;
  std::vector<std::size_t> segments_per_period;  // size 1 means constant N
  std::vector<CovariateSpec> covariates;          // excluding the intercept

  void validate() const;
};

struct SimulatedPanel {
  PanelDataset data;
  StateSequence true_states;
};

/// Draws s_1 from the stationary law, then the chain, then every count from
/// its state's kernel. Bit-identical for a fixed seed.
SimulatedPanel simulate_panel(const GenerationConfig& cfg);

}  // namespace msnb
