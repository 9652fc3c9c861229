#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "msnb/data.hpp"
#include "msnb/params.hpp"
#include "msnb/priors.hpp"
#include "msnb/random.hpp"

namespace msnb {

/// A continuous coordinate updated by Metropolis-Hastings. Shared
/// coordinates are written to both states.
struct Coordinate {
  enum class Kind { Beta, LogAlpha };
  Kind kind = Kind::Beta;
  int state = 0;
  std::size_t index = 0;  // covariate index for Beta
  bool shared = false;
  std::string name;
};

/// Coordinates in sweep order: state-0 coefficients (shared ones included),
/// log alpha of state 0 (or the shared one), then the remaining state-1
/// coefficients and log alpha of state 1.
std::vector<Coordinate> sweep_coordinates(const ModelSpec& spec, const std::vector<std::string>& covariate_names);

/// Initial random-walk standard deviations on the coefficient and log-alpha scales.
struct JumpScales {
  std::vector<double> beta;
  double log_alpha = 0.1;
};

/// Scales from MLE standard errors; the log-alpha scale uses se(alpha) / alpha.
JumpScales jump_scales_from_mle(const MleResult& mle);

struct ChainConfig {
  std::size_t n_chains = 8;
  std::size_t total_iters = 100000;
  std::size_t burn_in = 10000;
  std::size_t thin = 10;
  std::size_t block_len = 12;
  double target_acceptance = 0.30;
  std::size_t adapt_window = 200;
  std::uint64_t seed = 1;
  /// Worker threads for the ensemble; 0 uses the hardware concurrency.
  std::size_t threads = 0;
  /// Empty means 0.1 for every coordinate.
  JumpScales jump;
  /// Optional overrides, one entry per chain. Streams default to the chain
  /// index; initial points default to the perturbed prior mean.
  std::vector<std::uint64_t> chain_streams;
  std::vector<ParamState> initial_points;

  /// Throws UsageError.
  void validate() const;
};

/// Per-coordinate acceptance counts over the current adaptation window.
class AdaptationLedger {
 public:
  explicit AdaptationLedger(std::size_t n_coords = 0);

  void record(std::size_t coord, bool accepted);
  std::size_t window_proposed(std::size_t coord) const { return win_prop_[coord]; }
  double window_rate(std::size_t coord) const;
  void reset_window();
  /// Ends burn-in; later adaptation attempts are rejected.
  void freeze();
  bool frozen() const { return frozen_; }
  std::size_t size() const { return win_prop_.size(); }

 private:
  std::vector<std::size_t> win_acc_;
  std::vector<std::size_t> win_prop_;
  bool frozen_ = false;
};

/// sd <- sd * exp(rate - target) per coordinate, using the ledger's current
/// window. Throws UsageError once the ledger is frozen.
std::vector<double> adapt_jump_sds(const AdaptationLedger& ledger, const std::vector<double>& sds,
                                   double target = 0.30);

/// Random-walk M-H step on a scalar with a symmetric normal proposal.
/// log_target(x) may return -inf; such proposals are rejected.
bool metropolis_step(double& x, double& log_target_x, const std::function<double(double)>& log_target,
                     double jump_sd, Rng& rng);

/// One M-H update of a single coordinate of theta, targeting
/// f(Y | theta) * prior(coordinate). Log-alpha proposals carry the Jacobian
/// of the alpha-scale prior. Evaluates the likelihood from scratch.
bool mh_update_scalar(const Coordinate& coord, ParamState& theta, const PanelDataset& data,
                      const PriorSpec& prior, const ModelSpec& spec, double jump_sd, Rng& rng);

/// Gibbs draws of p01 from Beta(a0 + n01, b0 + n00) on [0, p10], then p10
/// from Beta(a1 + n10, b1 + n11) on [p01, 1], by inverse CDF.
void gibbs_update_transitions(ParamState& theta, const PriorSpec& prior, Rng& rng);

/// Draws one value from Beta(a, b) restricted to [lo, hi] by inverse CDF,
/// using the upper tail when the interval sits above the median. lo == hi
/// returns lo. Throws UsageError for lo > hi or non-positive shapes.
double truncated_beta(double a, double b, double lo, double hi, Rng& rng);

/// Exact block Gibbs update of the states. Blocks have length tau starting
/// at `offset` (a leading partial block covers [0, offset)); a single block
/// when T <= tau. Each block is drawn from its full conditional by
/// enumerating all assignments. Evaluates the likelihood from scratch.
void gibbs_update_states(ParamState& theta, const PanelDataset& data, const ModelSpec& spec, std::size_t tau,
                         Rng& rng, std::size_t offset = 0);

struct ChainSample {
  std::size_t chain = 0;
  std::vector<std::size_t> sweeps;
  /// Row-major, one row of coordinate values per retained draw.
  std::vector<double> values;
  std::vector<TransitionProbs> tp;
  std::vector<double> loglik;
  std::vector<double> log_joint;
  /// Row-major, one row of T states per retained draw.
  std::vector<std::uint8_t> states;
  /// Jump sds after each adaptation window.
  std::vector<std::vector<double>> sd_trace;
  std::vector<double> jump_sd;
  /// Post-burn-in acceptance counts per coordinate.
  std::vector<std::size_t> accepted;
  std::vector<std::size_t> proposed;
  /// Burn-in relabelings applied because state 1 held most periods.
  std::size_t relabels = 0;

  std::size_t draws() const { return loglik.size(); }
};

struct PosteriorSample {
  ModelSpec spec;
  std::vector<std::string> covariate_names;
  std::vector<Coordinate> coords;
  std::size_t periods = 0;
  std::vector<ChainSample> chains;
  std::vector<std::string> warnings;

  std::size_t total_draws() const;
  std::size_t draws_per_chain() const { return chains.empty() ? 0 : chains.front().draws(); }
  /// Coordinates followed by p01 and p10 for switching models.
  std::vector<std::string> parameter_names() const;
  /// Series of parameter `p` (index into parameter_names()) in chain c.
  std::vector<double> chain_series(std::size_t c, std::size_t p) const;
  std::vector<double> pooled(std::size_t p) const;
  std::vector<double> pooled_loglik() const;
  ParamState param_state(std::size_t c, std::size_t i) const;
};

/// Prior mean plus delta_c prior sds with delta_c evenly spaced on [-2, 2];
/// state 1 uses delta_{n-1-c}. log alpha starts at log(mean) + delta_c / 2.
/// States start at 0 and transitions at (0.2, 0.5).
ParamState initial_point(const PriorSpec& prior, const ModelSpec& spec, std::size_t periods, std::size_t chain,
                         std::size_t n_chains);

/// Runs one chain: validates the configuration, discards burn-in (adapting
/// the jump sds every window), then keeps every thin-th sweep. At each
/// burn-in window end, label-symmetric switching models swap the state
/// labels if state 1 holds more than half of the periods. Deterministic
/// in (cfg.seed, stream). Throws DataError for an initial point of zero
/// density and NumericalError if the log-joint becomes non-finite.
ChainSample run_chain(const PanelDataset& data, const ModelSpec& spec, const PriorSpec& prior,
                      const ChainConfig& cfg, std::size_t chain);

/// Runs cfg.n_chains chains, concurrently when threads allow. The result
/// does not depend on the thread count. Identical chains add a warning.
PosteriorSample run_ensemble(const PanelDataset& data, const ModelSpec& spec, const PriorSpec& prior,
                             const ChainConfig& cfg);

}  // namespace msnb
