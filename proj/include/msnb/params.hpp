#pragma once

#include <cstddef>
#include <vector>

#include "msnb/data.hpp"
#include "msnb/markov.hpp"

namespace msnb {

/// One realization of the full parameter vector: coefficients and log
/// dispersion of both states, transition probabilities, and the latent
/// states. Dispersion is carried as log(alpha) so alpha > 0 by construction.
struct ParamState {
  std::vector<double> beta0;
  std::vector<double> beta1;
  double log_alpha0 = 0.0;
  double log_alpha1 = 0.0;
  TransitionProbs tp{0.0, 1.0};
  StateSequence s;

  const std::vector<double>& beta(int state) const { return state == 0 ? beta0 : beta1; }
  std::vector<double>& beta(int state) { return state == 0 ? beta0 : beta1; }
  double log_alpha(int state) const { return state == 0 ? log_alpha0 : log_alpha1; }
  double& log_alpha(int state) { return state == 0 ? log_alpha0 : log_alpha1; }
};

/// Checks dimensions and mask invariants: shared coefficients bit-identical,
/// zeroed coefficients exactly 0, shared dispersion identical, binary states of
/// length `periods`, and (for switching models) p01 <= p10. Throws DataError.
void check_param_state(const ParamState& theta, const ModelSpec& spec, std::size_t n_covariates,
                       std::size_t periods);

/// Rewrites theta so it satisfies the mask: copies shared coordinates from
/// state 0 into state 1 and zeroes fixed coordinates.
void apply_mask(ParamState& theta, const ModelSpec& spec);

}  // namespace msnb
