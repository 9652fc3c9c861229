#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "msnb/data.hpp"
#include "msnb/mle.hpp"
#include "msnb/params.hpp"

namespace msnb {

struct BetaShape {
  double a = 1.0;
  double b = 1.0;
};

/// Independent normal priors on each coefficient and on alpha (alpha scale,
/// not log alpha), Beta priors on p01 and p10, and the indicator p01 <= p10.
/// Both states share the same coefficient and dispersion hyper-parameters.
struct PriorSpec {
  std::vector<std::string> names;
  std::vector<double> beta_mean;
  std::vector<double> beta_var;
  bool has_alpha = false;
  double alpha_mean = 0.0;
  double alpha_var = 0.0;
  BetaShape p01;
  BetaShape p10;
};

/// Means are the MLE point estimates, variances 10 * max(estimate^2, MLE
/// variance). Throws DataError when a parameter that is free under `target`
/// (every parameter when `target` is null) lacks a finite positive variance.
PriorSpec build_prior(const MleResult& mle, const ModelSpec* target = nullptr);

/// -(x - m)^2 / (2 v) - log(2 pi v) / 2.
double log_normal_density(double x, double mean, double var);

/// Normal prior term of coefficient k.
double log_prior_beta(std::size_t k, double value, const PriorSpec& prior);

/// Normal prior term of the dispersion evaluated at alpha = exp(log_alpha);
/// -inf when alpha is not positive.
double log_prior_alpha(double log_alpha, const PriorSpec& prior);

/// Full log prior: coefficient and dispersion terms (one term per distinct
/// coordinate under the mask), Beta terms for the transition probabilities,
/// and the state-sequence prior. -inf outside the support, including
/// p01 > p10. Single-state specs contribute no transition or state terms.
double log_prior(const ParamState& theta, const PriorSpec& prior, const ModelSpec& spec);

}  // namespace msnb
