#include "msnb/priors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "msnb/error.hpp"
#include "msnb/kernels.hpp"
#include "msnb/markov.hpp"

namespace msnb {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double inflated_variance(double estimate, double variance) {
  return 10.0 * std::max(estimate * estimate, variance);
}

bool usable_variance(double v) { return std::isfinite(v) && v > 0.0; }

double log_beta_density(double p, BetaShape shape) {
  if (!(p >= 0.0 && p <= 1.0)) return kNegInf;
  double lp = log_gamma(shape.a + shape.b) - log_gamma(shape.a) - log_gamma(shape.b);
  if (shape.a != 1.0) lp += (shape.a - 1.0) * std::log(p);
  if (shape.b != 1.0) lp += (shape.b - 1.0) * std::log1p(-p);
  return lp;
}

}  // namespace

PriorSpec build_prior(const MleResult& mle, const ModelSpec* target) {
  const std::size_t K = mle.beta_hat.size();
  if (target && target->coef_mask.size() != K) {
    throw UsageError("prior target has " + std::to_string(target->coef_mask.size()) + " coefficients, MLE has " +
                     std::to_string(K));
  }
  PriorSpec prior;
  prior.names.assign(mle.names.begin(), mle.names.begin() + static_cast<std::ptrdiff_t>(K));
  prior.beta_mean.resize(K);
  prior.beta_var.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    const bool needed = !target || target->coef_mask[k] != CoefMask::FixedZeroBoth;
    const double v = mle.variance(k);
    if (needed && (!usable_variance(v) || !std::isfinite(mle.beta_hat[k]))) {
      throw DataError("missing MLE variance for parameter '" + mle.names[k] + "'");
    }
    prior.beta_mean[k] = mle.beta_hat[k];
    prior.beta_var[k] = needed ? inflated_variance(mle.beta_hat[k], v) : std::numeric_limits<double>::quiet_NaN();
  }
  prior.has_alpha = mle.kernel == Kernel::NegativeBinomial;
  if (target && target->has_dispersion() != prior.has_alpha) {
    throw UsageError("prior kernel does not match the target model kernel");
  }
  if (prior.has_alpha) {
    const double v = mle.variance(K);
    if (!usable_variance(v) || !std::isfinite(mle.alpha_hat)) {
      throw DataError("missing MLE variance for parameter 'alpha'");
    }
    prior.alpha_mean = mle.alpha_hat;
    prior.alpha_var = inflated_variance(mle.alpha_hat, v);
  }
  return prior;
}

double log_normal_density(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * d * d / var - 0.5 * std::log(2.0 * std::numbers::pi * var);
}

double log_prior_beta(std::size_t k, double value, const PriorSpec& prior) {
  return log_normal_density(value, prior.beta_mean[k], prior.beta_var[k]);
}

double log_prior_alpha(double log_alpha, const PriorSpec& prior) {
  const double alpha = std::exp(log_alpha);
  if (!(alpha > 0.0) || !std::isfinite(alpha)) return kNegInf;
  return log_normal_density(alpha, prior.alpha_mean, prior.alpha_var);
}

double log_prior(const ParamState& theta, const PriorSpec& prior, const ModelSpec& spec) {
  double lp = 0.0;
  for (std::size_t k = 0; k < spec.coef_mask.size(); ++k) {
    switch (spec.coef_mask[k]) {
      case CoefMask::FreePerState:
        lp += log_prior_beta(k, theta.beta0[k], prior) + log_prior_beta(k, theta.beta1[k], prior);
        break;
      case CoefMask::SharedAcrossStates:
      case CoefMask::FixedZeroState1: lp += log_prior_beta(k, theta.beta0[k], prior); break;
      case CoefMask::FixedZeroState0: lp += log_prior_beta(k, theta.beta1[k], prior); break;
      case CoefMask::FixedZeroBoth: break;
    }
  }
  if (spec.has_dispersion()) {
    lp += log_prior_alpha(theta.log_alpha0, prior);
    if (!spec.dispersion_shared()) lp += log_prior_alpha(theta.log_alpha1, prior);
  }
  if (!spec.switching) return lp;
  if (!enforce_identification(theta.tp)) return kNegInf;
  lp += log_beta_density(theta.tp.p01, prior.p01) + log_beta_density(theta.tp.p10, prior.p10);
  if (lp == kNegInf) return lp;
  return lp + log_state_prior(theta.s, theta.tp);
}

}  // namespace msnb
