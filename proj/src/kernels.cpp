#include "msnb/kernels.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "msnb/error.hpp"

namespace msnb {

namespace {

constexpr std::int64_t kExactRisingLimit = 256;

void check_nb_args(std::int64_t a, double lambda, double alpha) {
  if (a < 0) throw UsageError("count must be non-negative");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw UsageError("rate must be positive and finite");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw UsageError("dispersion must be positive and finite");
}

}  // namespace

double log_gamma(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

double log_rising_factorial(std::int64_t a, double r) {
  if (a <= kExactRisingLimit) {
    double acc = 0.0;
    for (std::int64_t j = 0; j < a; ++j) acc += std::log(r + static_cast<double>(j));
    return acc;
  }
  const double ad = static_cast<double>(a);
  if (r < 10.0) return log_gamma(ad + r) - log_gamma(r);
  // Difference of Stirling series; log1p keeps it accurate when r >> a.
  const double z = r + ad;
  auto tail = [](double x) {
    const double x2 = x * x;
    return (1.0 / 12.0 - (1.0 / 360.0 - 1.0 / (1260.0 * x2)) / x2) / x;
  };
  return (r - 0.5) * std::log1p(ad / r) + ad * std::log(z) - ad + tail(z) - tail(r);
}

double rate(std::span<const double> beta, std::span<const double> x) {
  if (beta.size() != x.size()) {
    throw UsageError("rate: coefficient length " + std::to_string(beta.size()) +
                     " does not match covariate length " + std::to_string(x.size()));
  }
  double eta = 0.0;
  for (std::size_t k = 0; k < beta.size(); ++k) eta += beta[k] * x[k];
  if (!std::isfinite(eta) || eta > kMaxLogRate) {
    throw NumericalError("rate overflow: linear predictor " + std::to_string(eta));
  }
  return std::exp(eta);
}

double log_pmf_nb(std::int64_t a, double lambda, double alpha) {
  check_nb_args(a, lambda, alpha);
  const double r = 1.0 / alpha;
  const double al = alpha * lambda;
  const double log1p_al = std::log1p(al);
  const double ad = static_cast<double>(a);
  double lp = log_rising_factorial(a, r) - log_gamma(ad + 1.0) - r * log1p_al;
  if (a > 0) lp += ad * (std::log(al) - log1p_al);
  return lp;
}

double log_pmf_poisson(std::int64_t a, double lambda) {
  if (a < 0) throw UsageError("count must be non-negative");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw UsageError("rate must be positive and finite");
  const double ad = static_cast<double>(a);
  return (a > 0 ? ad * std::log(lambda) : 0.0) - lambda - log_gamma(ad + 1.0);
}

double total_log_likelihood(const ParamState& theta, const PanelDataset& data,
                            const ModelSpec& spec) {
  const std::size_t K = data.covariate_count();
  if (theta.beta0.size() != K || theta.beta1.size() != K) {
    throw UsageError("coefficient vectors do not match the covariate dimension");
  }
  if (theta.s.size() != data.periods()) {
    throw UsageError("state sequence length does not match the number of periods");
  }
  const bool nb = spec.kernel == Kernel::NegativeBinomial;
  double total = 0.0;
  for (std::size_t t = 0; t < data.periods(); ++t) {
    const int state = spec.switching ? theta.s[t] : 0;
    const auto& beta = theta.beta(state);
    const double alpha = std::exp(theta.log_alpha(state));
    for (std::size_t i = data.period_begin(t); i < data.period_end(t); ++i) {
      const double lambda = rate(beta, data.covariates(i));
      total += nb ? log_pmf_nb(data.count(i), lambda, alpha) : log_pmf_poisson(data.count(i), lambda);
    }
  }
  if (!std::isfinite(total)) throw NumericalError("log-likelihood is not finite");
  return total;
}

std::array<RateSummary, 2> rate_summary(const ParamState& theta, const PanelDataset& data,
                                        Kernel kernel) {
  std::array<RateSummary, 2> out{};
  const double n = static_cast<double>(data.observations());
  if (n == 0) throw DataError("rate summary of an empty dataset");
  for (int state = 0; state < 2; ++state) {
    const double alpha = kernel == Kernel::NegativeBinomial ? std::exp(theta.log_alpha(state)) : 0.0;
    double sum_rate = 0.0;
    double sum_sd = 0.0;
    for (std::size_t i = 0; i < data.observations(); ++i) {
      const double lambda = rate(theta.beta(state), data.covariates(i));
      sum_rate += lambda;
      sum_sd += std::sqrt(lambda * (1.0 + alpha * lambda));
    }
    out[state] = {sum_rate / n, sum_sd / n};
  }
  return out;
}

std::int64_t sample_count(Kernel kernel, double lambda, double alpha, Rng& rng) {
  double mean = lambda;
  if (kernel == Kernel::NegativeBinomial && alpha > 0.0) {
    std::gamma_distribution<double> gamma(1.0 / alpha, alpha * lambda);
    mean = gamma(rng);
  }
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<std::int64_t> poisson(mean);
  return poisson(rng);
}

}  // namespace msnb
