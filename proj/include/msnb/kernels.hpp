#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "msnb/data.hpp"
#include "msnb/params.hpp"
#include "msnb/random.hpp"

namespace msnb {

/// Largest linear predictor whose exponential is representable.
inline constexpr double kMaxLogRate = 709.782712893384;

/// exp(beta . x). Throws NumericalError when the exponential overflows and
/// UsageError on a dimension mismatch.
double rate(std::span<const double> beta, std::span<const double> x);

/// log of the NB mass with mean lambda and dispersion alpha (variance
/// lambda (1 + alpha lambda)), evaluated through log-gamma.
double log_pmf_nb(std::int64_t a, double lambda, double alpha);

double log_pmf_poisson(std::int64_t a, double lambda);

/// log Gamma(a + r) - log Gamma(r) for integer a >= 0. Exact summation for
/// moderate a, which avoids the cancellation of two large log-gamma values
/// when r is huge.
double log_rising_factorial(std::int64_t a, double r);

/// Thread-safe log-gamma.
double log_gamma(double x);

/// Sum of log masses over every observation, each evaluated with the
/// parameters of its period's state.
double total_log_likelihood(const ParamState& theta, const PanelDataset& data,
                            const ModelSpec& spec);

struct RateSummary {
  double mean_rate = 0.0;  // mean over observations of lambda
  double mean_sd = 0.0;    // mean over observations of sqrt(lambda (1 + alpha lambda))
};

/// Per-state averages over all observations, evaluated with each state's
/// parameters regardless of the state sequence. Poisson uses alpha = 0.
std::array<RateSummary, 2> rate_summary(const ParamState& theta, const PanelDataset& data,
                                        Kernel kernel);

/// Draws one count. NB with alpha = 0 falls back to Poisson.
std::int64_t sample_count(Kernel kernel, double lambda, double alpha, Rng& rng);

}  // namespace msnb
