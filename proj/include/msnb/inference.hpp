#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "msnb/data.hpp"
#include "msnb/kernels.hpp"
#include "msnb/random.hpp"
#include "msnb/sampler.hpp"

namespace msnb {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Quantile p of an ascending sample by linear interpolation between order
/// statistics at position (n - 1) p.
double sorted_quantile(std::span<const double> sorted, double p);

/// Equal-tail interval with (1 - level) / 2 in each tail. Requires at least
/// two draws and level in (0, 1).
Interval credible_interval(std::span<const double> draws, double level);

struct StateProbSeries {
  std::vector<double> prob;  // P(s_t = 1 | Y)
  std::vector<double> sd;    // sqrt(p (1 - p))
};

StateProbSeries state_probabilities(const PosteriorSample& sample);

/// Harmonic-mean estimate log N - logsumexp(-LL_i).
double log_marginal_likelihood(std::span<const double> loglik);

/// Bootstrap interval of the harmonic-mean estimate: n_boot replicates of
/// round(frac * N) draws resampled with replacement; returns the 2.5% and
/// 97.5% quantiles.
Interval bootstrap_lml_ci(std::span<const double> loglik, std::size_t n_boot = 100000, double frac = 0.01,
                          std::uint64_t seed = 0);

/// log Bayes factor of model b over model a.
double bayes_factor(double lml_a, double lml_b);

struct InformationCriteria {
  double aic = 0.0;
  double bic = 0.0;
};

/// AIC = 2K - 2LL, BIC = K ln(N) - 2LL.
InformationCriteria information_criteria(double max_ll, std::size_t k, std::size_t n);

/// Gelman-Rubin potential scale reduction,
/// sqrt(((n-1)/n W + (1 + 1/m) B/n) / W). Needs at least two chains of equal
/// length >= 10. +inf when W = 0 < B; sqrt((n-1)/n) when every draw is equal.
double psrf(const std::vector<std::vector<double>>& chains);

/// Brooks-Gelman multivariate reduction factor, reported as the square root
/// of (n-1)/n + (m+1)/m lambda_max(W^-1 B/n) so that d = 1 reproduces psrf.
/// Each chain is row-major with `dim` values per draw. Throws NumericalError
/// for a singular within-chain covariance.
double mpsrf(const std::vector<std::vector<double>>& chains, std::size_t dim);

/// Posterior-predictive p-value of the Pearson discrepancy
/// sum (A - lambda)^2 / (lambda (1 + alpha lambda)) over up to max_draws
/// evenly spaced retained draws. Requires at least 100 draws.
double gof_pvalue(const PosteriorSample& sample, const PanelDataset& data, Rng& rng, std::size_t max_draws = 500);

/// Weighted Pearson correlation. Throws DataError on zero weighted variance.
double weighted_correlation(std::span<const double> a, std::span<const double> b, std::span<const double> w);

/// w_t = min(1/sd_t, median_t(1/sd_t)), with 1/0 taken as the cap. Equal
/// weights when the median itself is infinite.
std::vector<double> state_weights(std::span<const double> sd);

struct DifferenceTest {
  double mean = 0.0;
  Interval ci;
  bool significant = false;  // ci excludes 0
};

/// Interval of the per-draw difference b - a.
DifferenceTest difference_significance(std::span<const double> a, std::span<const double> b, double level = 0.95);

struct StateExistence {
  bool applicable = false;
  bool indistinguishable = false;  // every free coefficient difference covers 0
  bool occupancy_collapse = false;
  double mean_occupancy = 0.0;     // posterior mean of sum(s_t) / T
  std::vector<std::string> differences_covering_zero;
  bool degenerate() const { return applicable && (indistinguishable || occupancy_collapse); }
};

StateExistence state_existence(const PosteriorSample& sample, double level = 0.95, double min_occupancy = 0.01);

struct ParamSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  std::vector<Interval> intervals;  // one per SummaryOptions::levels entry
};

struct SummaryOptions {
  std::vector<double> levels{0.95, 0.85, 0.60};
  std::size_t n_boot = 100000;
  double boot_frac = 0.01;
  std::uint64_t seed = 0;
  std::size_t gof_draws = 500;
  bool compute_gof = true;
  double lml_warn_halfwidth = 5.0;
};

struct SummaryReport {
  std::string model;
  std::vector<double> levels;
  /// Reporting scale: coefficients, alpha, p01, p10, stationary
  /// probabilities and per-coefficient state differences.
  std::vector<ParamSummary> parameters;
  std::array<RateSummary, 2> rates{};
  ParamSummary loglik;
  double max_loglik = 0.0;
  double lml = 0.0;
  Interval lml_ci;
  std::size_t n_free = 0;
  std::size_t n_obs = 0;
  InformationCriteria ic;
  std::vector<std::string> psrf_names;
  std::vector<double> psrf;
  double max_psrf = 0.0;
  double mpsrf = 0.0;
  double gof_p = 0.0;
  StateExistence existence;
  std::optional<DifferenceTest> intercept_gap;
  std::size_t chains = 0;
  std::size_t draws = 0;
  std::vector<std::string> warnings;

  const ParamSummary* find(const std::string& name) const;
};

ParamSummary summarize_draws(const std::string& name, std::span<const double> draws,
                             const std::vector<double>& levels);

SummaryReport summarize(const PosteriorSample& sample, const PanelDataset& data, const std::string& model,
                        const SummaryOptions& options = {});

}  // namespace msnb
