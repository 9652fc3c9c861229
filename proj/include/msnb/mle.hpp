#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "msnb/data.hpp"

namespace msnb {

/// Maximum-likelihood fit of the single-state model.
///
/// Parameters are ordered (beta_0..beta_{K-1}, alpha); alpha is absent for the
/// Poisson kernel. `covariance` is row-major over that ordering, with the
/// alpha entries obtained from the log-alpha block by the delta method.
struct MleResult {
  Kernel kernel = Kernel::NegativeBinomial;
  std::vector<std::string> names;
  std::vector<double> beta_hat;
  double alpha_hat = 0.0;
  double log_alpha_hat = 0.0;
  double log_likelihood = 0.0;
  std::vector<double> covariance;
  bool converged = false;
  /// Estimate sits on the boundary of the parameter space (rate -> 0 for
  /// all-zero data, alpha -> 0 for under-dispersed data).
  bool boundary = false;
  std::size_t iterations = 0;
  double gradient_norm = 0.0;
  std::string message;

  std::size_t dimension() const { return beta_hat.size() + (kernel == Kernel::NegativeBinomial ? 1 : 0); }
  double estimate(std::size_t i) const { return i < beta_hat.size() ? beta_hat[i] : alpha_hat; }
  double variance(std::size_t i) const { return covariance[i * dimension() + i]; }
  double std_error(std::size_t i) const;
  /// Symmetric normal-theory interval, estimate +/- z * std_error.
  std::pair<double, double> confidence_interval(std::size_t i, double z = 1.96) const;
};

struct MleOptions {
  std::size_t max_iterations = 10000;
  double relative_tolerance = 1e-9;
  double gradient_tolerance = 1e-4;
};

/// Quasi-Newton (BFGS) ascent with backtracking over (beta, log alpha),
/// started from a least-squares fit of log(A + 0.5) on X. Requires a
/// single-state spec. Throws NumericalError on a singular Hessian.
MleResult fit_mle(const PanelDataset& data, const ModelSpec& spec, const MleOptions& options = {});

/// Log-likelihood and analytic gradient of the single-state model at
/// (beta, log alpha). Exposed for gradient checks.
double single_state_loglik(const PanelDataset& data, Kernel kernel, const std::vector<double>& params,
                           std::vector<double>* gradient);

}  // namespace msnb
