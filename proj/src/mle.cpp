#include "msnb/mle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "likelihood_cache.hpp"
#include "msnb/error.hpp"
#include "msnb/kernels.hpp"

namespace msnb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Observations collapsed to (covariate row, count) groups with multiplicity.
struct Group {
  std::vector<double> x;
  std::int64_t count;
  double weight;
};

std::vector<Group> group_observations(const PanelDataset& data) {
  std::map<std::pair<std::vector<double>, std::int64_t>, double> tally;
  for (std::size_t i = 0; i < data.observations(); ++i) {
    const auto x = data.covariates(i);
    tally[{std::vector<double>(x.begin(), x.end()), data.count(i)}] += 1.0;
  }
  std::vector<Group> groups;
  groups.reserve(tally.size());
  for (auto& [key, w] : tally) groups.push_back({key.first, key.second, w});
  return groups;
}

double digamma_difference(std::int64_t a, double r) {
  if (a <= 256) {
    double acc = 0.0;
    for (std::int64_t j = 0; j < a; ++j) acc += 1.0 / (r + static_cast<double>(j));
    return acc;
  }
  return boost::math::digamma(static_cast<double>(a) + r) - boost::math::digamma(r);
}

// Full parameter vector: K coefficients then (NB) log alpha.
double grouped_loglik(const std::vector<Group>& groups, Kernel kernel, std::size_t K,
                      const std::vector<double>& params, std::vector<double>* grad) {
  const bool nb = kernel == Kernel::NegativeBinomial;
  if (grad) grad->assign(params.size(), 0.0);
  const double la = nb ? params[K] : 0.0;
  const double alpha = std::exp(la);
  const double r = 1.0 / alpha;
  double total = 0.0;
  for (const Group& g : groups) {
    double eta = 0.0;
    for (std::size_t k = 0; k < K; ++k) eta += params[k] * g.x[k];
    if (!(eta <= kMaxLogRate)) return -kInf;
    const double lambda = std::exp(eta);
    const double a = static_cast<double>(g.count);
    double deta = 0.0;
    if (nb) {
      const double q = la + eta;
      const double sp = detail::softplus(q);
      total += g.weight * (log_rising_factorial(g.count, r) - log_gamma(a + 1.0) + a * q - (a + r) * sp);
      if (grad) {
        deta = (a - lambda) / (1.0 + alpha * lambda);
        (*grad)[K] += g.weight * (r * (sp - digamma_difference(g.count, r)) + deta);
      }
    } else {
      total += g.weight * (a * eta - lambda - log_gamma(a + 1.0));
      deta = a - lambda;
    }
    if (grad) {
      for (std::size_t k = 0; k < K; ++k) (*grad)[k] += g.weight * deta * g.x[k];
    }
  }
  return std::isfinite(total) ? total : -kInf;
}

// Objective restricted to the free coordinates; maps to and from the full vector.
struct Objective {
  const std::vector<Group>* groups;
  Kernel kernel;
  std::size_t K;
  std::vector<std::size_t> free;  // indices into the full vector
  std::size_t full_dim;

  std::vector<double> expand(const Eigen::VectorXd& z) const {
    std::vector<double> full(full_dim, 0.0);
    for (std::size_t i = 0; i < free.size(); ++i) full[free[i]] = z[static_cast<Eigen::Index>(i)];
    return full;
  }

  // Negative log-likelihood and its gradient.
  double operator()(const Eigen::VectorXd& z, Eigen::VectorXd* grad) const {
    std::vector<double> g;
    const double ll = grouped_loglik(*groups, kernel, K, expand(z), grad ? &g : nullptr);
    if (grad) {
      grad->resize(static_cast<Eigen::Index>(free.size()));
      for (std::size_t i = 0; i < free.size(); ++i) (*grad)[static_cast<Eigen::Index>(i)] = -g[free[i]];
    }
    return -ll;
  }
};

Eigen::MatrixXd fd_hessian(const Objective& f, const Eigen::VectorXd& z) {
  const Eigen::Index d = z.size();
  Eigen::MatrixXd H(d, d);
  Eigen::VectorXd gp, gm;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double h = std::max(1e-4, 1e-4 * std::abs(z[j]));
    Eigen::VectorXd zp = z, zm = z;
    zp[j] += h;
    zm[j] -= h;
    f(zp, &gp);
    f(zm, &gm);
    H.col(j) = (gp - gm) / (2.0 * h);
  }
  return 0.5 * (H + H.transpose());
}

double scaled_gradient_norm(const Eigen::VectorXd& g, const Eigen::VectorXd& z) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) m = std::max(m, std::abs(g[i]) * std::max(1.0, std::abs(z[i])));
  return m;
}

}  // namespace

double MleResult::std_error(std::size_t i) const { return std::sqrt(variance(i)); }

std::pair<double, double> MleResult::confidence_interval(std::size_t i, double z) const {
  const double se = std_error(i);
  return {estimate(i) - z * se, estimate(i) + z * se};
}

double single_state_loglik(const PanelDataset& data, Kernel kernel, const std::vector<double>& params,
                           std::vector<double>* gradient) {
  const std::size_t K = data.covariate_count();
  const std::size_t want = K + (kernel == Kernel::NegativeBinomial ? 1 : 0);
  if (params.size() != want) throw UsageError("single_state_loglik: wrong parameter count");
  return grouped_loglik(group_observations(data), kernel, K, params, gradient);
}

MleResult fit_mle(const PanelDataset& data, const ModelSpec& spec, const MleOptions& options) {
  const std::size_t K = data.covariate_count();
  spec.validate(K);
  if (spec.switching) throw UsageError("maximum likelihood is only available for the single-state model");

  MleResult res;
  res.kernel = spec.kernel;
  res.names = data.covariate_names();
  const bool nb = spec.kernel == Kernel::NegativeBinomial;
  if (nb) res.names.push_back("alpha");
  const std::size_t full_dim = K + (nb ? 1 : 0);

  std::int64_t total_count = 0;
  for (auto c : data.counts()) total_count += c;
  if (total_count == 0) {
    res.beta_hat.assign(K, 0.0);
    res.beta_hat[0] = -kInf;
    res.alpha_hat = std::numeric_limits<double>::quiet_NaN();
    res.log_alpha_hat = res.alpha_hat;
    res.log_likelihood = 0.0;
    res.covariance.assign(full_dim * full_dim, std::numeric_limits<double>::quiet_NaN());
    res.boundary = true;
    res.converged = false;
    res.message = "boundary solution: every count is zero, the rate estimate tends to 0";
    return res;
  }

  const std::vector<Group> groups = group_observations(data);
  Objective f{&groups, spec.kernel, K, {}, full_dim};
  for (std::size_t k = 0; k < K; ++k) {
    if (spec.coef_mask[k] != CoefMask::FixedZeroBoth) f.free.push_back(k);
  }
  if (nb) f.free.push_back(K);
  const Eigen::Index d = static_cast<Eigen::Index>(f.free.size());
  const Eigen::Index n_beta = static_cast<Eigen::Index>(nb ? f.free.size() - 1 : f.free.size());

  // Start: least squares of log(A + 0.5) on the free columns, log alpha = 0.
  Eigen::MatrixXd X(static_cast<Eigen::Index>(data.observations()), n_beta);
  Eigen::VectorXd y(static_cast<Eigen::Index>(data.observations()));
  for (std::size_t i = 0; i < data.observations(); ++i) {
    const auto x = data.covariates(i);
    for (Eigen::Index j = 0; j < n_beta; ++j) X(static_cast<Eigen::Index>(i), j) = x[f.free[j]];
    y[static_cast<Eigen::Index>(i)] = std::log(static_cast<double>(data.count(i)) + 0.5);
  }
  Eigen::VectorXd z = Eigen::VectorXd::Zero(d);
  z.head(n_beta) = X.colPivHouseholderQr().solve(y);

  Eigen::VectorXd g, g_new;
  double fz = f(z, &g);
  if (!std::isfinite(fz)) throw NumericalError("log-likelihood is not finite at the starting point");
  Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(d, d);
  bool first = true;
  bool converged = false;
  std::size_t it = 0;
  for (; it < options.max_iterations; ++it) {
    Eigen::VectorXd dir = -Hinv * g;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      Hinv.setIdentity();
      dir = -g;
      slope = g.dot(dir);
    }
    double step = 1.0;
    Eigen::VectorXd z_new;
    double f_new = kInf;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      z_new = z + step * dir;
      f_new = f(z_new, &g_new);
      if (std::isfinite(f_new) && f_new <= fz + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const Eigen::VectorXd s = z_new - z;
    const Eigen::VectorXd yv = g_new - g;
    const double rel_change = std::abs(fz - f_new) / std::max(1.0, std::abs(fz));
    z = z_new;
    fz = f_new;
    g = g_new;
    const double sy = s.dot(yv);
    if (sy > 1e-12) {
      if (first) {
        Hinv *= sy / yv.dot(yv);
        first = false;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
      Hinv = (I - rho * s * yv.transpose()) * Hinv * (I - rho * yv * s.transpose()) + rho * s * s.transpose();
    }
    if (rel_change < options.relative_tolerance && scaled_gradient_norm(g, z) <= options.gradient_tolerance) {
      converged = true;
      ++it;
      break;
    }
  }

  // Newton polish with the finite-difference Hessian.
  for (int polish = 0; polish < 20 && scaled_gradient_norm(g, z) > options.gradient_tolerance; ++polish) {
    const Eigen::MatrixXd H = fd_hessian(f, z);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    if (ldlt.info() != Eigen::Success) break;
    const Eigen::VectorXd dir = -ldlt.solve(g);
    double step = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 40; ++bt) {
      const Eigen::VectorXd zt = z + step * dir;
      const double ft = f(zt, &g_new);
      if (std::isfinite(ft) && ft <= fz + 1e-12 * std::max(1.0, std::abs(fz))) {
        z = zt;
        fz = ft;
        g = g_new;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  res.gradient_norm = scaled_gradient_norm(g, z);
  converged = converged || res.gradient_norm <= options.gradient_tolerance;

  const Eigen::MatrixXd H = fd_hessian(f, z);
  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("singular or indefinite Hessian at the maximum-likelihood estimate");
  }
  const Eigen::MatrixXd cov_free = llt.solve(Eigen::MatrixXd::Identity(d, d));

  const std::vector<double> full = f.expand(z);
  res.beta_hat.assign(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(K));
  res.log_likelihood = -fz;
  res.iterations = it;
  res.covariance.assign(full_dim * full_dim, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> jac(d, 1.0);
  if (nb) {
    res.log_alpha_hat = full[K];
    res.alpha_hat = std::exp(full[K]);
    jac[static_cast<std::size_t>(d - 1)] = res.alpha_hat;
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      res.covariance[f.free[i] * full_dim + f.free[j]] =
          cov_free(i, j) * jac[static_cast<std::size_t>(i)] * jac[static_cast<std::size_t>(j)];
    }
  }
  res.converged = converged;
  if (nb && res.log_alpha_hat < -15.0) {
    res.boundary = true;
    res.message = "boundary solution: dispersion tends to 0 (Poisson limit)";
  } else {
    res.message = converged ? "converged" : "iteration cap reached; best iterate reported";
  }
  return res;
}

}  // namespace msnb
