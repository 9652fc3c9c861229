#include "likelihood_cache.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>

#include "msnb/kernels.hpp"

namespace msnb::detail {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::int64_t kExactGap = 256;
}  // namespace

double softplus(double x) {
  if (x > 35.0) return x + std::exp(-x);
  if (x < -35.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

LikelihoodCache::LikelihoodCache(const PanelDataset& data, Kernel kernel)
    : data_(&data), kernel_(kernel), K_(data.covariate_count()) {
  const std::size_t n = data.observations();
  row_of_obs_.resize(n);
  level_of_obs_.resize(n);
  count_of_obs_.resize(n);

  std::unordered_map<std::string, std::uint32_t> row_index;
  std::string key(K_ * sizeof(double), '\0');
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = data.covariates(i);
    std::memcpy(key.data(), x.data(), key.size());
    auto [it, inserted] = row_index.try_emplace(key, static_cast<std::uint32_t>(n_rows_));
    if (inserted) {
      rows_.insert(rows_.end(), x.begin(), x.end());
      ++n_rows_;
    }
    row_of_obs_[i] = it->second;
  }

  levels_.assign(data.counts().begin(), data.counts().end());
  std::sort(levels_.begin(), levels_.end());
  levels_.erase(std::unique(levels_.begin(), levels_.end()), levels_.end());
  std::map<std::int64_t, std::uint32_t> level_index;
  for (std::size_t l = 0; l < levels_.size(); ++l) level_index[levels_[l]] = static_cast<std::uint32_t>(l);
  for (std::size_t i = 0; i < n; ++i) {
    level_of_obs_[i] = level_index[data.count(i)];
    count_of_obs_[i] = static_cast<double>(data.count(i));
  }
  log_fact_.resize(levels_.size());
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    log_fact_[l] = log_gamma(static_cast<double>(levels_[l]) + 1.0);
  }

  for (auto& st : stats_) {
    st.n_obs.assign(n_rows_, 0.0);
    st.sum_counts.assign(n_rows_, 0.0);
    st.level_hist.assign(levels_.size(), 0.0);
  }
  eta_.resize(n_rows_);
  row_a_.resize(n_rows_);
  row_b_.resize(n_rows_);
  rising_.resize(levels_.size());
  level_const_.resize(levels_.size());
  assign_states({});
}

void LikelihoodCache::move_period(std::size_t t, int from, int to) {
  StateStats& src = stats_[from];
  StateStats& dst = stats_[to];
  for (std::size_t i = data_->period_begin(t); i < data_->period_end(t); ++i) {
    const std::uint32_t u = row_of_obs_[i];
    const std::uint32_t l = level_of_obs_[i];
    src.n_obs[u] -= 1.0;
    src.sum_counts[u] -= count_of_obs_[i];
    src.level_hist[l] -= 1.0;
    dst.n_obs[u] += 1.0;
    dst.sum_counts[u] += count_of_obs_[i];
    dst.level_hist[l] += 1.0;
  }
}

void LikelihoodCache::assign_states(std::span<const std::uint8_t> s) {
  const std::size_t T = data_->periods();
  if (assigned_.size() != T) {
    // Everything starts in state 0; counts are integers, so the moves are exact.
    assigned_.assign(T, 0);
    for (auto& st : stats_) {
      std::fill(st.n_obs.begin(), st.n_obs.end(), 0.0);
      std::fill(st.sum_counts.begin(), st.sum_counts.end(), 0.0);
      std::fill(st.level_hist.begin(), st.level_hist.end(), 0.0);
    }
    for (std::size_t i = 0; i < data_->observations(); ++i) {
      stats_[0].n_obs[row_of_obs_[i]] += 1.0;
      stats_[0].sum_counts[row_of_obs_[i]] += count_of_obs_[i];
      stats_[0].level_hist[level_of_obs_[i]] += 1.0;
    }
  }
  for (std::size_t t = 0; t < T; ++t) {
    const std::uint8_t want = s.empty() ? 0 : s[t];
    if (want == assigned_[t]) continue;
    move_period(t, assigned_[t], want);
    assigned_[t] = want;
  }
  for (auto& st : stats_) {
    st.active_rows.clear();
    st.active_levels.clear();
    st.sum_log_fact = 0.0;
    for (std::size_t u = 0; u < n_rows_; ++u) {
      if (st.n_obs[u] != 0.0) st.active_rows.push_back(static_cast<std::uint32_t>(u));
    }
    for (std::size_t l = 0; l < levels_.size(); ++l) {
      if (st.level_hist[l] == 0.0) continue;
      st.active_levels.push_back(static_cast<std::uint32_t>(l));
      st.sum_log_fact += st.level_hist[l] * log_fact_[l];
    }
  }
}

bool LikelihoodCache::compute_eta(std::span<const double> beta) const {
  bool ok = true;
  for (std::size_t u = 0; u < n_rows_; ++u) {
    const double* x = rows_.data() + u * K_;
    double eta = 0.0;
    for (std::size_t k = 0; k < K_; ++k) eta += beta[k] * x[k];
    eta_[u] = eta;
    if (!(eta <= kMaxLogRate)) ok = false;
  }
  return ok;
}

bool LikelihoodCache::compute_eta(std::span<const double> beta, std::span<const std::uint32_t> rows) const {
  bool ok = true;
  for (std::uint32_t u : rows) {
    const double* x = rows_.data() + std::size_t{u} * K_;
    double eta = 0.0;
    for (std::size_t k = 0; k < K_; ++k) eta += beta[k] * x[k];
    eta_[u] = eta;
    if (!(eta <= kMaxLogRate)) ok = false;
  }
  return ok;
}

void LikelihoodCache::fill_rising(double r) const {
  std::int64_t prev = 0;
  double acc = 0.0;
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    const std::int64_t a = levels_[l];
    if (a - prev <= kExactGap) {
      for (std::int64_t j = prev; j < a; ++j) acc += std::log(r + static_cast<double>(j));
    } else {
      acc = log_rising_factorial(a, r);
    }
    prev = a;
    rising_[l] = acc;
  }
}

double LikelihoodCache::state_loglik(int state, std::span<const double> beta, double log_alpha) const {
  const StateStats& st = stats_[state];
  if (!compute_eta(beta, st.active_rows)) return kNegInf;
  double total = -st.sum_log_fact;
  if (kernel_ == Kernel::Poisson) {
    for (std::uint32_t u : st.active_rows) total += st.sum_counts[u] * eta_[u] - st.n_obs[u] * std::exp(eta_[u]);
    return std::isnan(total) ? kNegInf : total;
  }
  const double r = std::exp(-log_alpha);
  for (std::uint32_t u : st.active_rows) {
    const double q = log_alpha + eta_[u];
    const double S = st.sum_counts[u];
    total += S * q - (r * st.n_obs[u] + S) * softplus(q);
  }
  fill_rising(r);
  for (std::uint32_t l : st.active_levels) total += st.level_hist[l] * rising_[l];
  return std::isnan(total) ? kNegInf : total;
}

void LikelihoodCache::period_logliks(std::span<const double> beta, double log_alpha,
                                     std::span<double> out) const {
  const bool overflow = !compute_eta(beta);
  const std::size_t T = data_->periods();
  if (kernel_ == Kernel::Poisson) {
    for (std::size_t u = 0; u < n_rows_; ++u) {
      row_a_[u] = eta_[u];
      row_b_[u] = eta_[u] <= kMaxLogRate ? std::exp(eta_[u]) : std::numeric_limits<double>::infinity();
    }
    for (std::size_t l = 0; l < levels_.size(); ++l) level_const_[l] = -log_fact_[l];
  } else {
    const double r = std::exp(-log_alpha);
    for (std::size_t u = 0; u < n_rows_; ++u) {
      const double q = log_alpha + eta_[u];
      const double w = softplus(q);
      row_a_[u] = q - w;  // log(a lambda / (1 + a lambda))
      row_b_[u] = r * w;  // (1/a) log(1 + a lambda)
    }
    fill_rising(r);
    for (std::size_t l = 0; l < levels_.size(); ++l) level_const_[l] = rising_[l] - log_fact_[l];
  }
  for (std::size_t t = 0; t < T; ++t) {
    double acc = 0.0;
    const std::size_t end = data_->period_end(t);
    for (std::size_t i = data_->period_begin(t); i < end; ++i) {
      const std::uint32_t u = row_of_obs_[i];
      acc += level_const_[level_of_obs_[i]] + count_of_obs_[i] * row_a_[u] - row_b_[u];
    }
    out[t] = acc;
  }
  if (overflow) {
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t i = data_->period_begin(t); i < data_->period_end(t); ++i) {
        if (!(eta_[row_of_obs_[i]] <= kMaxLogRate)) {
          out[t] = kNegInf;
          break;
        }
      }
    }
  }
  for (std::size_t t = 0; t < T; ++t) {
    if (std::isnan(out[t])) out[t] = kNegInf;
  }
}

}  // namespace msnb::detail
