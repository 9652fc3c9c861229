#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "msnb/data.hpp"

namespace msnb::detail {

// Evaluates the panel log-likelihood from per-state sufficient statistics.
//
// Observations are grouped by distinct covariate row and distinct count
// value. For a fixed state assignment the NB log-likelihood of state s is
//
//   sum_u [ S_u (log a + eta_u) - (n_u / a + S_u) log(1 + a exp(eta_u)) ]
//   + sum_levels h_l (lgamma(c_l + 1/a) - lgamma(1/a)) - sum log(c!)
//
// where n_u, S_u are the number of observations and total count on row u
// and h_l the number of observations with count value c_l. Each chain owns
// its cache; the scratch buffers make it non-reentrant.
class LikelihoodCache {
 public:
  LikelihoodCache(const PanelDataset& data, Kernel kernel);

  // Updates the per-state statistics, moving only periods whose state
  // changed since the last call; an empty span puts every period in state 0.
  void assign_states(std::span<const std::uint8_t> s);

  // Log-likelihood of the observations currently assigned to `state`.
  // Returns -inf when a rate overflows.
  double state_loglik(int state, std::span<const double> beta, double log_alpha) const;

  // out[t] = log-likelihood of period t if it were in a state with these parameters.
  void period_logliks(std::span<const double> beta, double log_alpha, std::span<double> out) const;

  std::size_t unique_rows() const { return n_rows_; }
  std::size_t periods() const { return data_->periods(); }

 private:
  struct StateStats {
    std::vector<double> n_obs;       // per row
    std::vector<double> sum_counts;  // per row
    std::vector<double> level_hist;  // per count level
    std::vector<std::uint32_t> active_rows;
    std::vector<std::uint32_t> active_levels;
    double sum_log_fact = 0.0;
  };

  // Fills eta_ for every row; false if any rate overflows.
  bool compute_eta(std::span<const double> beta) const;
  // Same, restricted to the listed rows.
  bool compute_eta(std::span<const double> beta, std::span<const std::uint32_t> rows) const;
  void move_period(std::size_t t, int from, int to);
  void fill_rising(double r) const;

  const PanelDataset* data_;
  Kernel kernel_;
  std::size_t K_;
  std::size_t n_rows_ = 0;
  std::vector<double> rows_;  // n_rows_ x K_
  std::vector<std::uint32_t> row_of_obs_;
  std::vector<std::uint32_t> level_of_obs_;
  std::vector<double> count_of_obs_;
  std::vector<std::int64_t> levels_;
  std::vector<double> log_fact_;  // per level
  std::array<StateStats, 2> stats_;
  std::vector<std::uint8_t> assigned_;  // per period

  mutable std::vector<double> eta_;
  mutable std::vector<double> row_a_;
  mutable std::vector<double> row_b_;
  mutable std::vector<double> rising_;
  mutable std::vector<double> level_const_;
};

// log(1 + exp(x)) without overflow.
double softplus(double x);

}  // namespace msnb::detail
