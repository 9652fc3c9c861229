#include "msnb/sampler.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <exception>
#include <limits>
#include <span>
#include <string>
#include <thread>

#include "likelihood_cache.hpp"
#include "msnb/error.hpp"
#include "msnb/kernels.hpp"
#include "msnb/markov.hpp"

namespace msnb {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxBlock = 20;
constexpr double kDefaultJump = 0.1;

double coordinate_value(const Coordinate& c, const ParamState& theta) {
  return c.kind == Coordinate::Kind::Beta ? theta.beta(c.state)[c.index] : theta.log_alpha(c.state);
}

void set_coordinate(const Coordinate& c, ParamState& theta, double v) {
  if (c.kind == Coordinate::Kind::Beta) {
    theta.beta(c.state)[c.index] = v;
    if (c.shared) theta.beta(1 - c.state)[c.index] = v;
  } else {
    theta.log_alpha(c.state) = v;
    if (c.shared) theta.log_alpha(1 - c.state) = v;
  }
}

// Scratch for the block enumeration.
struct BlockScratch {
  std::vector<double> w;
  std::vector<double> chunk;
  std::vector<double> le0, le1;
};

constexpr std::size_t kChunk = 64;

// Sums w[0, n) into per-chunk totals; returns the grand total.
double chunk_sums(const std::vector<double>& w, std::size_t n, std::vector<double>& chunk) {
  const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
  chunk.resize(n_chunks);
  double total = 0.0;
  for (std::size_t c = 0; c < n_chunks; ++c) {
    const std::size_t b = c * kChunk;
    const std::size_t e = std::min(n, b + kChunk);
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t x = b;
    for (; x + 4 <= e; x += 4) {
      acc[0] += w[x];
      acc[1] += w[x + 1];
      acc[2] += w[x + 2];
      acc[3] += w[x + 3];
    }
    for (; x < e; ++x) acc[0] += w[x];
    chunk[c] = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    total += chunk[c];
  }
  return total;
}

// Draws index x with probability w[x] / total, locating the chunk first.
std::size_t sample_index(const std::vector<double>& w, std::size_t n, const std::vector<double>& chunk, double total,
                         Rng& rng) {
  double target = uniform01(rng) * total;
  std::size_t c = 0;
  std::size_t last_chunk = 0;
  for (; c < chunk.size(); ++c) {
    if (chunk[c] > 0.0) last_chunk = c;
    if (target < chunk[c]) break;
    target -= chunk[c];
  }
  if (c == chunk.size()) {  // rounding at the top end
    c = last_chunk;
    target = chunk[c];
  }
  const std::size_t begin = c * kChunk;
  const std::size_t end = std::min(n, begin + kChunk);
  std::size_t last = begin;
  for (std::size_t x = begin; x < end; ++x) {
    if (w[x] > 0.0) last = x;
    if (target < w[x]) return x;
    target -= w[x];
  }
  return last;
}

// Draws s[b, e) from its full conditional given the neighbouring fixed states
// by enumerating all 2^(e-b) assignments; bit j of the index is s[b + j].
void sample_block(std::span<std::uint8_t> s, std::size_t b, std::size_t e, std::span<const double> L0,
                  std::span<const double> L1, TransitionProbs tp, Rng& rng, BlockScratch& sc) {
  const std::size_t m = e - b;
  const std::size_t n_total = std::size_t{1} << m;
  const std::size_t T = s.size();
  const double P[2][2] = {{1.0 - tp.p01, tp.p01}, {tp.p10, 1.0 - tp.p10}};
  sc.w.resize(n_total);
  sc.le0.resize(m);
  sc.le1.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double l0 = L0[b + j];
    const double l1 = L1[b + j];
    const double mx = std::max(l0, l1);
    if (mx == kNegInf || std::isnan(mx)) throw NumericalError("period log-likelihood is -inf in both states");
    sc.le0[j] = l0 - mx;
    sc.le1[j] = l1 - mx;
  }
  // The transition into the following fixed state depends only on the last bit.
  if (e < T) {
    sc.le0[m - 1] += std::log(P[0][s[e]]);
    sc.le1[m - 1] += std::log(P[1][s[e]]);
  }

  auto fill = [&](bool logspace) {
    auto factor = [&](double p, double le) { return logspace ? std::log(p) + le : p * std::exp(le); };
    double* w = sc.w.data();
    w[0] = factor(b > 0 ? P[s[b - 1]][0] : 1.0, sc.le0[0]);
    w[1] = factor(b > 0 ? P[s[b - 1]][1] : 1.0, sc.le1[0]);
    for (std::size_t j = 1; j < m; ++j) {
      const std::size_t n = std::size_t{1} << j;
      const std::size_t half = n >> 1;
      // Bit j-1 is 0 on [0, half) and 1 on [half, n).
      for (int p = 0; p < 2; ++p) {
        const std::size_t lo = static_cast<std::size_t>(p) * half;
        const double k0 = factor(P[p][0], sc.le0[j]);
        const double k1 = factor(P[p][1], sc.le1[j]);
        if (logspace) {
          for (std::size_t x = lo; x < lo + half; ++x) {
            w[x + n] = w[x] + k1;
            w[x] += k0;
          }
        } else {
          for (std::size_t x = lo; x < lo + half; ++x) {
            w[x + n] = w[x] * k1;
            w[x] *= k0;
          }
        }
      }
    }
  };

  fill(false);
  double total = chunk_sums(sc.w, n_total, sc.chunk);
  if (!(total > 0.0) || !std::isfinite(total)) {
    fill(true);
    double mx = kNegInf;
    for (std::size_t x = 0; x < n_total; ++x) mx = std::max(mx, sc.w[x]);
    if (mx == kNegInf || std::isnan(mx)) throw NumericalError("state block has no admissible assignment");
    for (std::size_t x = 0; x < n_total; ++x) sc.w[x] = std::exp(sc.w[x] - mx);
    total = chunk_sums(sc.w, n_total, sc.chunk);
  }
  const std::size_t pick = sample_index(sc.w, n_total, sc.chunk, total, rng);
  for (std::size_t j = 0; j < m; ++j) s[b + j] = static_cast<std::uint8_t>((pick >> j) & 1u);
}

void sample_states(std::span<std::uint8_t> s, std::span<const double> L0, std::span<const double> L1,
                   TransitionProbs tp, std::size_t tau, std::size_t offset, Rng& rng, BlockScratch& sc) {
  const std::size_t T = s.size();
  if (T == 0) return;
  if (T <= tau) {
    sample_block(s, 0, T, L0, L1, tp, rng, sc);
    return;
  }
  const std::size_t o = offset % tau;
  std::size_t b = 0;
  if (o > 0) {
    sample_block(s, 0, o, L0, L1, tp, rng, sc);
    b = o;
  }
  for (; b < T; b += tau) sample_block(s, b, std::min(T, b + tau), L0, L1, tp, rng, sc);
}

// Chain state with cached per-state log-likelihoods.
class Engine {
 public:
  Engine(const PanelDataset& data, const ModelSpec& spec, const PriorSpec& prior, ParamState theta)
      : prior_(prior), cache_(data, spec.kernel), theta_(std::move(theta)) {
    L0_.resize(data.periods());
    L1_.resize(data.periods());
    refresh();
  }

  ParamState& theta() { return theta_; }
  double loglik() const { return ll_[0] + ll_[1]; }

  void refresh() {
    cache_.assign_states(theta_.s);
    occupied_ = {false, false};
    for (std::uint8_t v : theta_.s) occupied_[v] = true;
    for (int st = 0; st < 2; ++st) ll_[st] = state_ll(st, theta_.beta(st), theta_.log_alpha(st));
  }

  bool mh(const Coordinate& c, double sd, Rng& rng) {
    const double cur = coordinate_value(c, theta_);
    const double prop = cur + sd * standard_normal(rng);
    double log_ratio = 0.0;
    if (c.kind == Coordinate::Kind::Beta) {
      log_ratio += log_prior_beta(c.index, prop, prior_) - log_prior_beta(c.index, cur, prior_);
    } else {
      log_ratio += log_prior_alpha(prop, prior_) - log_prior_alpha(cur, prior_) + (prop - cur);
    }
    std::array<double, 2> new_ll = ll_;
    for (int st = 0; st < 2; ++st) {
      if (st != c.state && !c.shared) continue;
      if (c.kind == Coordinate::Kind::Beta) {
        scratch_beta_ = theta_.beta(st);
        scratch_beta_[c.index] = prop;
        new_ll[st] = state_ll(st, scratch_beta_, theta_.log_alpha(st));
      } else {
        new_ll[st] = state_ll(st, theta_.beta(st), prop);
      }
      log_ratio += new_ll[st] - ll_[st];
    }
    if (std::isnan(log_ratio) || !(std::log(uniform01(rng)) < log_ratio)) return false;
    set_coordinate(c, theta_, prop);
    ll_ = new_ll;
    return true;
  }

  // Swaps the state labels when state 1 holds more than half of the periods,
  // which contradicts p01 <= p10. Only valid for label-symmetric masks.
  bool relabel_if_inverted() {
    std::size_t ones = 0;
    for (std::uint8_t v : theta_.s) ones += v;
    if (2 * ones <= theta_.s.size()) return false;
    std::swap(theta_.beta0, theta_.beta1);
    std::swap(theta_.log_alpha0, theta_.log_alpha1);
    for (std::uint8_t& v : theta_.s) v = static_cast<std::uint8_t>(1 - v);
    theta_.tp = {std::min(theta_.tp.p01, theta_.tp.p10), std::max(theta_.tp.p01, theta_.tp.p10)};
    refresh();
    return true;
  }

  void update_states(std::size_t tau, std::size_t offset, Rng& rng) {
    cache_.period_logliks(theta_.beta0, theta_.log_alpha0, L0_);
    cache_.period_logliks(theta_.beta1, theta_.log_alpha1, L1_);
    sample_states(theta_.s, L0_, L1_, theta_.tp, tau, offset, rng, scratch_);
    cache_.assign_states(theta_.s);
    occupied_ = {false, false};
    ll_ = {0.0, 0.0};
    for (std::size_t t = 0; t < theta_.s.size(); ++t) {
      const int st = theta_.s[t];
      occupied_[st] = true;
      ll_[st] += st == 0 ? L0_[t] : L1_[t];
    }
  }

 private:
  double state_ll(int st, std::span<const double> beta, double log_alpha) const {
    if (!occupied_[st]) return 0.0;
    return cache_.state_loglik(st, beta, log_alpha);
  }

  const PriorSpec& prior_;
  detail::LikelihoodCache cache_;
  ParamState theta_;
  std::array<double, 2> ll_{0.0, 0.0};
  std::array<bool, 2> occupied_{false, false};
  std::vector<double> L0_, L1_;
  std::vector<double> scratch_beta_;
  BlockScratch scratch_;
};

std::vector<double> initial_sds(const std::vector<Coordinate>& coords, const JumpScales& jump) {
  std::vector<double> sds(coords.size(), kDefaultJump);
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const Coordinate& c = coords[i];
    double v = kDefaultJump;
    if (c.kind == Coordinate::Kind::Beta) {
      if (c.index < jump.beta.size()) v = jump.beta[c.index];
    } else {
      v = jump.log_alpha;
    }
    if (std::isfinite(v) && v > 0.0) sds[i] = v;
  }
  return sds;
}

bool label_symmetric(const ModelSpec& spec) {
  return std::none_of(spec.coef_mask.begin(), spec.coef_mask.end(), [](CoefMask m) {
    return m == CoefMask::FixedZeroState0 || m == CoefMask::FixedZeroState1;
  });
}

void check_tau(std::size_t tau) {
  if (tau < 1 || tau > kMaxBlock) {
    throw UsageError("block length must be in 1.." + std::to_string(kMaxBlock) + ", got " + std::to_string(tau));
  }
}

}  // namespace

std::vector<Coordinate> sweep_coordinates(const ModelSpec& spec, const std::vector<std::string>& names) {
  std::vector<Coordinate> coords;
  const std::size_t K = spec.coef_mask.size();
  if (names.size() != K) throw UsageError("covariate names do not match the coefficient mask");
  const bool sw = spec.switching;
  for (std::size_t k = 0; k < K; ++k) {
    const CoefMask m = spec.coef_mask[k];
    if (m == CoefMask::SharedAcrossStates) {
      coords.push_back({Coordinate::Kind::Beta, 0, k, true, "beta." + names[k]});
    } else if (m == CoefMask::FreePerState || m == CoefMask::FixedZeroState1) {
      coords.push_back({Coordinate::Kind::Beta, 0, k, false, (sw ? "beta0." : "beta.") + names[k]});
    }
  }
  if (spec.has_dispersion()) {
    const bool shared = spec.dispersion_shared();
    coords.push_back({Coordinate::Kind::LogAlpha, 0, 0, shared, shared ? "log_alpha" : "log_alpha0"});
  }
  for (std::size_t k = 0; k < K; ++k) {
    const CoefMask m = spec.coef_mask[k];
    if (m == CoefMask::FreePerState || m == CoefMask::FixedZeroState0) {
      coords.push_back({Coordinate::Kind::Beta, 1, k, false, "beta1." + names[k]});
    }
  }
  if (spec.has_dispersion() && !spec.dispersion_shared()) {
    coords.push_back({Coordinate::Kind::LogAlpha, 1, 0, false, "log_alpha1"});
  }
  return coords;
}

JumpScales jump_scales_from_mle(const MleResult& mle) {
  JumpScales j;
  j.beta.resize(mle.beta_hat.size());
  for (std::size_t k = 0; k < mle.beta_hat.size(); ++k) j.beta[k] = mle.std_error(k);
  if (mle.kernel == Kernel::NegativeBinomial) j.log_alpha = mle.std_error(mle.beta_hat.size()) / mle.alpha_hat;
  return j;
}

void ChainConfig::validate() const {
  if (n_chains < 1) throw UsageError("at least one chain is required");
  if (thin < 1) throw UsageError("thinning interval must be at least 1");
  if (burn_in >= total_iters) throw UsageError("burn-in must be smaller than the total number of sweeps");
  if ((total_iters - burn_in) / thin == 0) throw UsageError("no draws would be retained");
  check_tau(block_len);
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0)) throw UsageError("target acceptance must be in (0,1)");
  if (adapt_window < 1) throw UsageError("adaptation window must be at least 1");
  if (!chain_streams.empty() && chain_streams.size() != n_chains) {
    throw UsageError("chain stream overrides must have one entry per chain");
  }
  if (!initial_points.empty() && initial_points.size() != n_chains) {
    throw UsageError("initial point overrides must have one entry per chain");
  }
}

AdaptationLedger::AdaptationLedger(std::size_t n) : win_acc_(n, 0), win_prop_(n, 0) {}

void AdaptationLedger::record(std::size_t coord, bool accepted) {
  ++win_prop_[coord];
  if (accepted) ++win_acc_[coord];
}

double AdaptationLedger::window_rate(std::size_t coord) const {
  return win_prop_[coord] == 0 ? 0.0 : static_cast<double>(win_acc_[coord]) / static_cast<double>(win_prop_[coord]);
}

void AdaptationLedger::reset_window() {
  std::fill(win_acc_.begin(), win_acc_.end(), 0);
  std::fill(win_prop_.begin(), win_prop_.end(), 0);
}

void AdaptationLedger::freeze() { frozen_ = true; }

std::vector<double> adapt_jump_sds(const AdaptationLedger& ledger, const std::vector<double>& sds, double target) {
  if (ledger.frozen()) throw UsageError("jump sds are frozen after burn-in");
  if (sds.size() != ledger.size()) throw UsageError("jump sd count does not match the ledger");
  std::vector<double> out = sds;
  for (std::size_t i = 0; i < sds.size(); ++i) {
    if (ledger.window_proposed(i) == 0) continue;
    out[i] = sds[i] * std::exp(ledger.window_rate(i) - target);
  }
  return out;
}

bool metropolis_step(double& x, double& log_target_x, const std::function<double(double)>& log_target,
                     double jump_sd, Rng& rng) {
  const double prop = x + jump_sd * standard_normal(rng);
  const double lp = log_target(prop);
  const double log_ratio = lp - log_target_x;
  if (std::isnan(log_ratio) || !(std::log(uniform01(rng)) < log_ratio)) return false;
  x = prop;
  log_target_x = lp;
  return true;
}

bool mh_update_scalar(const Coordinate& coord, ParamState& theta, const PanelDataset& data,
                      const PriorSpec& prior, const ModelSpec& spec, double jump_sd, Rng& rng) {
  Engine eng(data, spec, prior, theta);
  const bool acc = eng.mh(coord, jump_sd, rng);
  theta = eng.theta();
  return acc;
}

double truncated_beta(double a, double b, double lo, double hi, Rng& rng) {
  if (!(a > 0.0) || !(b > 0.0)) throw UsageError("truncated_beta: shape parameters must be positive");
  if (!(lo <= hi)) throw UsageError("truncated_beta: empty interval");
  lo = std::clamp(lo, 0.0, 1.0);
  hi = std::clamp(hi, 0.0, 1.0);
  if (!(lo < hi)) return lo;
  namespace bm = boost::math;
  const double u = uniform01(rng);
  double x;
  const double f_hi = bm::ibeta(a, b, hi);
  if (f_hi <= 0.5) {
    const double f_lo = bm::ibeta(a, b, lo);
    const double mass = f_hi - f_lo;
    if (!(mass > 0.0)) return (a - 1.0) / std::max(a + b - 2.0, 1e-300) >= hi ? hi : lo;
    x = bm::ibeta_inv(a, b, f_lo + u * mass);
  } else {
    const double q_lo = bm::ibetac(a, b, lo);
    const double q_hi = bm::ibetac(a, b, hi);
    const double mass = q_lo - q_hi;
    if (!(mass > 0.0)) return (a - 1.0) / std::max(a + b - 2.0, 1e-300) <= lo ? lo : hi;
    x = bm::ibetac_inv(a, b, q_hi + u * mass);
  }
  return std::clamp(x, lo, hi);
}

void gibbs_update_transitions(ParamState& theta, const PriorSpec& prior, Rng& rng) {
  TransitionCounts n;
  if (theta.s.size() >= 2) n = transition_counts(theta.s);
  theta.tp.p01 = truncated_beta(prior.p01.a + static_cast<double>(n.n01), prior.p01.b + static_cast<double>(n.n00),
                                0.0, theta.tp.p10, rng);
  theta.tp.p10 = truncated_beta(prior.p10.a + static_cast<double>(n.n10), prior.p10.b + static_cast<double>(n.n11),
                                theta.tp.p01, 1.0, rng);
}

void gibbs_update_states(ParamState& theta, const PanelDataset& data, const ModelSpec& spec, std::size_t tau,
                         Rng& rng, std::size_t offset) {
  check_tau(tau);
  if (theta.s.size() != data.periods()) throw UsageError("state sequence length does not match the data");
  detail::LikelihoodCache cache(data, spec.kernel);
  std::vector<double> L0(data.periods()), L1(data.periods());
  cache.period_logliks(theta.beta0, theta.log_alpha0, L0);
  cache.period_logliks(theta.beta1, theta.log_alpha1, L1);
  BlockScratch sc;
  sample_states(theta.s, L0, L1, theta.tp, tau, offset, rng, sc);
}

ParamState initial_point(const PriorSpec& prior, const ModelSpec& spec, std::size_t periods, std::size_t chain,
                         std::size_t n_chains) {
  auto delta = [n_chains](std::size_t c) {
    return n_chains > 1 ? -2.0 + 4.0 * static_cast<double>(c) / static_cast<double>(n_chains - 1) : 0.0;
  };
  const double d0 = delta(chain);
  const double d1 = delta(n_chains - 1 - chain);
  const std::size_t K = spec.coef_mask.size();
  ParamState theta;
  theta.beta0.assign(K, 0.0);
  theta.beta1.assign(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    if (spec.coef_mask[k] == CoefMask::FixedZeroBoth) continue;
    const double sd = std::sqrt(prior.beta_var[k]);
    theta.beta0[k] = prior.beta_mean[k] + d0 * sd;
    theta.beta1[k] = prior.beta_mean[k] + (spec.switching ? d1 : d0) * sd;
  }
  if (spec.has_dispersion()) {
    const double base = std::log(prior.alpha_mean > 0.0 ? prior.alpha_mean : kDefaultJump);
    theta.log_alpha0 = base + 0.5 * d0;
    theta.log_alpha1 = base + 0.5 * (spec.switching ? d1 : d0);
  }
  theta.tp = spec.switching ? TransitionProbs{0.2, 0.5} : TransitionProbs{0.0, 1.0};
  theta.s.assign(periods, 0);
  apply_mask(theta, spec);
  return theta;
}

ChainSample run_chain(const PanelDataset& data, const ModelSpec& spec, const PriorSpec& prior,
                      const ChainConfig& cfg, std::size_t chain) {
  cfg.validate();
  const std::size_t K = data.covariate_count();
  spec.validate(K);
  if (prior.beta_mean.size() != K) throw UsageError("prior dimension does not match the data");
  if (spec.has_dispersion() && !prior.has_alpha) throw UsageError("prior has no dispersion term");

  const std::vector<Coordinate> coords = sweep_coordinates(spec, data.covariate_names());
  ParamState init = cfg.initial_points.empty() ? initial_point(prior, spec, data.periods(), chain, cfg.n_chains)
                                               : cfg.initial_points[chain];
  apply_mask(init, spec);
  check_param_state(init, spec, K, data.periods());
  const std::uint64_t stream = cfg.chain_streams.empty() ? chain : cfg.chain_streams[chain];
  Rng rng = make_rng(cfg.seed, stream);

  Engine eng(data, spec, prior, std::move(init));
  const double lj0 = eng.loglik() + log_prior(eng.theta(), prior, spec);
  if (!std::isfinite(lj0)) {
    throw DataError("initial point of chain " + std::to_string(chain) + " has zero joint density");
  }

  ChainSample out;
  out.chain = chain;
  const std::size_t n_coords = coords.size();
  const std::size_t T = data.periods();
  const std::size_t n_keep = (cfg.total_iters - cfg.burn_in) / cfg.thin;
  out.sweeps.reserve(n_keep);
  out.values.reserve(n_keep * n_coords);
  out.tp.reserve(n_keep);
  out.loglik.reserve(n_keep);
  out.log_joint.reserve(n_keep);
  if (spec.switching) out.states.reserve(n_keep * T);
  out.accepted.assign(n_coords, 0);
  out.proposed.assign(n_coords, 0);

  const bool relabel = spec.switching && label_symmetric(spec);
  std::vector<double> sds = initial_sds(coords, cfg.jump);
  AdaptationLedger ledger(n_coords);
  if (cfg.burn_in == 0) ledger.freeze();

  for (std::size_t g = 0; g < cfg.total_iters; ++g) {
    const bool burning = g < cfg.burn_in;
    for (std::size_t i = 0; i < n_coords; ++i) {
      const bool acc = eng.mh(coords[i], sds[i], rng);
      if (burning) {
        ledger.record(i, acc);
      } else {
        ++out.proposed[i];
        if (acc) ++out.accepted[i];
      }
    }
    if (spec.switching) {
      gibbs_update_transitions(eng.theta(), prior, rng);
      eng.update_states(cfg.block_len, g, rng);
    }
    if (!std::isfinite(eng.loglik())) {
      throw NumericalError("log-likelihood became non-finite at sweep " + std::to_string(g) + " of chain " +
                           std::to_string(chain));
    }
    if (burning) {
      if ((g + 1) % cfg.adapt_window == 0) {
        if (relabel && eng.relabel_if_inverted()) ++out.relabels;
        sds = adapt_jump_sds(ledger, sds, cfg.target_acceptance);
        ledger.reset_window();
        out.sd_trace.push_back(sds);
      }
      if (g + 1 == cfg.burn_in) ledger.freeze();
      continue;
    }
    if ((g + 1 - cfg.burn_in) % cfg.thin != 0) continue;
    const ParamState& th = eng.theta();
    const double ll = eng.loglik();
    const double lj = ll + log_prior(th, prior, spec);
    if (!std::isfinite(lj)) {
      throw NumericalError("log-joint became non-finite at sweep " + std::to_string(g) + " of chain " +
                           std::to_string(chain));
    }
    out.sweeps.push_back(g);
    for (const Coordinate& c : coords) out.values.push_back(coordinate_value(c, th));
    out.tp.push_back(th.tp);
    out.loglik.push_back(ll);
    out.log_joint.push_back(lj);
    if (spec.switching) out.states.insert(out.states.end(), th.s.begin(), th.s.end());
  }
  out.jump_sd = sds;
  return out;
}

PosteriorSample run_ensemble(const PanelDataset& data, const ModelSpec& spec, const PriorSpec& prior,
                             const ChainConfig& cfg) {
  cfg.validate();
  PosteriorSample ps;
  ps.spec = spec;
  ps.covariate_names = data.covariate_names();
  ps.coords = sweep_coordinates(spec, data.covariate_names());
  ps.periods = data.periods();
  ps.chains.resize(cfg.n_chains);

  std::size_t workers = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
  workers = std::min(workers, cfg.n_chains);
  std::vector<std::exception_ptr> errors(cfg.n_chains);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t c = next++; c < cfg.n_chains; c = next++) {
      try {
        ps.chains[c] = run_chain(data, spec, prior, cfg, c);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (std::size_t c = 0; c < ps.chains.size(); ++c) {
    for (std::size_t d = c + 1; d < ps.chains.size(); ++d) {
      const ChainSample& a = ps.chains[c];
      const ChainSample& b = ps.chains[d];
      if (a.values == b.values && a.loglik == b.loglik && a.states == b.states) {
        ps.warnings.push_back("chains " + std::to_string(c) + " and " + std::to_string(d) +
                              " are identical; convergence diagnostics are degenerate");
      }
    }
  }
  return ps;
}

std::size_t PosteriorSample::total_draws() const {
  std::size_t n = 0;
  for (const auto& c : chains) n += c.draws();
  return n;
}

std::vector<std::string> PosteriorSample::parameter_names() const {
  std::vector<std::string> names;
  for (const auto& c : coords) names.push_back(c.name);
  if (spec.switching) {
    names.emplace_back("p01");
    names.emplace_back("p10");
  }
  return names;
}

std::vector<double> PosteriorSample::chain_series(std::size_t c, std::size_t p) const {
  const ChainSample& ch = chains.at(c);
  const std::size_t n = ch.draws();
  std::vector<double> out(n);
  const std::size_t nc = coords.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (p < nc) {
      out[i] = ch.values[i * nc + p];
    } else if (p == nc && spec.switching) {
      out[i] = ch.tp[i].p01;
    } else if (p == nc + 1 && spec.switching) {
      out[i] = ch.tp[i].p10;
    } else {
      throw UsageError("parameter index out of range");
    }
  }
  return out;
}

std::vector<double> PosteriorSample::pooled(std::size_t p) const {
  std::vector<double> out;
  out.reserve(total_draws());
  for (std::size_t c = 0; c < chains.size(); ++c) {
    const auto s = chain_series(c, p);
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

std::vector<double> PosteriorSample::pooled_loglik() const {
  std::vector<double> out;
  out.reserve(total_draws());
  for (const auto& c : chains) out.insert(out.end(), c.loglik.begin(), c.loglik.end());
  return out;
}

ParamState PosteriorSample::param_state(std::size_t c, std::size_t i) const {
  const ChainSample& ch = chains.at(c);
  const std::size_t K = spec.coef_mask.size();
  ParamState th;
  th.beta0.assign(K, 0.0);
  th.beta1.assign(K, 0.0);
  for (std::size_t j = 0; j < coords.size(); ++j) set_coordinate(coords[j], th, ch.values[i * coords.size() + j]);
  th.tp = ch.tp[i];
  if (spec.switching) {
    th.s.assign(ch.states.begin() + static_cast<std::ptrdiff_t>(i * periods),
                ch.states.begin() + static_cast<std::ptrdiff_t>((i + 1) * periods));
  } else {
    th.s.assign(periods, 0);
  }
  return th;
}

}  // namespace msnb
