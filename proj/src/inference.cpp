#include "msnb/inference.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "msnb/error.hpp"
#include "msnb/markov.hpp"

namespace msnb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x, double m) {
  double acc = 0.0;
  for (double v : x) acc += (v - m) * (v - m);
  return acc / static_cast<double>(x.size() - 1);
}

void check_chains(const std::vector<std::vector<double>>& chains, std::size_t dim) {
  if (chains.size() < 2) throw UsageError("convergence diagnostics need at least two chains");
  const std::size_t len = chains.front().size();
  for (const auto& c : chains) {
    if (c.size() != len) throw UsageError("chains must have equal length");
  }
  if (dim == 0 || len % dim != 0) throw UsageError("chain length is not a multiple of the dimension");
  if (len / dim < 10) throw UsageError("convergence diagnostics need at least 10 draws per chain");
}

}  // namespace

double sorted_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw UsageError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Interval credible_interval(std::span<const double> draws, double level) {
  if (draws.size() < 2) throw UsageError("a credible interval needs at least two draws");
  if (!(level > 0.0 && level < 1.0)) throw UsageError("credible level must be in (0,1)");
  std::vector<double> s(draws.begin(), draws.end());
  std::sort(s.begin(), s.end());
  const double a = 1.0 - level;
  return {sorted_quantile(s, a / 2.0), sorted_quantile(s, 1.0 - a / 2.0)};
}

StateProbSeries state_probabilities(const PosteriorSample& sample) {
  const std::size_t T = sample.periods;
  StateProbSeries out;
  out.prob.assign(T, 0.0);
  out.sd.assign(T, 0.0);
  const std::size_t n = sample.total_draws();
  if (n == 0) throw UsageError("no draws");
  if (!sample.spec.switching) return out;
  std::vector<std::size_t> ones(T, 0);
  for (const auto& c : sample.chains) {
    for (std::size_t i = 0; i < c.draws(); ++i) {
      const std::uint8_t* row = c.states.data() + i * T;
      for (std::size_t t = 0; t < T; ++t) ones[t] += row[t];
    }
  }
  for (std::size_t t = 0; t < T; ++t) {
    const double p = static_cast<double>(ones[t]) / static_cast<double>(n);
    out.prob[t] = p;
    out.sd[t] = std::sqrt(p * (1.0 - p));
  }
  return out;
}

double log_marginal_likelihood(std::span<const double> loglik) {
  if (loglik.empty()) throw UsageError("log marginal likelihood of an empty sample");
  double mx = -kInf;
  for (double l : loglik) mx = std::max(mx, -l);
  double acc = 0.0;
  for (double l : loglik) acc += std::exp(-l - mx);
  return std::log(static_cast<double>(loglik.size())) - (mx + std::log(acc));
}

Interval bootstrap_lml_ci(std::span<const double> loglik, std::size_t n_boot, double frac, std::uint64_t seed) {
  if (n_boot < 100) throw UsageError("at least 100 bootstrap replicates are required");
  const auto k = static_cast<std::size_t>(std::llround(frac * static_cast<double>(loglik.size())));
  if (k < 2) throw UsageError("bootstrap fraction leaves fewer than 2 draws per replicate");
  double mx = -kInf;
  for (double l : loglik) mx = std::max(mx, -l);
  std::vector<double> e(loglik.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = std::exp(-loglik[i] - mx);
  Rng rng = make_rng(seed, 0x626f6f74);
  std::uniform_int_distribution<std::size_t> pick(0, loglik.size() - 1);
  const double log_k = std::log(static_cast<double>(k));
  std::vector<double> rep(n_boot);
  for (std::size_t r = 0; r < n_boot; ++r) {
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) acc += e[pick(rng)];
    rep[r] = log_k - (mx + std::log(acc));
  }
  std::sort(rep.begin(), rep.end());
  return {sorted_quantile(rep, 0.025), sorted_quantile(rep, 0.975)};
}

double bayes_factor(double lml_a, double lml_b) { return lml_b - lml_a; }

InformationCriteria information_criteria(double max_ll, std::size_t k, std::size_t n) {
  if (n < 1 || k < 1) throw UsageError("information criteria need k >= 1 and n >= 1");
  const double K = static_cast<double>(k);
  return {2.0 * K - 2.0 * max_ll, K * std::log(static_cast<double>(n)) - 2.0 * max_ll};
}

double psrf(const std::vector<std::vector<double>>& chains) {
  check_chains(chains, 1);
  const double m = static_cast<double>(chains.size());
  const double n = static_cast<double>(chains.front().size());
  std::vector<double> means;
  double W = 0.0;
  for (const auto& c : chains) {
    const double mu = mean_of(c);
    means.push_back(mu);
    W += sample_variance(c, mu);
  }
  W /= m;
  const double B_over_n = sample_variance(means, mean_of(means));
  if (W == 0.0) return B_over_n > 0.0 ? kInf : std::sqrt((n - 1.0) / n);
  return std::sqrt(((n - 1.0) / n * W + (1.0 + 1.0 / m) * B_over_n) / W);
}

double mpsrf(const std::vector<std::vector<double>>& chains, std::size_t dim) {
  check_chains(chains, dim);
  const auto d = static_cast<Eigen::Index>(dim);
  const std::size_t m = chains.size();
  const std::size_t n = chains.front().size() / dim;
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd means(d, static_cast<Eigen::Index>(m));
  for (std::size_t c = 0; c < m; ++c) {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> X(
        chains[c].data(), static_cast<Eigen::Index>(n), d);
    const Eigen::RowVectorXd mu = X.colwise().mean();
    means.col(static_cast<Eigen::Index>(c)) = mu.transpose();
    const Eigen::MatrixXd centered = X.rowwise() - mu;
    W += centered.transpose() * centered / static_cast<double>(n - 1);
  }
  W /= static_cast<double>(m);
  const Eigen::VectorXd grand = means.rowwise().mean();
  const Eigen::MatrixXd dm = means.colwise() - grand;
  const Eigen::MatrixXd B_over_n = dm * dm.transpose() / static_cast<double>(m - 1);

  Eigen::LLT<Eigen::MatrixXd> llt(W);
  if (llt.info() != Eigen::Success || W.diagonal().minCoeff() <= 0.0) {
    throw NumericalError("singular pooled within-chain covariance");
  }
  const Eigen::MatrixXd L = llt.matrixL();
  const Eigen::MatrixXd Linv = L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(d, d));
  const Eigen::MatrixXd M = Linv * B_over_n * Linv.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  const double lambda = std::max(0.0, es.eigenvalues().maxCoeff());
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return std::sqrt((nn - 1.0) / nn + (mm + 1.0) / mm * lambda);
}

double gof_pvalue(const PosteriorSample& sample, const PanelDataset& data, Rng& rng, std::size_t max_draws) {
  const std::size_t total = sample.total_draws();
  if (total < 100) throw UsageError("posterior-predictive check needs at least 100 draws");
  if (sample.periods != data.periods()) throw UsageError("posterior sample does not match the data");
  const std::size_t m = std::max<std::size_t>(1, std::min(max_draws, total));
  const Kernel kernel = sample.spec.kernel;
  std::vector<std::pair<std::size_t, std::size_t>> index;
  for (std::size_t c = 0; c < sample.chains.size(); ++c) {
    for (std::size_t i = 0; i < sample.chains[c].draws(); ++i) index.emplace_back(c, i);
  }
  std::size_t exceed = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const auto [c, i] = index[j * total / m];
    const ParamState th = sample.param_state(c, i);
    double d_obs = 0.0, d_rep = 0.0;
    for (std::size_t t = 0; t < data.periods(); ++t) {
      const int st = th.s[t];
      const std::vector<double>& beta = th.beta(st);
      const double alpha = kernel == Kernel::NegativeBinomial ? std::exp(th.log_alpha(st)) : 0.0;
      for (std::size_t o = data.period_begin(t); o < data.period_end(t); ++o) {
        const double lambda = rate(beta, data.covariates(o));
        const double var = lambda * (1.0 + alpha * lambda);
        const double a = static_cast<double>(data.count(o));
        const double r = static_cast<double>(sample_count(kernel, lambda, alpha, rng));
        d_obs += (a - lambda) * (a - lambda) / var;
        d_rep += (r - lambda) * (r - lambda) / var;
      }
    }
    if (d_rep >= d_obs) ++exceed;
  }
  return static_cast<double>(exceed) / static_cast<double>(m);
}

double weighted_correlation(std::span<const double> a, std::span<const double> b, std::span<const double> w) {
  if (a.size() != b.size() || a.size() != w.size()) throw UsageError("series and weights must have equal length");
  double sw = 0.0, ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(w[i] >= 0.0) || !std::isfinite(w[i])) throw DataError("weights must be finite and non-negative");
    sw += w[i];
    ma += w[i] * a[i];
    mb += w[i] * b[i];
  }
  if (!(sw > 0.0)) throw DataError("at least one weight must be positive");
  ma /= sw;
  mb /= sw;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    saa += w[i] * da * da;
    sbb += w[i] * db * db;
    sab += w[i] * da * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) throw DataError("zero weighted variance");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<double> state_weights(std::span<const double> sd) {
  std::vector<double> inv(sd.size());
  for (std::size_t t = 0; t < sd.size(); ++t) inv[t] = sd[t] > 0.0 ? 1.0 / sd[t] : kInf;
  std::vector<double> sorted = inv;
  std::sort(sorted.begin(), sorted.end());
  const double cap = sorted.empty() ? kInf : sorted_quantile(sorted, 0.5);
  if (!std::isfinite(cap)) return std::vector<double>(sd.size(), 1.0);
  for (double& v : inv) v = std::min(v, cap);
  return inv;
}

DifferenceTest difference_significance(std::span<const double> a, std::span<const double> b, double level) {
  if (a.size() != b.size()) throw UsageError("difference draws must be paired");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = b[i] - a[i];
  DifferenceTest out;
  out.mean = mean_of(d);
  out.ci = credible_interval(d, level);
  out.significant = out.ci.lo > 0.0 || out.ci.hi < 0.0;
  return out;
}

StateExistence state_existence(const PosteriorSample& sample, double level, double min_occupancy) {
  StateExistence out;
  if (!sample.spec.switching) return out;
  out.applicable = true;
  const std::size_t T = sample.periods;
  double occ = 0.0;
  for (const auto& c : sample.chains) {
    for (std::size_t i = 0; i < c.draws(); ++i) {
      const std::uint8_t* row = c.states.data() + i * T;
      occ += static_cast<double>(std::accumulate(row, row + T, std::size_t{0})) / static_cast<double>(T);
    }
  }
  out.mean_occupancy = occ / static_cast<double>(sample.total_draws());
  out.occupancy_collapse = out.mean_occupancy < min_occupancy;

  std::size_t n_free = 0;
  for (std::size_t k = 0; k < sample.spec.coef_mask.size(); ++k) {
    if (sample.spec.coef_mask[k] != CoefMask::FreePerState) continue;
    std::optional<std::size_t> i0, i1;
    for (std::size_t p = 0; p < sample.coords.size(); ++p) {
      const Coordinate& c = sample.coords[p];
      if (c.kind != Coordinate::Kind::Beta || c.index != k) continue;
      (c.state == 0 ? i0 : i1) = p;
    }
    ++n_free;
    const auto d = difference_significance(sample.pooled(*i0), sample.pooled(*i1), level);
    if (!d.significant) out.differences_covering_zero.push_back(sample.covariate_names[k]);
  }
  out.indistinguishable = n_free > 0 && out.differences_covering_zero.size() == n_free;
  return out;
}

ParamSummary summarize_draws(const std::string& name, std::span<const double> draws,
                             const std::vector<double>& levels) {
  ParamSummary s;
  s.name = name;
  s.mean = mean_of(draws);
  s.sd = draws.size() > 1 ? std::sqrt(sample_variance(draws, s.mean)) : 0.0;
  std::vector<double> sorted(draws.begin(), draws.end());
  std::sort(sorted.begin(), sorted.end());
  for (double level : levels) {
    const double a = 1.0 - level;
    s.intervals.push_back({sorted_quantile(sorted, a / 2.0), sorted_quantile(sorted, 1.0 - a / 2.0)});
  }
  return s;
}

const ParamSummary* SummaryReport::find(const std::string& name) const {
  for (const auto& p : parameters) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

SummaryReport summarize(const PosteriorSample& sample, const PanelDataset& data, const std::string& model,
                        const SummaryOptions& options) {
  if (sample.total_draws() < 2) throw UsageError("summaries need at least two draws");
  const ModelSpec& spec = sample.spec;
  SummaryReport rep;
  rep.model = model;
  rep.levels = options.levels;
  rep.chains = sample.chains.size();
  rep.draws = sample.total_draws();
  rep.warnings = sample.warnings;

  for (std::size_t p = 0; p < sample.coords.size(); ++p) {
    const Coordinate& c = sample.coords[p];
    std::vector<double> d = sample.pooled(p);
    std::string name = c.name;
    if (c.kind == Coordinate::Kind::LogAlpha) {
      for (double& v : d) v = std::exp(v);
      name = "alpha" + c.name.substr(std::string("log_alpha").size());
    }
    rep.parameters.push_back(summarize_draws(name, d, options.levels));
  }
  if (spec.switching) {
    const std::size_t nc = sample.coords.size();
    const std::vector<double> p01 = sample.pooled(nc);
    const std::vector<double> p10 = sample.pooled(nc + 1);
    rep.parameters.push_back(summarize_draws("p01", p01, options.levels));
    rep.parameters.push_back(summarize_draws("p10", p10, options.levels));
    std::vector<double> pbar0(p01.size()), pbar1(p01.size());
    for (std::size_t i = 0; i < p01.size(); ++i) {
      const double s = p01[i] + p10[i];
      pbar0[i] = s > 0.0 ? p10[i] / s : 1.0;
      pbar1[i] = 1.0 - pbar0[i];
    }
    rep.parameters.push_back(summarize_draws("pbar0", pbar0, options.levels));
    rep.parameters.push_back(summarize_draws("pbar1", pbar1, options.levels));
    for (std::size_t k = 0; k < spec.coef_mask.size(); ++k) {
      if (spec.coef_mask[k] != CoefMask::FreePerState) continue;
      const std::string& nm = sample.covariate_names[k];
      std::size_t i0 = 0, i1 = 0;
      for (std::size_t p = 0; p < nc; ++p) {
        if (sample.coords[p].name == "beta0." + nm) i0 = p;
        if (sample.coords[p].name == "beta1." + nm) i1 = p;
      }
      const auto a = sample.pooled(i0);
      const auto b = sample.pooled(i1);
      std::vector<double> d(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) d[i] = b[i] - a[i];
      rep.parameters.push_back(summarize_draws("diff." + nm, d, options.levels));
      if (k == 0) rep.intercept_gap = difference_significance(a, b, 0.95);
    }
  }

  // Rate summaries averaged over up to 200 evenly spaced draws.
  {
    const std::size_t total = sample.total_draws();
    const std::size_t m = std::min<std::size_t>(200, total);
    std::size_t seen = 0;
    for (std::size_t j = 0; j < m; ++j) {
      std::size_t idx = j * total / m;
      std::size_t c = 0;
      while (idx >= sample.chains[c].draws()) idx -= sample.chains[c++].draws();
      const auto rs = rate_summary(sample.param_state(c, idx), data, spec.kernel);
      for (int s = 0; s < 2; ++s) {
        rep.rates[s].mean_rate += rs[s].mean_rate;
        rep.rates[s].mean_sd += rs[s].mean_sd;
      }
      ++seen;
    }
    for (auto& r : rep.rates) {
      r.mean_rate /= static_cast<double>(seen);
      r.mean_sd /= static_cast<double>(seen);
    }
  }

  const std::vector<double> ll = sample.pooled_loglik();
  rep.loglik = summarize_draws("loglik", ll, options.levels);
  rep.max_loglik = *std::max_element(ll.begin(), ll.end());
  rep.lml = log_marginal_likelihood(ll);
  try {
    rep.lml_ci = bootstrap_lml_ci(ll, options.n_boot, options.boot_frac, options.seed);
    if (0.5 * (rep.lml_ci.hi - rep.lml_ci.lo) > options.lml_warn_halfwidth) {
      rep.warnings.push_back("harmonic-mean marginal likelihood is unstable: bootstrap half-width exceeds " +
                             std::to_string(options.lml_warn_halfwidth) + " log units");
    }
  } catch (const Error& e) {
    rep.lml_ci = {kNaN, kNaN};
    rep.warnings.push_back(std::string("bootstrap interval unavailable: ") + e.what());
  }
  rep.n_free = sample.coords.size();
  rep.n_obs = data.observations();
  rep.ic = information_criteria(rep.max_loglik, rep.n_free, rep.n_obs);

  rep.psrf_names = sample.parameter_names();
  rep.max_psrf = kNaN;
  rep.mpsrf = kNaN;
  if (sample.chains.size() >= 2 && sample.draws_per_chain() >= 10) {
    const std::size_t d = rep.psrf_names.size();
    const std::size_t n = sample.draws_per_chain();
    std::vector<std::vector<double>> joint(sample.chains.size(), std::vector<double>(n * d));
    rep.max_psrf = 0.0;
    for (std::size_t p = 0; p < d; ++p) {
      std::vector<std::vector<double>> per_chain;
      for (std::size_t c = 0; c < sample.chains.size(); ++c) {
        per_chain.push_back(sample.chain_series(c, p));
        for (std::size_t i = 0; i < n; ++i) joint[c][i * d + p] = per_chain.back()[i];
      }
      const double r = psrf(per_chain);
      rep.psrf.push_back(r);
      rep.max_psrf = std::max(rep.max_psrf, r);
    }
    try {
      rep.mpsrf = mpsrf(joint, d);
    } catch (const Error& e) {
      rep.warnings.push_back(std::string("MPSRF unavailable: ") + e.what());
    }
  } else {
    rep.warnings.push_back("convergence diagnostics need at least two chains of 10 draws");
  }

  rep.gof_p = kNaN;
  if (options.compute_gof && sample.total_draws() >= 100) {
    Rng rng = make_rng(options.seed, 0x676f66);
    rep.gof_p = gof_pvalue(sample, data, rng, options.gof_draws);
  }
  rep.existence = state_existence(sample);
  return rep;
}

}  // namespace msnb
