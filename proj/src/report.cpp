#include "msnb/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace msnb {

namespace {

using nlohmann::json;

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json interval_json(const Interval& iv) { return json::array({finite_or_null(iv.lo), finite_or_null(iv.hi)}); }

std::string fmt(double v, int prec = 4) {
  if (std::isnan(v)) return "n/a";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

std::size_t mle_free_count(const MleResult& mle) {
  std::size_t k = 0;
  for (std::size_t i = 0; i < mle.dimension(); ++i) {
    if (std::isfinite(mle.variance(i))) ++k;
  }
  return k;
}

}  // namespace

json to_json(const SummaryReport& r) {
  json j;
  j["model"] = r.model;
  j["levels"] = r.levels;
  json params = json::array();
  for (const auto& p : r.parameters) {
    json intervals = json::array();
    for (const auto& iv : p.intervals) intervals.push_back(interval_json(iv));
    params.push_back({{"name", p.name}, {"mean", p.mean}, {"sd", p.sd}, {"intervals", intervals}});
  }
  j["parameters"] = params;
  j["rate_summary"] = json::array();
  for (const auto& rs : r.rates) j["rate_summary"].push_back({{"mean_rate", rs.mean_rate}, {"mean_sd", rs.mean_sd}});
  json ll_iv = json::array();
  for (const auto& iv : r.loglik.intervals) ll_iv.push_back(interval_json(iv));
  j["loglik"] = {{"mean", r.loglik.mean}, {"sd", r.loglik.sd}, {"intervals", ll_iv}};
  j["max_loglik"] = r.max_loglik;
  j["log_marginal_likelihood"] = finite_or_null(r.lml);
  j["lml_ci"] = interval_json(r.lml_ci);
  j["lml_method"] = "harmonic mean with bootstrap interval";
  j["n_free"] = r.n_free;
  j["n_obs"] = r.n_obs;
  j["aic"] = r.ic.aic;
  j["bic"] = r.ic.bic;
  json psrf = json::object();
  for (std::size_t i = 0; i < r.psrf.size(); ++i) psrf[r.psrf_names[i]] = finite_or_null(r.psrf[i]);
  j["psrf"] = psrf;
  j["max_psrf"] = finite_or_null(r.max_psrf);
  j["mpsrf"] = finite_or_null(r.mpsrf);
  j["psrf_variant"] = "sqrt(((n-1)/n W + (1+1/m) B/n) / W); MPSRF reported as sqrt((n-1)/n + (m+1)/m lambda_max)";
  j["gof"] = {{"label", kGofLabel}, {"p_value", finite_or_null(r.gof_p)}};
  j["state_existence"] = {{"applicable", r.existence.applicable},
                          {"degenerate", r.existence.degenerate()},
                          {"indistinguishable", r.existence.indistinguishable},
                          {"occupancy_collapse", r.existence.occupancy_collapse},
                          {"mean_occupancy", r.existence.mean_occupancy},
                          {"differences_covering_zero", r.existence.differences_covering_zero}};
  if (r.intercept_gap) {
    j["intercept_gap"] = {{"mean", r.intercept_gap->mean},
                          {"ci95", interval_json(r.intercept_gap->ci)},
                          {"significant", r.intercept_gap->significant}};
  }
  j["chains"] = r.chains;
  j["draws"] = r.draws;
  j["warnings"] = r.warnings;
  return j;
}

json to_json(const MleResult& m, std::size_t n_obs) {
  json j;
  j["model"] = "nb-mle";
  j["kernel"] = to_string(m.kernel);
  json params = json::array();
  for (std::size_t i = 0; i < m.dimension(); ++i) {
    const double se = m.std_error(i);
    json p = {{"name", m.names[i]}, {"estimate", finite_or_null(m.estimate(i))}, {"std_error", finite_or_null(se)}};
    p["ci95"] = std::isfinite(se) ? interval_json({m.confidence_interval(i).first, m.confidence_interval(i).second})
                                  : json(nullptr);
    params.push_back(p);
  }
  j["parameters"] = params;
  j["loglik"] = finite_or_null(m.log_likelihood);
  j["max_loglik"] = finite_or_null(m.log_likelihood);
  j["log_marginal_likelihood"] = nullptr;
  const std::size_t k = mle_free_count(m);
  j["n_free"] = k;
  j["n_obs"] = n_obs;
  if (k > 0 && n_obs > 0 && std::isfinite(m.log_likelihood)) {
    const auto ic = information_criteria(m.log_likelihood, k, n_obs);
    j["aic"] = ic.aic;
    j["bic"] = ic.bic;
  } else {
    j["aic"] = nullptr;
    j["bic"] = nullptr;
  }
  j["converged"] = m.converged;
  j["boundary"] = m.boundary;
  j["iterations"] = m.iterations;
  j["gradient_norm"] = m.gradient_norm;
  j["message"] = m.message;
  return j;
}

json to_json(const PriorSpec& p) {
  json betas = json::array();
  for (std::size_t k = 0; k < p.beta_mean.size(); ++k) {
    betas.push_back({{"name", k < p.names.size() ? p.names[k] : std::to_string(k)},
                     {"mean", p.beta_mean[k]},
                     {"var", finite_or_null(p.beta_var[k])}});
  }
  json j = {{"beta", betas},
            {"p01", {{"a", p.p01.a}, {"b", p.p01.b}}},
            {"p10", {{"a", p.p10.a}, {"b", p.p10.b}}},
            {"truncation", "p01 <= p10"}};
  if (p.has_alpha) {
    j["alpha"] = {{"mean", p.alpha_mean},
                  {"var", p.alpha_var},
                  {"scale", "alpha"},
                  {"note", "normal prior on alpha, truncated to alpha > 0, no log-alpha Jacobian term"}};
  }
  return j;
}

json to_json(const ChainConfig& c) {
  return {{"n_chains", c.n_chains},
          {"total_iters", c.total_iters},
          {"burn_in", c.burn_in},
          {"thin", c.thin},
          {"block_len", c.block_len},
          {"target_acceptance", c.target_acceptance},
          {"adapt_window", c.adapt_window},
          {"seed", c.seed}};
}

std::string render_summary(const SummaryReport& r) {
  std::ostringstream os;
  const int level_pct = r.levels.empty() ? 0 : static_cast<int>(std::lround(100 * r.levels.front()));
  os << "model: " << r.model << "  (" << r.chains << " chains, " << r.draws << " draws)\n";
  os << pad("parameter", 24) << pad("mean", 12) << pad("sd", 12) << level_pct << "% interval\n";
  for (const auto& p : r.parameters) {
    os << pad(p.name, 24) << pad(fmt(p.mean), 12) << pad(fmt(p.sd), 12);
    if (!p.intervals.empty()) os << fmt(p.mean) << " [" << fmt(p.intervals[0].lo) << ", " << fmt(p.intervals[0].hi) << "]";
    os << '\n';
  }
  os << '\n';
  for (int s = 0; s < 2; ++s) {
    os << "state " << s << " mean rate " << fmt(r.rates[s].mean_rate) << ", mean sd " << fmt(r.rates[s].mean_sd)
       << '\n';
  }
  os << "posterior mean LL     " << fmt(r.loglik.mean, 2);
  if (!r.loglik.intervals.empty()) {
    os << " [" << fmt(r.loglik.intervals[0].lo, 2) << ", " << fmt(r.loglik.intervals[0].hi, 2) << "]";
  }
  os << '\n';
  os << "max LL                " << fmt(r.max_loglik, 2) << '\n';
  os << "log marginal lik.     " << fmt(r.lml, 2) << " [" << fmt(r.lml_ci.lo, 2) << ", " << fmt(r.lml_ci.hi, 2)
     << "]\n";
  os << "free parameters K     " << r.n_free << "  (N = " << r.n_obs << ")\n";
  os << "AIC                   " << fmt(r.ic.aic, 2) << '\n';
  os << "BIC                   " << fmt(r.ic.bic, 2) << '\n';
  os << "max PSRF              " << fmt(r.max_psrf) << '\n';
  os << "MPSRF                 " << fmt(r.mpsrf) << '\n';
  os << kGofLabel << "  " << fmt(r.gof_p, 3) << '\n';
  if (r.existence.applicable) {
    os << "state-1 occupancy     " << fmt(r.existence.mean_occupancy) << '\n';
    os << "state existence       " << (r.existence.degenerate() ? "DEGENERATE" : "ok");
    if (r.existence.indistinguishable) os << " (every coefficient difference covers 0)";
    if (r.existence.occupancy_collapse) os << " (occupancy below 1%)";
    os << '\n';
  }
  if (r.intercept_gap) {
    os << "intercept gap         " << fmt(r.intercept_gap->mean) << " [" << fmt(r.intercept_gap->ci.lo) << ", "
       << fmt(r.intercept_gap->ci.hi) << "] " << (r.intercept_gap->significant ? "significant" : "not significant")
       << '\n';
  }
  for (const auto& w : r.warnings) os << "warning: " << w << '\n';
  return os.str();
}

std::string render_mle(const MleResult& m, std::size_t n_obs) {
  std::ostringstream os;
  os << "model: nb-mle (" << to_string(m.kernel) << " kernel)\n";
  os << pad("parameter", 24) << pad("estimate", 12) << pad("std.err", 12) << "95% interval\n";
  for (std::size_t i = 0; i < m.dimension(); ++i) {
    const double se = m.std_error(i);
    os << pad(m.names[i], 24) << pad(fmt(m.estimate(i)), 12) << pad(fmt(se), 12);
    if (std::isfinite(se)) {
      const auto ci = m.confidence_interval(i);
      os << fmt(m.estimate(i)) << " [" << fmt(ci.first) << ", " << fmt(ci.second) << "]";
    }
    os << '\n';
  }
  os << "\nLL                    " << fmt(m.log_likelihood, 2) << '\n';
  const std::size_t k = mle_free_count(m);
  if (k > 0 && std::isfinite(m.log_likelihood)) {
    const auto ic = information_criteria(m.log_likelihood, k, n_obs);
    os << "AIC                   " << fmt(ic.aic, 2) << '\n';
    os << "BIC                   " << fmt(ic.bic, 2) << '\n';
  }
  os << "status                " << m.message << '\n';
  return os.str();
}

}  // namespace msnb
