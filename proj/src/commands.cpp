#include "msnb/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "msnb/config.hpp"
#include "msnb/draws_io.hpp"
#include "msnb/error.hpp"
#include "msnb/mle.hpp"
#include "msnb/priors.hpp"
#include "msnb/report.hpp"
#include "text.hpp"

#ifndef MSNB_VERSION
#define MSNB_VERSION "0.0.0"
#endif

namespace msnb {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw DataError("cannot create output directory " + dir.string());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_manifest(const fs::path& dir, const std::string& command, const json& config,
                    const std::string& data_fingerprint, std::uint64_t seed, const std::string& started) {
  json m;
  m["command"] = command;
  m["config"] = config;
  m["dataset_fingerprint"] = data_fingerprint;
  m["seed"] = seed;
  m["version"] = version();
  m["started"] = started;
  m["finished"] = utc_timestamp();
  write_json(dir / "manifest.json", m);
}

fs::path report_path(const fs::path& p) { return fs::is_directory(p) ? p / "report.json" : p; }

std::string masks_text(const ModelSpec& spec) {
  std::string s;
  for (std::size_t k = 0; k < spec.coef_mask.size(); ++k) {
    if (k) s += ',';
    s += to_string(spec.coef_mask[k]);
  }
  return s;
}

json spec_json(const ModelSpec& spec) {
  return {{"kernel", to_string(spec.kernel)},
          {"coef_mask", masks_text(spec)},
          {"dispersion", spec.dispersion_mask == DispersionMask::SharedAcrossStates ? "shared" : "free"},
          {"switching", spec.switching}};
}

std::string fmt(double v, int prec = 4) {
  if (!std::isfinite(v)) return std::isnan(v) ? "n/a" : (v > 0 ? "inf" : "-inf");
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

double json_number(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::numeric_limits<double>::quiet_NaN();
  return it->get<double>();
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> w(a.size(), 1.0);
  return weighted_correlation(a, b, w);
}

}  // namespace

const char* version() { return MSNB_VERSION; }

ModelSpec model_spec_for(const std::string& model, std::size_t K, const std::string& coef_mask,
                         const std::string& dispersion) {
  ModelSpec spec;
  if (model == "nb-mle" || model == "nb-mcmc") {
    spec = ModelSpec::standard(Kernel::NegativeBinomial, K);
  } else if (model == "msnb-restricted") {
    spec = ModelSpec::restricted(Kernel::NegativeBinomial, K);
  } else if (model == "msnb-full") {
    spec = ModelSpec::full(Kernel::NegativeBinomial, K);
  } else if (model == "msp-restricted") {
    spec = ModelSpec::restricted(Kernel::Poisson, K);
  } else if (model == "msp-full") {
    spec = ModelSpec::full(Kernel::Poisson, K);
  } else {
    throw UsageError("unknown model '" + model +
                     "' (expected nb-mle, nb-mcmc, msnb-restricted, msnb-full, msp-restricted or msp-full)");
  }
  if (!coef_mask.empty()) {
    const std::vector<std::string> parts = detail::split_csv(coef_mask);
    if (parts.size() != K) {
      throw UsageError("--coef-mask lists " + std::to_string(parts.size()) + " entries for " + std::to_string(K) +
                       " coefficients (intercept included)");
    }
    for (std::size_t k = 0; k < K; ++k) spec.coef_mask[k] = parse_coef_mask(parts[k]);
  }
  if (dispersion == "free") {
    spec.dispersion_mask = DispersionMask::FreePerState;
  } else if (dispersion == "shared") {
    spec.dispersion_mask = DispersionMask::SharedAcrossStates;
  } else if (!dispersion.empty()) {
    throw UsageError("--dispersion must be 'free' or 'shared'");
  }
  spec.validate(K);
  return spec;
}

void cmd_simulate(const fs::path& config, const fs::path& out_dir) {
  const std::string started = utc_timestamp();
  const GenerationConfig cfg = load_generation_config(config);
  const SimulatedPanel sim = simulate_panel(cfg);
  ensure_dir(out_dir);
  write_panel(sim.data, out_dir / "data.csv");
  std::string bits;
  for (auto s : sim.true_states) bits += s ? '1' : '0';
  std::vector<std::string> names = sim.data.covariate_names();
  json truth = {{"kernel", to_string(cfg.kernel)},
                {"true_params", to_json(cfg.true_params)},
                {"covariate_names", names},
                {"periods", sim.data.periods()},
                {"states", bits},
                {"dataset_fingerprint", fingerprint(sim.data)}};
  write_json(out_dir / "truth.json", truth);
  write_manifest(out_dir, "simulate", to_json(cfg), fingerprint(sim.data), cfg.seed, started);
}

json cmd_fit(const FitOptions& o) {
  const std::string started = utc_timestamp();
  const auto t0 = std::chrono::steady_clock::now();
  const PanelDataset data = load_panel(o.data, o.schema);
  const std::size_t K = data.covariate_count();
  const ModelSpec spec = model_spec_for(o.model, K, o.coef_mask, o.dispersion);
  ensure_dir(o.out);
  std::ofstream log(o.out / "log.txt");
  const std::string fp = fingerprint(data);
  log << "msnb " << version() << " fit " << o.model << "\n";
  log << "data " << o.data.string() << ": T=" << data.periods() << " N=" << data.observations() << " K=" << K
      << " fingerprint=" << fp << "\n";

  json config = {{"data", o.data.string()},
                 {"model", o.model},
                 {"spec", spec_json(spec)},
                 {"schema",
                  {{"period", o.schema.period_column},
                   {"segment", o.schema.segment_column},
                   {"count", o.schema.count_column},
                   {"covariates", o.schema.covariate_columns}}}};

  json report;
  if (o.model == "nb-mle") {
    const MleResult mle = fit_mle(data, spec);
    log << "mle: " << mle.message << " after " << mle.iterations << " iterations, LL=" << format_double(mle.log_likelihood)
        << "\n";
    report = to_json(mle, data.observations());
    report["dataset_fingerprint"] = fp;
    report["spec"] = spec_json(spec);
    write_json(o.out / "report.json", report);
    write_text(o.out / "report.txt", render_mle(mle, data.observations()));
    write_manifest(o.out, "fit", config, fp, 0, started);
    return report;
  }

  const MleResult prefit = fit_mle(data, ModelSpec::standard(spec.kernel, K));
  log << "prior prefit: " << prefit.message << ", LL=" << format_double(prefit.log_likelihood) << "\n";
  const PriorSpec prior = build_prior(prefit, &spec);
  ChainConfig chain = o.chain;
  if (chain.jump.beta.empty()) chain.jump = jump_scales_from_mle(prefit);
  config["chain"] = to_json(chain);
  config["summary"] = {{"levels", o.summary.levels},
                       {"n_boot", o.summary.n_boot},
                       {"boot_frac", o.summary.boot_frac},
                       {"gof_draws", o.summary.gof_draws},
                       {"compute_gof", o.summary.compute_gof}};
  log << "chains=" << chain.n_chains << " sweeps=" << chain.total_iters << " burn_in=" << chain.burn_in
      << " thin=" << chain.thin << " block_len=" << chain.block_len << " seed=" << chain.seed << "\n";
  log.flush();

  const PosteriorSample sample = run_ensemble(data, spec, prior, chain);
  const auto t1 = std::chrono::steady_clock::now();
  log << "sampling took " << std::chrono::duration<double>(t1 - t0).count() << " s\n";
  for (const auto& c : sample.chains) {
    log << "chain " << c.chain << " acceptance:";
    for (std::size_t i = 0; i < c.proposed.size(); ++i) {
      log << ' ' << sample.coords[i].name << '='
          << fmt(static_cast<double>(c.accepted[i]) / static_cast<double>(std::max<std::size_t>(1, c.proposed[i])), 3);
    }
    log << "\n";
  }

  SummaryOptions so = o.summary;
  so.seed = chain.seed;
  const SummaryReport summary = summarize(sample, data, o.model, so);
  for (const auto& w : summary.warnings) log << "warning: " << w << "\n";

  report = to_json(summary);
  report["dataset_fingerprint"] = fp;
  report["kernel"] = to_string(spec.kernel);
  report["spec"] = spec_json(spec);
  report["prior"] = to_json(prior);
  report["chain_config"] = to_json(chain);
  report["mle_prefit"] = to_json(prefit, data.observations());

  write_draws(sample, o.out / "draws.csv");
  write_states(sample, o.out / "states.txt");
  write_state_probs(state_probabilities(sample), data, o.out / "state_probs.csv");
  write_json(o.out / "report.json", report);
  write_text(o.out / "report.txt", render_summary(summary));
  write_manifest(o.out, "fit", config, fp, chain.seed, started);
  return report;
}

json cmd_compare(const std::vector<fs::path>& paths) {
  if (paths.size() < 2) throw UsageError("compare needs at least two reports");
  std::vector<json> reports;
  for (const auto& p : paths) reports.push_back(read_json(report_path(p)));
  const std::string fp0 = reports[0].value("dataset_fingerprint", "");
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const std::string fp = reports[i].value("dataset_fingerprint", "");
    if (fp.empty()) throw DataError("report " + report_path(paths[i]).string() + " lacks a dataset fingerprint");
    if (fp != fp0) {
      throw DataError("fingerprint mismatch: " + report_path(paths[0]).string() + "=" + fp0 + " vs " +
                      report_path(paths[i]).string() + "=" + fp);
    }
  }
  json out;
  out["dataset_fingerprint"] = fp0;
  json models = json::array();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const json& r = reports[i];
    models.push_back({{"path", paths[i].string()},
                      {"model", r.value("model", "?")},
                      {"log_marginal_likelihood", r.contains("log_marginal_likelihood") ? r["log_marginal_likelihood"] : json(nullptr)},
                      {"max_loglik", r.contains("max_loglik") ? r["max_loglik"] : json(nullptr)},
                      {"n_free", r.value("n_free", 0)},
                      {"aic", r.contains("aic") ? r["aic"] : json(nullptr)},
                      {"bic", r.contains("bic") ? r["bic"] : json(nullptr)}});
  }
  out["models"] = models;
  json pairs = json::array();
  for (std::size_t a = 0; a < reports.size(); ++a) {
    for (std::size_t b = a + 1; b < reports.size(); ++b) {
      const double la = json_number(models[a], "log_marginal_likelihood");
      const double lb = json_number(models[b], "log_marginal_likelihood");
      const double ma = json_number(models[a], "max_loglik");
      const double mb = json_number(models[b], "max_loglik");
      json pr = {{"a", a}, {"b", b}};
      pr["log_bayes_factor_b_over_a"] = std::isfinite(la) && std::isfinite(lb) ? json(bayes_factor(la, lb)) : json(nullptr);
      pr["max_loglik_improvement_b_over_a"] = std::isfinite(ma) && std::isfinite(mb) ? json(mb - ma) : json(nullptr);
      pairs.push_back(pr);
    }
  }
  out["pairs"] = pairs;
  for (const char* crit : {"aic", "bic"}) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < models.size(); ++i) {
      if (std::isfinite(json_number(models[i], crit))) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return json_number(models[x], crit) < json_number(models[y], crit);
    });
    out[std::string(crit) + "_rank"] = order;
  }
  return out;
}

json cmd_diagnose(const fs::path& run) {
  const fs::path path = fs::is_directory(run) ? run / "draws.csv" : run;
  const DrawsTable t = read_draws(path);
  std::vector<std::size_t> ids(t.chain.begin(), t.chain.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.size() < 2) throw UsageError("diagnostics need at least two chains in " + path.string());
  const std::size_t d = t.parameters.size();
  json out;
  out["chains"] = ids.size();
  json params = json::array();
  std::vector<std::vector<double>> joint(ids.size());
  double max_r = 0.0;
  for (std::size_t p = 0; p < d; ++p) {
    std::vector<std::vector<double>> per_chain;
    for (std::size_t c : ids) per_chain.push_back(t.series(c, p));
    const double r = psrf(per_chain);
    max_r = std::max(max_r, r);
    params.push_back({{"name", t.parameters[p]}, {"psrf", std::isfinite(r) ? json(r) : json(nullptr)}});
  }
  const std::size_t n = t.series(ids[0], 0).size();
  out["draws_per_chain"] = n;
  for (std::size_t ci = 0; ci < ids.size(); ++ci) {
    joint[ci].resize(n * d);
    for (std::size_t p = 0; p < d; ++p) {
      const auto s = t.series(ids[ci], p);
      for (std::size_t i = 0; i < n; ++i) joint[ci][i * d + p] = s[i];
    }
  }
  out["parameters"] = params;
  out["max_psrf"] = std::isfinite(max_r) ? json(max_r) : json(nullptr);
  try {
    out["mpsrf"] = mpsrf(joint, d);
  } catch (const NumericalError& e) {
    out["mpsrf"] = nullptr;
    out["mpsrf_error"] = e.what();
  }
  std::vector<std::vector<double>> ll;
  for (std::size_t c : ids) {
    std::vector<double> s;
    for (std::size_t i = 0; i < t.loglik.size(); ++i) {
      if (t.chain[i] == c) s.push_back(t.loglik[i]);
    }
    ll.push_back(std::move(s));
  }
  const double rll = psrf(ll);
  out["loglik_psrf"] = std::isfinite(rll) ? json(rll) : json(nullptr);
  return out;
}

json cmd_correlate(const fs::path& run, const fs::path& series) {
  const StateProbTable probs = read_state_probs(fs::is_directory(run) ? run / "state_probs.csv" : run);
  std::ifstream in(series);
  if (!in) throw DataError("cannot open series file " + series.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty series file " + series.string());
  const std::vector<std::string> header = detail::split_csv(line);
  std::vector<std::vector<double>> cols(header.size());
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_csv(line);
    if (f.size() != header.size()) {
      throw DataError("series row " + std::to_string(row) + " has " + std::to_string(f.size()) + " fields");
    }
    for (std::size_t c = 0; c < f.size(); ++c) {
      double v = 0.0;
      if (!detail::parse_double(f[c], v)) {
        throw DataError("non-numeric value in column '" + header[c] + "' at row " + std::to_string(row));
      }
      cols[c].push_back(v);
    }
  }
  const std::size_t T = probs.prob.size();
  json out;
  out["periods"] = T;
  json rows = json::array();
  const std::vector<double> w = state_weights(probs.sd);
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "period") continue;
    if (cols[c].size() != T) {
      throw DataError("series column '" + header[c] + "' has " + std::to_string(cols[c].size()) +
                      " values, expected " + std::to_string(T));
    }
    try {
      rows.push_back({{"name", header[c]},
                      {"weighted", weighted_correlation(probs.prob, cols[c], w)},
                      {"unweighted", pearson(probs.prob, cols[c])}});
    } catch (const DataError& e) {
      throw DataError("column '" + header[c] + "': " + e.what());
    }
  }
  out["columns"] = rows;
  return out;
}

json cmd_score(const fs::path& run, const fs::path& truth_path) {
  const json report = read_json(report_path(run));
  const json truth = read_json(truth_path);
  const std::string fp = report.value("dataset_fingerprint", "");
  if (truth.contains("dataset_fingerprint") && truth["dataset_fingerprint"] != fp) {
    throw DataError("fingerprint mismatch: report=" + fp + " vs truth=" + truth["dataset_fingerprint"].get<std::string>());
  }
  const TrueParams tp = true_params_from_json(truth.at("true_params"));
  const auto names = truth.at("covariate_names").get<std::vector<std::string>>();

  std::map<std::string, double> truth_by_name;
  for (std::size_t k = 0; k < names.size() && k < tp.beta0.size(); ++k) {
    truth_by_name["beta0." + names[k]] = tp.beta0[k];
    truth_by_name["beta1." + names[k]] = tp.beta1[k];
    truth_by_name["beta." + names[k]] = tp.beta0[k];
    truth_by_name[names[k]] = tp.beta0[k];
  }
  truth_by_name["alpha0"] = tp.alpha0;
  truth_by_name["alpha1"] = tp.alpha1;
  truth_by_name["alpha"] = tp.alpha0;
  truth_by_name["p01"] = tp.tp.p01;
  truth_by_name["p10"] = tp.tp.p10;

  json rows = json::array();
  std::size_t covered = 0, scored = 0;
  for (const json& p : report.at("parameters")) {
    const std::string name = p.at("name").get<std::string>();
    auto it = truth_by_name.find(name);
    if (it == truth_by_name.end()) continue;
    json iv;
    if (p.contains("intervals")) {
      const auto levels = report.at("levels").get<std::vector<double>>();
      for (std::size_t l = 0; l < levels.size(); ++l) {
        if (std::abs(levels[l] - 0.95) < 1e-12) iv = p["intervals"][l];
      }
    } else if (p.contains("ci95")) {
      iv = p["ci95"];
    }
    if (iv.is_null() || iv[0].is_null() || iv[1].is_null()) continue;
    const double lo = iv[0].get<double>(), hi = iv[1].get<double>();
    const bool in = lo <= it->second && it->second <= hi;
    ++scored;
    if (in) ++covered;
    rows.push_back({{"name", name}, {"truth", it->second}, {"lo", lo}, {"hi", hi}, {"covered", in}});
  }
  json out;
  out["parameters"] = rows;
  out["covered"] = covered;
  out["scored"] = scored;
  out["state_correlation"] = nullptr;
  const fs::path probs_path = fs::is_directory(run) ? run / "state_probs.csv" : run.parent_path() / "state_probs.csv";
  if (truth.contains("states") && fs::exists(probs_path)) {
    const StateProbTable probs = read_state_probs(probs_path);
    const std::string bits = truth["states"].get<std::string>();
    if (bits.size() == probs.prob.size()) {
      std::vector<double> s(bits.size());
      for (std::size_t t = 0; t < bits.size(); ++t) s[t] = bits[t] == '1' ? 1.0 : 0.0;
      try {
        out["state_correlation"] = pearson(probs.prob, s);
      } catch (const DataError&) {
        out["state_correlation"] = nullptr;
      }
    }
  }
  return out;
}

namespace {

std::string render_compare(const json& c) {
  std::ostringstream os;
  os << "dataset " << c["dataset_fingerprint"].get<std::string>() << "\n";
  os << std::left << std::setw(4) << "#" << std::setw(20) << "model" << std::setw(14) << "log ML" << std::setw(14)
     << "max LL" << std::setw(6) << "K" << std::setw(14) << "AIC" << "BIC\n";
  const auto& models = c["models"];
  auto num = [](const json& j, const char* k) { return fmt(json_number(j, k), 2); };
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto& m = models[i];
    os << std::setw(4) << i << std::setw(20) << m["model"].get<std::string>() << std::setw(14)
       << num(m, "log_marginal_likelihood") << std::setw(14) << num(m, "max_loglik") << std::setw(6)
       << m["n_free"].get<std::size_t>() << std::setw(14) << num(m, "aic") << num(m, "bic") << "\n";
  }
  os << "\npair     log BF (b over a)   max-LL improvement\n";
  for (const auto& p : c["pairs"]) {
    os << p["a"].get<std::size_t>() << " -> " << p["b"].get<std::size_t>() << "   " << std::setw(20)
       << num(p, "log_bayes_factor_b_over_a") << num(p, "max_loglik_improvement_b_over_a") << "\n";
  }
  for (const char* crit : {"aic_rank", "bic_rank"}) {
    os << crit << ":";
    for (const auto& i : c[crit]) os << ' ' << i.get<std::size_t>();
    os << "\n";
  }
  return os.str();
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Markov-switching negative binomial count panel models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version()));

  fs::path sim_config, sim_out;
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic panel from a JSON configuration");
  sim->add_option("--config", sim_config, "Generation config (JSON)")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", sim_out, "Output directory")->required();

  FitOptions fo;
  std::string covariates;
  std::vector<double> levels;
  bool no_gof = false;
  auto* fit = app.add_subcommand("fit", "Fit a model and write draws and reports");
  fit->set_config("--settings", "", "Settings file (TOML/INI) with flag names as keys; flags take precedence");
  fit->add_option("--data", fo.data, "Panel CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--model", fo.model,
                  "nb-mle | nb-mcmc | msnb-restricted | msnb-full | msp-restricted | msp-full")
      ->capture_default_str();
  fit->add_option("--out", fo.out, "Output directory")->required();
  fit->add_option("--coef-mask", fo.coef_mask, "Comma list free|shared|zero0|zero1|zero, intercept first");
  fit->add_option("--dispersion", fo.dispersion, "free | shared");
  fit->add_option("--period-column", fo.schema.period_column)->capture_default_str();
  fit->add_option("--segment-column", fo.schema.segment_column)->capture_default_str();
  fit->add_option("--count-column", fo.schema.count_column)->capture_default_str();
  fit->add_option("--covariates", covariates, "Comma list of covariate columns (default: all others)");
  fit->add_option("--chains", fo.chain.n_chains)->capture_default_str();
  fit->add_option("--iters", fo.chain.total_iters, "Total sweeps per chain")->capture_default_str();
  fit->add_option("--burn-in", fo.chain.burn_in)->capture_default_str();
  fit->add_option("--thin", fo.chain.thin)->capture_default_str();
  fit->add_option("--block-len", fo.chain.block_len)->capture_default_str();
  fit->add_option("--target-acceptance", fo.chain.target_acceptance)->capture_default_str();
  fit->add_option("--adapt-window", fo.chain.adapt_window)->capture_default_str();
  fit->add_option("--seed", fo.chain.seed)->capture_default_str();
  fit->add_option("--threads", fo.chain.threads, "0 = hardware concurrency")->capture_default_str();
  fit->add_option("--levels", levels, "Credible levels (default 0.95 0.85 0.60)");
  fit->add_option("--n-boot", fo.summary.n_boot)->capture_default_str();
  fit->add_option("--boot-frac", fo.summary.boot_frac)->capture_default_str();
  fit->add_option("--gof-draws", fo.summary.gof_draws)->capture_default_str();
  fit->add_flag("--no-gof", no_gof, "Skip the posterior-predictive check");

  std::vector<fs::path> cmp_paths;
  bool cmp_json = false;
  auto* cmp = app.add_subcommand("compare", "Compare fitted models on the same dataset");
  cmp->add_option("reports", cmp_paths, "Run directories or report.json files")->required()->expected(2, -1);
  cmp->add_flag("--json", cmp_json, "Print JSON instead of a table");

  fs::path diag_run;
  auto* diag = app.add_subcommand("diagnose", "PSRF and MPSRF from a run's draws");
  diag->add_option("run", diag_run, "Run directory or draws.csv")->required();

  fs::path cor_run, cor_series;
  auto* cor = app.add_subcommand("correlate", "Weighted correlation of state probabilities with external series");
  cor->add_option("run", cor_run, "Run directory or state_probs.csv")->required();
  cor->add_option("--series", cor_series, "CSV with one column per series")->required()->check(CLI::ExistingFile);

  fs::path score_run, score_truth;
  auto* score = app.add_subcommand("score", "Score a fit against the simulation truth");
  score->add_option("run", score_run, "Run directory or report.json")->required();
  score->add_option("--truth", score_truth, "truth.json from simulate")->required()->check(CLI::ExistingFile);

  auto fail = [&](const std::string& kind, int code, const std::string& msg) {
    err << "error kind=" << kind << " code=" << code << ": " << one_line(msg) << "\n";
    return code;
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    return fail("usage", UsageError("").exit_code(), e.what());
  }

  try {
    if (*sim) {
      cmd_simulate(sim_config, sim_out);
      out << "wrote " << (sim_out / "data.csv").string() << "\n";
    } else if (*fit) {
      if (!covariates.empty()) fo.schema.covariate_columns = detail::split_csv(covariates);
      if (!levels.empty()) fo.summary.levels = levels;
      fo.summary.compute_gof = !no_gof;
      const json report = cmd_fit(fo);
      std::ifstream txt(fo.out / "report.txt");
      out << txt.rdbuf();
    } else if (*cmp) {
      const json c = cmd_compare(cmp_paths);
      out << (cmp_json ? c.dump(2) + "\n" : render_compare(c));
    } else if (*diag) {
      out << cmd_diagnose(diag_run).dump(2) << "\n";
    } else if (*cor) {
      out << cmd_correlate(cor_run, cor_series).dump(2) << "\n";
    } else if (*score) {
      out << cmd_score(score_run, score_truth).dump(2) << "\n";
    }
  } catch (const Error& e) {
    return fail(e.kind(), e.exit_code(), e.what());
  } catch (const std::exception& e) {
    return fail("numerical", NumericalError("").exit_code(), e.what());
  }
  return 0;
}

}  // namespace msnb
