#include "msnb/data.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include "msnb/config.hpp"
#include "msnb/error.hpp"
#include "msnb/kernels.hpp"
#include "msnb/random.hpp"
#include "text.hpp"

namespace msnb {

using detail::parse_double;
using detail::parse_int;
using detail::split_csv;
using detail::trim;

// ---------------------------------------------------------------------------
// ModelSpec

ModelSpec ModelSpec::standard(Kernel kernel, std::size_t n_covariates) {
  ModelSpec spec;
  spec.kernel = kernel;
  spec.coef_mask.assign(n_covariates, CoefMask::SharedAcrossStates);
  spec.dispersion_mask = DispersionMask::SharedAcrossStates;
  spec.switching = false;
  return spec;
}

ModelSpec ModelSpec::restricted(Kernel kernel, std::size_t n_covariates) {
  ModelSpec spec;
  spec.kernel = kernel;
  spec.coef_mask.assign(n_covariates, CoefMask::SharedAcrossStates);
  if (n_covariates > 0) spec.coef_mask[0] = CoefMask::FreePerState;
  spec.dispersion_mask = DispersionMask::FreePerState;
  spec.switching = true;
  return spec;
}

ModelSpec ModelSpec::full(Kernel kernel, std::size_t n_covariates) {
  ModelSpec spec;
  spec.kernel = kernel;
  spec.coef_mask.assign(n_covariates, CoefMask::FreePerState);
  spec.dispersion_mask = DispersionMask::FreePerState;
  spec.switching = true;
  return spec;
}

void ModelSpec::validate(std::size_t n_covariates) const {
  if (coef_mask.size() != n_covariates) {
    throw UsageError("coefficient mask has " + std::to_string(coef_mask.size()) + " entries for " +
                     std::to_string(n_covariates) + " covariates");
  }
  if (n_covariates == 0) throw UsageError("model needs at least the intercept");
  if (coef_mask[0] == CoefMask::FixedZeroBoth) throw UsageError("the intercept may not be fixed at zero");
  if (!switching) {
    for (CoefMask m : coef_mask) {
      if (m != CoefMask::SharedAcrossStates && m != CoefMask::FixedZeroBoth) {
        throw UsageError("a single-state model only admits shared or zero coefficients");
      }
    }
  }
}

bool ModelSpec::coefficient_free_in(std::size_t k, int state) const {
  switch (coef_mask[k]) {
    case CoefMask::FreePerState: return true;
    case CoefMask::SharedAcrossStates: return true;
    case CoefMask::FixedZeroState0: return state == 1;
    case CoefMask::FixedZeroState1: return state == 0;
    case CoefMask::FixedZeroBoth: return false;
  }
  return false;
}

const char* to_string(Kernel kernel) {
  return kernel == Kernel::NegativeBinomial ? "nb" : "poisson";
}

const char* to_string(CoefMask mask) {
  switch (mask) {
    case CoefMask::FreePerState: return "free";
    case CoefMask::SharedAcrossStates: return "shared";
    case CoefMask::FixedZeroState0: return "zero0";
    case CoefMask::FixedZeroState1: return "zero1";
    case CoefMask::FixedZeroBoth: return "zero";
  }
  return "?";
}

Kernel parse_kernel(const std::string& text) {
  if (text == "nb" || text == "negative_binomial") return Kernel::NegativeBinomial;
  if (text == "poisson") return Kernel::Poisson;
  throw UsageError("unknown kernel '" + text + "' (expected nb or poisson)");
}

CoefMask parse_coef_mask(const std::string& text) {
  for (CoefMask m : {CoefMask::FreePerState, CoefMask::SharedAcrossStates, CoefMask::FixedZeroState0,
                     CoefMask::FixedZeroState1, CoefMask::FixedZeroBoth}) {
    if (text == to_string(m)) return m;
  }
  throw UsageError("unknown coefficient mask '" + text + "' (expected free, shared, zero0, zero1, zero)");
}

// ---------------------------------------------------------------------------
// PanelDataset

PanelDataset::PanelDataset(std::vector<std::size_t> segments_per_period,
                           std::vector<std::int64_t> counts, std::vector<double> covariates,
                           std::vector<std::string> covariate_names,
                           std::vector<std::int64_t> period_ids,
                           std::vector<std::int64_t> segment_ids)
    : segments_per_period_(std::move(segments_per_period)),
      counts_(std::move(counts)),
      covariates_(std::move(covariates)),
      covariate_names_(std::move(covariate_names)),
      period_ids_(std::move(period_ids)),
      segment_ids_(std::move(segment_ids)) {
  if (segments_per_period_.empty()) throw DataError("dataset has no periods");
  offsets_.assign(1, 0);
  for (std::size_t n : segments_per_period_) {
    if (n == 0) throw DataError("every period needs at least one segment");
    offsets_.push_back(offsets_.back() + n);
  }
  if (offsets_.back() != counts_.size()) {
    throw DataError("segment counts do not add up to the number of observations");
  }
  const std::size_t K = covariate_names_.size();
  if (K == 0) throw DataError("dataset needs at least the intercept column");
  if (covariates_.size() != K * counts_.size()) {
    throw DataError("covariate matrix does not match observations x covariates");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (counts_[i] < 0) throw DataError("negative count at observation " + std::to_string(i + 1));
    if (covariates_[i * K] != 1.0) {
      throw DataError("first covariate must be the intercept (1) at observation " + std::to_string(i + 1));
    }
    for (std::size_t k = 0; k < K; ++k) {
      if (!std::isfinite(covariates_[i * K + k])) {
        throw DataError("non-finite covariate '" + covariate_names_[k] + "' at observation " +
                        std::to_string(i + 1));
      }
    }
  }
  if (period_ids_.empty()) {
    period_ids_.resize(periods());
    std::iota(period_ids_.begin(), period_ids_.end(), 1);
  }
  if (segment_ids_.empty()) {
    segment_ids_.resize(counts_.size());
    for (std::size_t t = 0; t < periods(); ++t) {
      for (std::size_t i = offsets_[t]; i < offsets_[t + 1]; ++i) {
        segment_ids_[i] = static_cast<std::int64_t>(i - offsets_[t] + 1);
      }
    }
  }
  if (period_ids_.size() != periods() || segment_ids_.size() != counts_.size()) {
    throw DataError("id vectors do not match the panel shape");
  }
}

// ---------------------------------------------------------------------------
// CSV

namespace {

// Data rows are numbered from 1 after the header; lines count the header.
std::string row_ref(std::size_t row) { return "row " + std::to_string(row) + " (line " + std::to_string(row + 1) + ")"; }

struct Record {
  std::int64_t period;
  std::int64_t segment;
  std::int64_t count;
  std::vector<double> x;
  std::size_t row;
};

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

PanelDataset load_panel(const std::filesystem::path& path, const PanelSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open panel file " + path.string());
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw DataError("empty file " + path.string());
  const std::vector<std::string> header = split_csv(line);

  auto column_of = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("missing column '" + name + "' in " + path.string());
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t period_col = column_of(schema.period_column);
  const std::size_t segment_col = column_of(schema.segment_column);
  const std::size_t count_col = column_of(schema.count_column);

  std::vector<std::string> cov_names = schema.covariate_columns;
  if (cov_names.empty()) {
    for (const auto& h : header) {
      if (h != schema.period_column && h != schema.segment_column && h != schema.count_column) {
        cov_names.push_back(h);
      }
    }
  }
  std::vector<std::size_t> cov_cols;
  for (const auto& name : cov_names) {
    if (name == "intercept") throw DataError("column name 'intercept' is reserved");
    cov_cols.push_back(column_of(name));
  }

  std::vector<Record> records;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != header.size()) {
      throw DataError(row_ref(row) + ": expected " + std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    }
    Record rec{};
    rec.row = row;
    if (!parse_int(fields[period_col], rec.period) || rec.period < 1) {
      throw DataError("invalid period at " + row_ref(row) + " (integer >= 1 required)");
    }
    if (!parse_int(fields[segment_col], rec.segment) || rec.segment < 1) {
      throw DataError("invalid segment at " + row_ref(row) + " (integer >= 1 required)");
    }
    const std::string& count_text = fields[count_col];
    if (count_text.empty()) throw DataError("missing count at " + row_ref(row));
    if (!parse_int(count_text, rec.count)) {
      throw DataError("non-integer count '" + count_text + "' at " + row_ref(row));
    }
    if (rec.count < 0) throw DataError("negative count at " + row_ref(row));
    rec.x.reserve(cov_cols.size() + 1);
    rec.x.push_back(1.0);
    for (std::size_t c = 0; c < cov_cols.size(); ++c) {
      const std::string& cell = fields[cov_cols[c]];
      if (cell.empty()) {
        throw DataError("missing value in column '" + cov_names[c] + "' at " + row_ref(row));
      }
      double v = 0.0;
      if (!parse_double(cell, v) || !std::isfinite(v)) {
        throw DataError("invalid number '" + cell + "' in column '" + cov_names[c] + "' at " + row_ref(row));
      }
      rec.x.push_back(v);
    }
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw DataError("empty file " + path.string() + " (no data rows)");

  std::stable_sort(records.begin(), records.end(), [](const Record& a, const Record& b) {
    return std::tie(a.period, a.segment) < std::tie(b.period, b.segment);
  });

  std::vector<std::size_t> segments_per_period;
  std::vector<std::int64_t> period_ids;
  std::vector<std::int64_t> segment_ids;
  std::vector<std::int64_t> counts;
  std::vector<double> covariates;
  covariates.reserve(records.size() * (cov_cols.size() + 1));
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Record& r = records[i];
    if (i > 0 && r.period == records[i - 1].period && r.segment == records[i - 1].segment) {
      throw DataError("duplicate (period, segment) = (" + std::to_string(r.period) + ", " +
                      std::to_string(r.segment) + ") at " + row_ref(r.row));
    }
    if (period_ids.empty() || period_ids.back() != r.period) {
      period_ids.push_back(r.period);
      segments_per_period.push_back(0);
    }
    ++segments_per_period.back();
    segment_ids.push_back(r.segment);
    counts.push_back(r.count);
    covariates.insert(covariates.end(), r.x.begin(), r.x.end());
  }

  std::vector<std::string> names{"intercept"};
  names.insert(names.end(), cov_names.begin(), cov_names.end());
  return PanelDataset(std::move(segments_per_period), std::move(counts), std::move(covariates),
                      std::move(names), std::move(period_ids), std::move(segment_ids));
}

void write_panel(const PanelDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write panel file " + path.string());
  out << "period,segment,count";
  const auto& names = data.covariate_names();
  for (std::size_t k = 1; k < names.size(); ++k) out << ',' << names[k];
  out << '\n';
  for (std::size_t t = 0; t < data.periods(); ++t) {
    for (std::size_t i = data.period_begin(t); i < data.period_end(t); ++i) {
      out << data.period_id(t) << ',' << data.segment_id(i) << ',' << data.count(i);
      const auto x = data.covariates(i);
      for (std::size_t k = 1; k < x.size(); ++k) out << ',' << format_double(x[k]);
      out << '\n';
    }
  }
  if (!out) throw DataError("failed writing " + path.string());
}

std::string fingerprint(const PanelDataset& data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  };
  mix(data.periods());
  for (std::size_t n : data.segments_per_period()) mix(n);
  for (std::size_t t = 0; t < data.periods(); ++t) mix(static_cast<std::uint64_t>(data.period_id(t)));
  for (std::size_t i = 0; i < data.observations(); ++i) {
    mix(static_cast<std::uint64_t>(data.segment_id(i)));
    mix(static_cast<std::uint64_t>(data.count(i)));
  }
  for (double v : data.covariate_matrix()) mix(std::bit_cast<std::uint64_t>(v));
  for (const auto& name : data.covariate_names()) {
    for (char c : name) mix(static_cast<unsigned char>(c));
    mix(0xff);
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Simulation

void GenerationConfig::validate() const {
  if (periods == 0) throw UsageError("periods must be >= 1");
  if (segments_per_period.size() != 1 && segments_per_period.size() != periods) {
    throw UsageError("segments_per_period must hold one value or one per period");
  }
  for (std::size_t n : segments_per_period) {
    if (n == 0) throw UsageError("segments_per_period entries must be >= 1");
  }
  const std::size_t K = covariates.size() + 1;
  if (true_params.beta0.size() != K || true_params.beta1.size() != K) {
    throw UsageError("true_params.beta0/beta1 need " + std::to_string(K) +
                     " entries (intercept plus covariates)");
  }
  for (double b : true_params.beta0) if (!std::isfinite(b)) throw UsageError("true_params.beta0 must be finite");
  for (double b : true_params.beta1) if (!std::isfinite(b)) throw UsageError("true_params.beta1 must be finite");
  if (kernel == Kernel::NegativeBinomial) {
    for (double a : {true_params.alpha0, true_params.alpha1}) {
      if (!std::isfinite(a) || a < 0.0) throw DataError("true_params.alpha0/alpha1 must be >= 0");
    }
  }
  validate_probabilities(true_params.tp);
  if (!enforce_identification(true_params.tp)) {
    throw DataError("true_params must satisfy p01 <= p10 (state 0 at least as frequent as state 1)");
  }
  if (true_params.tp.p01 + true_params.tp.p10 <= 0.0) {
    throw DataError("true_params: p01 + p10 must be positive for a stationary start");
  }
  for (const auto& c : covariates) {
    if (c.name.empty() || c.name == "intercept") throw UsageError("covariate names must be non-empty and not 'intercept'");
    switch (c.distribution) {
      case CovariateSpec::Distribution::Constant:
        if (!std::isfinite(c.value)) throw UsageError("covariate '" + c.name + "': value must be finite");
        break;
      case CovariateSpec::Distribution::Uniform:
        if (!std::isfinite(c.low) || !std::isfinite(c.high) || c.low > c.high) {
          throw UsageError("covariate '" + c.name + "': uniform range must be finite with low <= high");
        }
        break;
      case CovariateSpec::Distribution::Bernoulli:
        if (!(c.probability >= 0.0 && c.probability <= 1.0)) {
          throw UsageError("covariate '" + c.name + "': probability must be in [0,1]");
        }
        break;
    }
  }
}

namespace {

double draw_covariate(const CovariateSpec& c, Rng& rng) {
  switch (c.distribution) {
    case CovariateSpec::Distribution::Constant: return c.value;
    case CovariateSpec::Distribution::Uniform: return c.low + (c.high - c.low) * uniform01(rng);
    case CovariateSpec::Distribution::Bernoulli: return uniform01(rng) < c.probability ? 1.0 : 0.0;
  }
  return 0.0;
}

}  // namespace

SimulatedPanel simulate_panel(const GenerationConfig& cfg) {
  cfg.validate();
  Rng rng = make_rng(cfg.seed);
  const std::size_t T = cfg.periods;
  std::vector<std::size_t> seg(T, cfg.segments_per_period.front());
  if (cfg.segments_per_period.size() == T) seg = cfg.segments_per_period;
  const std::size_t max_seg = *std::max_element(seg.begin(), seg.end());
  const std::size_t K = cfg.covariates.size() + 1;

  // Segment-level covariates: one draw per segment, shared by all periods.
  std::vector<std::vector<double>> segment_values(cfg.covariates.size());
  for (std::size_t c = 0; c < cfg.covariates.size(); ++c) {
    if (cfg.covariates[c].level != CovariateSpec::Level::Segment) continue;
    segment_values[c].resize(max_seg);
    for (auto& v : segment_values[c]) v = draw_covariate(cfg.covariates[c], rng);
  }

  const TransitionProbs tp = cfg.true_params.tp;
  StateSequence states(T);
  states[0] = uniform01(rng) < stationary(tp).p1 ? 1 : 0;
  for (std::size_t t = 1; t < T; ++t) {
    const double u = uniform01(rng);
    states[t] = states[t - 1] == 0 ? (u < tp.p01 ? 1 : 0) : (u < tp.p10 ? 0 : 1);
  }

  std::vector<std::int64_t> counts;
  std::vector<double> covariates;
  std::vector<double> x(K);
  x[0] = 1.0;
  for (std::size_t t = 0; t < T; ++t) {
    const auto& beta = states[t] == 0 ? cfg.true_params.beta0 : cfg.true_params.beta1;
    const double alpha = states[t] == 0 ? cfg.true_params.alpha0 : cfg.true_params.alpha1;
    for (std::size_t n = 0; n < seg[t]; ++n) {
      for (std::size_t c = 0; c < cfg.covariates.size(); ++c) {
        x[c + 1] = cfg.covariates[c].level == CovariateSpec::Level::Segment
                       ? segment_values[c][n]
                       : draw_covariate(cfg.covariates[c], rng);
      }
      const double lambda = rate(beta, x);
      counts.push_back(sample_count(cfg.kernel, lambda, alpha, rng));
      covariates.insert(covariates.end(), x.begin(), x.end());
    }
  }

  std::vector<std::string> names{"intercept"};
  for (const auto& c : cfg.covariates) names.push_back(c.name);
  return {PanelDataset(std::move(seg), std::move(counts), std::move(covariates), std::move(names)),
          std::move(states)};
}

// ---------------------------------------------------------------------------
// JSON configuration

namespace {

const nlohmann::json& require_key(const nlohmann::json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw UsageError("missing config key '" + where + key + "'");
  return j.at(key);
}

template <typename T>
T get_as(const nlohmann::json& j, const std::string& key, const std::string& where) {
  const auto& v = require_key(j, key, where);
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw UsageError("config key '" + where + key + "' has the wrong type");
  }
}

}  // namespace

nlohmann::json to_json(const TrueParams& p) {
  return {{"beta0", p.beta0}, {"beta1", p.beta1}, {"alpha0", p.alpha0},
          {"alpha1", p.alpha1}, {"p01", p.tp.p01}, {"p10", p.tp.p10}};
}

TrueParams true_params_from_json(const nlohmann::json& j) {
  const std::string where = "true_params.";
  TrueParams p;
  p.beta0 = get_as<std::vector<double>>(j, "beta0", where);
  p.beta1 = get_as<std::vector<double>>(j, "beta1", where);
  p.alpha0 = j.contains("alpha0") ? get_as<double>(j, "alpha0", where) : 0.0;
  p.alpha1 = j.contains("alpha1") ? get_as<double>(j, "alpha1", where) : 0.0;
  p.tp.p01 = get_as<double>(j, "p01", where);
  p.tp.p10 = get_as<double>(j, "p10", where);
  return p;
}

GenerationConfig generation_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw UsageError("generation config must be a JSON object");
  GenerationConfig cfg;
  cfg.kernel = parse_kernel(get_as<std::string>(j, "kernel", ""));
  cfg.seed = get_as<std::uint64_t>(j, "seed", "");
  cfg.periods = get_as<std::size_t>(j, "periods", "");
  const auto& seg = require_key(j, "segments_per_period", "");
  if (seg.is_array()) {
    cfg.segments_per_period = get_as<std::vector<std::size_t>>(j, "segments_per_period", "");
  } else {
    cfg.segments_per_period = {get_as<std::size_t>(j, "segments_per_period", "")};
  }
  cfg.true_params = true_params_from_json(require_key(j, "true_params", ""));
  if (j.contains("covariates")) {
    const auto& arr = j.at("covariates");
    if (!arr.is_array()) throw UsageError("config key 'covariates' must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string where = "covariates[" + std::to_string(i) + "].";
      const auto& c = arr[i];
      CovariateSpec spec;
      spec.name = get_as<std::string>(c, "name", where);
      const auto dist = get_as<std::string>(c, "distribution", where);
      if (dist == "constant") {
        spec.distribution = CovariateSpec::Distribution::Constant;
        spec.value = get_as<double>(c, "value", where);
      } else if (dist == "uniform") {
        spec.distribution = CovariateSpec::Distribution::Uniform;
        spec.low = get_as<double>(c, "low", where);
        spec.high = get_as<double>(c, "high", where);
      } else if (dist == "bernoulli") {
        spec.distribution = CovariateSpec::Distribution::Bernoulli;
        spec.probability = get_as<double>(c, "probability", where);
      } else {
        throw UsageError("config key '" + where + "distribution' must be constant, uniform or bernoulli");
      }
      const std::string level = c.contains("level") ? get_as<std::string>(c, "level", where) : "segment";
      if (level == "segment") {
        spec.level = CovariateSpec::Level::Segment;
      } else if (level == "observation") {
        spec.level = CovariateSpec::Level::Observation;
      } else {
        throw UsageError("config key '" + where + "level' must be segment or observation");
      }
      cfg.covariates.push_back(spec);
    }
  }
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const GenerationConfig& cfg) {
  nlohmann::json covs = nlohmann::json::array();
  for (const auto& c : cfg.covariates) {
    nlohmann::json e{{"name", c.name},
                     {"level", c.level == CovariateSpec::Level::Segment ? "segment" : "observation"}};
    switch (c.distribution) {
      case CovariateSpec::Distribution::Constant:
        e["distribution"] = "constant";
        e["value"] = c.value;
        break;
      case CovariateSpec::Distribution::Uniform:
        e["distribution"] = "uniform";
        e["low"] = c.low;
        e["high"] = c.high;
        break;
      case CovariateSpec::Distribution::Bernoulli:
        e["distribution"] = "bernoulli";
        e["probability"] = c.probability;
        break;
    }
    covs.push_back(e);
  }
  nlohmann::json seg = cfg.segments_per_period.size() == 1 ? nlohmann::json(cfg.segments_per_period[0])
                                                           : nlohmann::json(cfg.segments_per_period);
  return {{"kernel", to_string(cfg.kernel)}, {"seed", cfg.seed},
          {"periods", cfg.periods},          {"segments_per_period", seg},
          {"true_params", to_json(cfg.true_params)}, {"covariates", covs}};
}

GenerationConfig load_generation_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return generation_config_from_json(j);
}

}  // namespace msnb
