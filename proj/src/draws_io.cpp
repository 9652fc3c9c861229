#include "msnb/draws_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "msnb/error.hpp"
#include "text.hpp"

namespace msnb {

namespace {

constexpr const char* kDrawsMagic = "# msnb-draws v1";
constexpr const char* kStatesMagic = "# msnb-states v1";

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

double parse_field(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  double v = 0.0;
  if (!detail::parse_double(s, v)) {
    throw DataError("malformed value '" + s + "' in " + path.string() + " at line " + std::to_string(line));
  }
  return v;
}

}  // namespace

void write_draws(const PosteriorSample& sample, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << kDrawsMagic << '\n' << "chain,sweep";
  const std::vector<std::string> names = sample.parameter_names();
  for (const auto& n : names) out << ',' << n;
  out << ",loglik,logjoint\n";
  const std::size_t nc = sample.coords.size();
  for (const ChainSample& c : sample.chains) {
    for (std::size_t i = 0; i < c.draws(); ++i) {
      out << c.chain << ',' << c.sweeps[i];
      for (std::size_t j = 0; j < nc; ++j) out << ',' << format_double(c.values[i * nc + j]);
      if (sample.spec.switching) out << ',' << format_double(c.tp[i].p01) << ',' << format_double(c.tp[i].p10);
      out << ',' << format_double(c.loglik[i]) << ',' << format_double(c.log_joint[i]) << '\n';
    }
  }
  if (!out) throw DataError("write failed for " + path.string());
}

void write_states(const PosteriorSample& sample, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  const std::size_t T = sample.periods;
  out << kStatesMagic << '\n' << "# periods " << T << '\n';
  std::string bits(T, '0');
  for (const ChainSample& c : sample.chains) {
    for (std::size_t i = 0; i < c.draws(); ++i) {
      if (sample.spec.switching) {
        for (std::size_t t = 0; t < T; ++t) bits[t] = c.states[i * T + t] ? '1' : '0';
      }
      out << c.chain << ' ' << c.sweeps[i] << ' ' << bits << '\n';
    }
  }
  if (!out) throw DataError("write failed for " + path.string());
}

void write_state_probs(const StateProbSeries& series, const PanelDataset& data, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "period,prob,sd\n";
  for (std::size_t t = 0; t < series.prob.size(); ++t) {
    out << data.period_id(t) << ',' << format_double(series.prob[t]) << ',' << format_double(series.sd[t]) << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

std::size_t DrawsTable::n_chains() const { return std::set<std::size_t>(chain.begin(), chain.end()).size(); }

std::vector<double> DrawsTable::series(std::size_t c, std::size_t p) const {
  std::vector<double> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (chain[i] == c) out.push_back(values[i][p]);
  }
  return out;
}

DrawsTable read_draws(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open draws file " + path.string());
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kDrawsMagic) {
    throw DataError("draws file " + path.string() + " lacks the '" + kDrawsMagic + "' header");
  }
  if (!std::getline(in, line)) throw DataError("draws file " + path.string() + " has no column header");
  const std::vector<std::string> header = detail::split_csv(line);
  if (header.size() < 4 || header[0] != "chain" || header[1] != "sweep" || header[header.size() - 2] != "loglik" ||
      header.back() != "logjoint") {
    throw DataError("draws file " + path.string() + " has an unexpected column header");
  }
  DrawsTable t;
  t.parameters.assign(header.begin() + 2, header.end() - 2);
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const std::vector<std::string> f = detail::split_csv(line);
    if (f.size() != header.size()) {
      throw DataError("draws file " + path.string() + " line " + std::to_string(line_no) + " has " +
                      std::to_string(f.size()) + " fields, expected " + std::to_string(header.size()));
    }
    std::int64_t chain = 0, sweep = 0;
    if (!detail::parse_int(f[0], chain) || !detail::parse_int(f[1], sweep) || chain < 0 || sweep < 0) {
      throw DataError("draws file " + path.string() + " line " + std::to_string(line_no) + " has bad chain/sweep");
    }
    t.chain.push_back(static_cast<std::size_t>(chain));
    t.sweep.push_back(static_cast<std::size_t>(sweep));
    std::vector<double> row;
    for (std::size_t j = 2; j + 2 < f.size(); ++j) row.push_back(parse_field(f[j], path, line_no));
    t.values.push_back(std::move(row));
    t.loglik.push_back(parse_field(f[f.size() - 2], path, line_no));
    t.log_joint.push_back(parse_field(f.back(), path, line_no));
  }
  return t;
}

StateProbTable read_state_probs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open state probability file " + path.string());
  std::string line;
  if (!std::getline(in, line) || detail::split_csv(line) != std::vector<std::string>{"period", "prob", "sd"}) {
    throw DataError("state probability file " + path.string() + " must start with 'period,prob,sd'");
  }
  StateProbTable t;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_csv(line);
    std::int64_t period = 0;
    if (f.size() != 3 || !detail::parse_int(f[0], period)) {
      throw DataError("malformed line " + std::to_string(line_no) + " in " + path.string());
    }
    t.period.push_back(period);
    t.prob.push_back(parse_field(f[1], path, line_no));
    t.sd.push_back(parse_field(f[2], path, line_no));
  }
  return t;
}

}  // namespace msnb
