#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "msnb/data.hpp"
#include "msnb/inference.hpp"
#include "msnb/sampler.hpp"

namespace msnb {

/// Software version recorded in manifests.
const char* version();

/// Model menu of the fit command: nb-mle, nb-mcmc, msnb-restricted,
/// msnb-full, msp-restricted, msp-full. `coef_mask` optionally overrides the
/// per-coefficient masks as a comma list of free|shared|zero0|zero1|zero
/// (intercept first); `dispersion` is "free" or "shared" (empty keeps the
/// model default). Throws UsageError.
ModelSpec model_spec_for(const std::string& model, std::size_t n_covariates, const std::string& coef_mask = "",
                         const std::string& dispersion = "");

struct FitOptions {
  std::filesystem::path data;
  PanelSchema schema;
  std::string model = "msnb-full";
  std::string coef_mask;
  std::string dispersion;
  ChainConfig chain;
  SummaryOptions summary;
  std::filesystem::path out;
};

/// Writes data.csv, truth.json and manifest.json into out_dir.
void cmd_simulate(const std::filesystem::path& config, const std::filesystem::path& out_dir);

/// Runs the requested fit and writes manifest.json, report.json, report.txt
/// and log.txt; MCMC models add draws.csv, states.txt and state_probs.csv.
/// Returns the report.
nlohmann::json cmd_fit(const FitOptions& options);

/// Pairwise log Bayes factors, AIC/BIC ranks and max-LL differences. Each
/// path is a run directory or a report.json. Throws DataError when the
/// dataset fingerprints differ.
nlohmann::json cmd_compare(const std::vector<std::filesystem::path>& reports);

/// PSRF per parameter and MPSRF recomputed from a run's draws file.
nlohmann::json cmd_diagnose(const std::filesystem::path& run);

/// Weighted correlations of P(s_t = 1 | Y) with every column of a CSV
/// series (a "period" column, if present, is skipped).
nlohmann::json cmd_correlate(const std::filesystem::path& run, const std::filesystem::path& series);

/// Coverage of the true parameters by the 95% intervals of a run and the
/// correlation of P(s_t = 1 | Y) with the true states.
nlohmann::json cmd_score(const std::filesystem::path& run, const std::filesystem::path& truth);

/// Parses arguments and dispatches. Errors print a single line
/// "error kind=<kind> code=<n>: <message>" to err and return the exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace msnb
