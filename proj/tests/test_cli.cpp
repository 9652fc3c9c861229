#include <doctest.h>

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "msnb/cli.hpp"
#include "msnb/config.hpp"
#include "support.hpp"

using namespace msnb;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "msnb");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

json read_json_file(const fs::path& p) { return json::parse(test::read_text(p)); }

// Simulated panel with truth.json, shared by the cases below.
const fs::path& simulated_run() {
  static const fs::path dir = [] {
    const fs::path d = test::scratch_dir("cli_sim");
    test::write_text(d / "config.json", to_json(test::two_state_config(77, 60, 20)).dump(2));
    const CliResult r = cli({"simulate", "--config", (d / "config.json").string(), "--out", (d / "sim").string()});
    REQUIRE(r.code == 0);
    return d;
  }();
  return dir;
}

std::vector<std::string> fit_args(const std::string& model, const fs::path& out) {
  return {"fit",     "--data",   (simulated_run() / "sim" / "data.csv").string(),
          "--model", model,      "--out",
          out.string(), "--chains", "2",
          "--iters", "1500",     "--burn-in",
          "400",     "--thin",   "2",
          "--seed",  "5",        "--n-boot",
          "200",     "--gof-draws", "50"};
}

}  // namespace

TEST_CASE("simulate writes data, truth and manifest") {
  const fs::path sim = simulated_run() / "sim";
  CHECK(fs::exists(sim / "data.csv"));
  const json truth = read_json_file(sim / "truth.json");
  CHECK(truth["states"].get<std::string>().size() == 60);
  CHECK(truth["covariate_names"].size() == 3);
  const json manifest = read_json_file(sim / "manifest.json");
  CHECK(manifest["command"] == "simulate");
  CHECK(manifest["seed"] == 77);
  CHECK(manifest["dataset_fingerprint"] == truth["dataset_fingerprint"]);
}

TEST_CASE("fit, compare, diagnose, correlate and score") {
  const fs::path root = test::scratch_dir("cli_fit");
  const CliResult mle = cli({"fit", "--data", (simulated_run() / "sim" / "data.csv").string(), "--model", "nb-mle",
                             "--out", (root / "mle").string()});
  REQUIRE(mle.code == 0);
  CHECK(fs::exists(root / "mle" / "report.json"));
  CHECK_FALSE(fs::exists(root / "mle" / "draws.csv"));

  const CliResult nb = cli(fit_args("nb-mcmc", root / "nb"));
  REQUIRE(nb.code == 0);
  const CliResult ms = cli(fit_args("msnb-full", root / "ms"));
  REQUIRE(ms.code == 0);
  for (const char* f : {"manifest.json", "report.json", "report.txt", "log.txt", "draws.csv", "states.txt",
                        "state_probs.csv"}) {
    CHECK(fs::exists(root / "ms" / f));
  }
  const json report = read_json_file(root / "ms" / "report.json");
  CHECK(report["n_free"] == 8);
  CHECK(read_json_file(root / "ms" / "manifest.json")["seed"] == 5);

  SUBCASE("compare") {
    const CliResult same = cli({"compare", (root / "ms").string(), (root / "ms").string(), "--json"});
    REQUIRE(same.code == 0);
    const json c = json::parse(same.out);
    CHECK(c["pairs"][0]["log_bayes_factor_b_over_a"].get<double>() == 0.0);

    const CliResult three =
        cli({"compare", (root / "mle").string(), (root / "nb").string(), (root / "ms").string(), "--json"});
    REQUIRE(three.code == 0);
    const json t = json::parse(three.out);
    CHECK(t["pairs"].size() == 3);
    CHECK(t["models"][0]["log_marginal_likelihood"].is_null());
    CHECK(t["pairs"][2]["log_bayes_factor_b_over_a"].get<double>() > 0.0);
    CHECK(t["aic_rank"][0] == 2);

    const CliResult table = cli({"compare", (root / "nb").string(), (root / "ms").string()});
    CHECK(table.code == 0);
    CHECK(table.out.find("aic_rank") != std::string::npos);
  }

  SUBCASE("fingerprint mismatch names both hashes") {
    const fs::path other = root / "other";
    fs::create_directories(other);
    json r = report;
    r["dataset_fingerprint"] = "00000000deadbeef";
    test::write_text(other / "report.json", r.dump());
    const CliResult bad = cli({"compare", (root / "ms").string(), other.string()});
    CHECK(bad.code == 3);
    CHECK(bad.err.rfind("error kind=data_validation code=3: ", 0) == 0);
    CHECK(bad.err.find(report["dataset_fingerprint"].get<std::string>()) != std::string::npos);
    CHECK(bad.err.find("00000000deadbeef") != std::string::npos);
  }

  SUBCASE("diagnose") {
    const CliResult d = cli({"diagnose", (root / "ms").string()});
    REQUIRE(d.code == 0);
    const json j = json::parse(d.out);
    CHECK(j["chains"] == 2);
    CHECK(j["parameters"].size() == 10);
    CHECK(j["mpsrf"].get<double>() >= 1.0 - 1e-9);
  }

  SUBCASE("correlate") {
    std::istringstream probs(test::read_text(root / "ms" / "state_probs.csv"));
    std::string line, series = "period,self,flipped,flat\n";
    std::getline(probs, line);
    while (std::getline(probs, line)) {
      const auto a = line.find(','), b = line.find(',', a + 1);
      const std::string p = line.substr(a + 1, b - a - 1);
      series += line.substr(0, a) + "," + p + ",-" + p + ",1\n";
    }
    test::write_text(root / "series.csv", series);
    CliResult c = cli({"correlate", (root / "ms").string(), "--series", (root / "series.csv").string()});
    CHECK(c.code == 3);
    CHECK(c.err.find("'flat'") != std::string::npos);

    // Same series without the constant column.
    std::istringstream in(series);
    std::string cut;
    while (std::getline(in, line)) cut += line.substr(0, line.rfind(',')) + "\n";
    test::write_text(root / "series2.csv", cut);
    c = cli({"correlate", (root / "ms").string(), "--series", (root / "series2.csv").string()});
    REQUIRE(c.code == 0);
    const json j = json::parse(c.out);
    CHECK(j["columns"][0]["name"] == "self");
    CHECK(j["columns"][0]["weighted"].get<double>() == doctest::Approx(1.0));
    CHECK(j["columns"][1]["unweighted"].get<double>() == doctest::Approx(-1.0));
  }

  SUBCASE("score") {
    const CliResult s = cli({"score", (root / "ms").string(), "--truth", (simulated_run() / "sim" / "truth.json").string()});
    REQUIRE(s.code == 0);
    const json j = json::parse(s.out);
    CHECK(j["scored"] == 10);
    CHECK(j["state_correlation"].get<double>() > 0.8);
  }
}

TEST_CASE("fits are reproducible from the seed") {
  const fs::path root = test::scratch_dir("cli_repro");
  REQUIRE(cli(fit_args("msnb-restricted", root / "a")).code == 0);
  REQUIRE(cli(fit_args("msnb-restricted", root / "b")).code == 0);
  CHECK(test::read_text(root / "a" / "draws.csv") == test::read_text(root / "b" / "draws.csv"));
  CHECK(test::read_text(root / "a" / "states.txt") == test::read_text(root / "b" / "states.txt"));
}

TEST_CASE("errors print one line with kind and exit code") {
  const fs::path root = test::scratch_dir("cli_errors");
  CliResult r = cli({"fit", "--data", (simulated_run() / "sim" / "data.csv").string(), "--out", (root / "x").string(),
                     "--model", "msnb-huge"});
  CHECK(r.code == 2);
  CHECK(r.err.rfind("error kind=usage code=2: ", 0) == 0);
  CHECK(r.err.find("msnb-huge") != std::string::npos);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);

  r = cli({"frobnicate"});
  CHECK(r.code == 2);

  r = cli({"fit", "--data", (simulated_run() / "sim" / "data.csv").string(), "--out", (root / "y").string(),
           "--coef-mask", "free,free"});
  CHECK(r.code == 2);
  CHECK(r.err.find("--coef-mask") != std::string::npos);

  test::write_text(root / "neg.csv", "period,segment,count\n1,1,3\n1,2,-4\n");
  r = cli({"fit", "--data", (root / "neg.csv").string(), "--out", (root / "z").string(), "--model", "nb-mle"});
  CHECK(r.code == 3);
  CHECK(r.err.rfind("error kind=data_validation code=3: ", 0) == 0);
  CHECK(r.err.find("row 2") != std::string::npos);

  json cfg = to_json(test::two_state_config(1, 10, 3));
  cfg.erase("seed");
  test::write_text(root / "noseed.json", cfg.dump());
  r = cli({"simulate", "--config", (root / "noseed.json").string(), "--out", (root / "s").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("seed") != std::string::npos);

  CHECK(cli({"--version"}).code == 0);
}
