#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "msnb/error.hpp"
#include "msnb/inference.hpp"
#include "msnb/mle.hpp"
#include "msnb/priors.hpp"
#include "msnb/sampler.hpp"
#include "support.hpp"

using namespace msnb;

namespace {

// Sample whose chains carry only state rows and log-likelihoods.
PosteriorSample state_only_sample(const std::vector<std::vector<std::uint8_t>>& draws_per_chain, std::size_t T) {
  PosteriorSample s;
  s.spec = ModelSpec::full(Kernel::NegativeBinomial, 1);
  s.covariate_names = {"intercept"};
  s.periods = T;
  for (const auto& rows : draws_per_chain) {
    ChainSample c;
    c.states = rows;
    c.loglik.assign(rows.size() / T, 0.0);
    s.chains.push_back(c);
  }
  return s;
}

std::vector<std::vector<double>> iid_chains(std::size_t m, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::vector<std::vector<double>> c(m, std::vector<double>(n));
  for (auto& chain : c) {
    for (double& v : chain) v = z(rng);
  }
  return c;
}

PosteriorSample fit_single_state(const PanelDataset& data, Kernel kernel, std::uint64_t seed, std::size_t iters) {
  const ModelSpec spec = ModelSpec::standard(kernel, data.covariate_count());
  const MleResult mle = fit_mle(data, spec);
  ChainConfig cfg;
  cfg.n_chains = 2;
  cfg.total_iters = iters;
  cfg.burn_in = iters / 5;
  cfg.thin = 4;
  cfg.seed = seed;
  cfg.threads = 1;
  cfg.jump = jump_scales_from_mle(mle);
  return run_ensemble(data, spec, build_prior(mle, &spec), cfg);
}

}  // namespace

TEST_CASE("credible intervals") {
  std::vector<double> d(1000);
  std::iota(d.begin(), d.end(), 1.0);
  const Interval iv = credible_interval(d, 0.95);
  CHECK(iv.lo == doctest::Approx(25.975));
  CHECK(iv.hi == doctest::Approx(975.025));
  const std::vector<double> same(50, 3.25);
  for (double level : {0.60, 0.85, 0.95}) {
    const Interval c = credible_interval(same, level);
    CHECK(c.lo == 3.25);
    CHECK(c.hi == 3.25);
    const Interval w = credible_interval(d, level);
    CHECK(w.lo == doctest::Approx(1.0 + 999.0 * (1.0 - level) / 2.0));
  }
  CHECK(credible_interval(d, 0.60).hi < credible_interval(d, 0.85).hi);
  CHECK_THROWS_AS(credible_interval(std::vector<double>{1.0}, 0.95), UsageError);
  CHECK_THROWS_AS(credible_interval(d, 1.0), UsageError);
  std::vector<double> sorted{1.0, 2.0, 4.0};
  CHECK(sorted_quantile(sorted, 0.75) == doctest::Approx(3.0));
}

TEST_CASE("state probabilities") {
  SUBCASE("all ones") {
    const auto s = state_only_sample({{1, 1, 1}}, 1);
    const StateProbSeries p = state_probabilities(s);
    CHECK(p.prob[0] == 1.0);
    CHECK(p.sd[0] == 0.0);
  }
  SUBCASE("half and half") {
    const auto s = state_only_sample({{0, 1}, {1, 0}}, 1);
    const StateProbSeries p = state_probabilities(s);
    CHECK(p.prob[0] == 0.5);
    CHECK(p.sd[0] == 0.5);
  }
  SUBCASE("one third") {
    const auto s = state_only_sample({{0, 0, 1}}, 1);
    const StateProbSeries p = state_probabilities(s);
    CHECK(p.prob[0] == doctest::Approx(1.0 / 3.0));
    CHECK(p.sd[0] == doctest::Approx(std::sqrt(2.0) / 3.0));
  }
  SUBCASE("several periods") {
    const auto s = state_only_sample({{0, 1, 1, 1}}, 2);
    const StateProbSeries p = state_probabilities(s);
    CHECK(p.prob[0] == 0.5);
    CHECK(p.prob[1] == 1.0);
  }
}

TEST_CASE("harmonic-mean marginal likelihood") {
  const std::vector<double> flat(40, -12.5);
  CHECK(log_marginal_likelihood(flat) == doctest::Approx(-12.5));
  const std::vector<double> two{0.0, std::log(1.0 / 3.0)};
  CHECK(log_marginal_likelihood(two) == doctest::Approx(std::log(0.5)));
  // Large magnitudes do not overflow.
  const std::vector<double> big{-16000.0, -16001.0};
  CHECK(log_marginal_likelihood(big) == doctest::Approx(-16000.0 + std::log(2.0 / (1.0 + std::exp(1.0)))));
}

TEST_CASE("bootstrap interval of the marginal likelihood") {
  const std::vector<double> flat(1000, -7.0);
  const Interval c = bootstrap_lml_ci(flat, 1000, 0.01, 1);
  CHECK(c.lo == doctest::Approx(-7.0));
  CHECK(c.hi == doctest::Approx(-7.0));
  SummaryOptions defaults;
  CHECK(defaults.n_boot == 100000);
  CHECK(defaults.boot_frac == 0.01);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> z(-100.0, 1.0);
  double prev_width = INFINITY;
  for (std::size_t n : {2000, 20000, 200000}) {
    std::vector<double> ll(n);
    for (double& v : ll) v = z(rng);
    const Interval iv = bootstrap_lml_ci(ll, 2000, 0.01, 3);
    const double width = iv.hi - iv.lo;
    CHECK(width < prev_width);
    CHECK(iv.lo <= log_marginal_likelihood(ll) + 0.5);
    prev_width = width;
  }
  const std::vector<double> ll(500, 0.0);
  CHECK_THROWS_AS(bootstrap_lml_ci(ll, 10, 0.01, 1), UsageError);
}

TEST_CASE("Bayes factors and information criteria") {
  CHECK(bayes_factor(-16108.6, -15809.4) == doctest::Approx(299.2));
  CHECK(bayes_factor(-16108.6, -15850.2) == doctest::Approx(258.4));
  CHECK(bayes_factor(-3.0, -3.0) == 0.0);
  InformationCriteria ic = information_criteria(-50.0, 3, 100);
  CHECK(ic.aic == doctest::Approx(106.0));
  CHECK(ic.bic == doctest::Approx(113.816).epsilon(1e-5));
  ic = information_criteria(-16081.2, 26, 1000);
  CHECK(ic.aic == doctest::Approx(32214.4));
  for (std::size_t n : {8, 50, 10000}) {
    const InformationCriteria a = information_criteria(-10.0, 1, n);
    CHECK(a.bic - 20.0 > a.aic - 20.0);
  }
}

TEST_CASE("PSRF") {
  const auto iid = iid_chains(8, 10000, 11);
  const double r = psrf(iid);
  CHECK(r >= 0.999);
  CHECK(r <= 1.01);
  CHECK(psrf({std::vector<double>(20, 1.0), std::vector<double>(20, 2.0)}) == INFINITY);
  auto shifted = iid;
  for (std::size_t c = 0; c < 4; ++c) {
    for (double& v : shifted[c]) v += 1.0;
  }
  CHECK(psrf(shifted) > 1.1);
  CHECK_THROWS_AS(psrf({iid[0]}), UsageError);
}

TEST_CASE("MPSRF") {
  const std::size_t d = 3, n = 10000;
  std::mt19937_64 rng(12);
  std::normal_distribution<double> z;
  std::vector<std::vector<double>> chains(8, std::vector<double>(n * d));
  for (auto& c : chains) {
    for (std::size_t i = 0; i < n; ++i) {
      const double a = z(rng), b = z(rng), e = z(rng);
      c[i * d] = a;
      c[i * d + 1] = 0.6 * a + 0.8 * b;
      c[i * d + 2] = e * 3.0;
    }
  }
  const double r = mpsrf(chains, d);
  CHECK(r >= 0.999);
  CHECK(r <= 1.02);

  const auto one = iid_chains(4, 500, 13);
  CHECK(mpsrf(one, 1) == doctest::Approx(psrf(one)).epsilon(1e-12));

  auto shifted = chains;
  for (std::size_t c = 0; c < 4; ++c) {
    for (std::size_t i = 0; i < n; ++i) shifted[c][i * d + 2] += 3.0;
  }
  CHECK(mpsrf(shifted, d) > 1.1);
}

TEST_CASE("weighted correlation") {
  const std::vector<double> a{1.0, 2.0, 4.0, 3.0, 7.0};
  const std::vector<double> b{2.0, 1.0, 5.0, 2.0, 6.0};
  const std::vector<double> ones(5, 1.0);
  // Ordinary Pearson correlation computed directly.
  const double ma = 3.4, mb = 3.2;
  double sab = 0, saa = 0, sbb = 0;
  for (int i = 0; i < 5; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  CHECK(weighted_correlation(a, b, ones) == doctest::Approx(sab / std::sqrt(saa * sbb)));
  std::vector<double> affine(5);
  for (int i = 0; i < 5; ++i) affine[i] = 2.0 * a[i] + 3.0;
  CHECK(weighted_correlation(a, affine, ones) == doctest::Approx(1.0));

  // Weights (1, 2, 1) on x = (0, 1, 3), y = (1, 0, 4): means 1.25 and 1.25.
  const std::vector<double> x{0, 1, 3}, y{1, 0, 4}, w{1, 2, 1};
  const double cxy = (1 * (-1.25) * (-0.25) + 2 * (-0.25) * (-1.25) + 1 * (1.75) * (2.75)) / 4.0;
  const double cxx = (1 * 1.5625 + 2 * 0.0625 + 1 * 3.0625) / 4.0;
  const double cyy = (1 * 0.0625 + 2 * 1.5625 + 1 * 7.5625) / 4.0;
  CHECK(weighted_correlation(x, y, w) == doctest::Approx(cxy / std::sqrt(cxx * cyy)));
  CHECK_THROWS_AS(weighted_correlation(a, std::vector<double>(5, 1.0), ones), DataError);
}

TEST_CASE("state weights cap at the median") {
  const std::vector<double> sd{0.5, 0.25, 0.1, 0.0};
  const auto w = state_weights(sd);
  // 1/sd = (2, 4, 10, inf); median 7.
  CHECK(w[0] == doctest::Approx(2.0));
  CHECK(w[1] == doctest::Approx(4.0));
  CHECK(w[2] == doctest::Approx(7.0));
  CHECK(w[3] == doctest::Approx(7.0));
  const auto flat = state_weights(std::vector<double>{0.0, 0.0, 0.1});
  CHECK(flat[0] == flat[2]);
}

TEST_CASE("difference significance") {
  std::vector<double> a(1000), b(1000);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  for (std::size_t i = 0; i < 1000; ++i) {
    a[i] = z(rng);
    b[i] = a[i] + 2.0 + 0.1 * z(rng);
  }
  const DifferenceTest t = difference_significance(a, b);
  CHECK(t.significant);
  CHECK(t.mean == doctest::Approx(2.0).epsilon(0.02));
  const DifferenceTest none = difference_significance(a, a);
  CHECK_FALSE(none.significant);
}

TEST_CASE("posterior-predictive check is calibrated and has power") {
  int inside = 0;
  const int reps = 20;
  for (int r = 0; r < reps; ++r) {
    GenerationConfig cfg = test::single_state_config(100 + r, 40, 15);
    const auto sim = simulate_panel(cfg);
    const PosteriorSample s = fit_single_state(sim.data, Kernel::NegativeBinomial, 200 + r, 3000);
    Rng rng = make_rng(300 + r);
    const double p = gof_pvalue(s, sim.data, rng, 300);
    if (p > 0.05 && p < 0.95) ++inside;
  }
  CHECK(inside >= 18);

  GenerationConfig cfg = test::single_state_config(7, 40, 15);
  cfg.true_params.alpha0 = cfg.true_params.alpha1 = 2.0;
  const auto sim = simulate_panel(cfg);
  const PosteriorSample s = fit_single_state(sim.data, Kernel::Poisson, 8, 3000);
  Rng rng = make_rng(9);
  CHECK(gof_pvalue(s, sim.data, rng, 300) < 0.05);
}

TEST_CASE("summaries of a single-state run") {
  const auto sim = simulate_panel(test::single_state_config(21, 60, 20));
  const PosteriorSample s = fit_single_state(sim.data, Kernel::NegativeBinomial, 4, 3000);
  SummaryOptions opt;
  opt.n_boot = 500;
  opt.gof_draws = 100;
  const SummaryReport r = summarize(s, sim.data, "nb-mcmc", opt);
  CHECK(r.n_free == 4);
  CHECK(r.n_obs == 1200);
  REQUIRE(r.find("alpha") != nullptr);
  CHECK(r.find("alpha")->mean > 0.0);
  CHECK(r.find("p01") == nullptr);
  CHECK_FALSE(r.existence.applicable);
  CHECK(r.max_loglik >= r.loglik.mean);
  CHECK(r.lml <= r.loglik.mean);
  CHECK(r.ic.aic == doctest::Approx(8.0 - 2.0 * r.max_loglik));
  CHECK(r.psrf.size() == 4);
  CHECK(r.find("beta.x1")->intervals.size() == 3);
}

TEST_CASE("state existence flags") {
  auto s = state_only_sample({{0, 0, 0, 0, 0, 0}}, 2);
  s.spec = ModelSpec::full(Kernel::Poisson, 1);
  s.coords = sweep_coordinates(s.spec, {"intercept"});
  s.chains[0].values = {0.1, 0.1, 0.2, 0.25, -0.1, -0.05};
  s.chains[0].tp.assign(3, TransitionProbs{0.1, 0.5});
  const StateExistence e = state_existence(s);
  CHECK(e.applicable);
  CHECK(e.occupancy_collapse);
  CHECK(e.degenerate());
}
