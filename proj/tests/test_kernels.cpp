#include <doctest.h>

#include <cmath>
#include <random>

#include "likelihood_cache.hpp"
#include "msnb/error.hpp"
#include "msnb/kernels.hpp"
#include "support.hpp"

using namespace msnb;

namespace {

// Direct NB mass: Gamma(a + 1/alpha) / (Gamma(1/alpha) a!) p^(1/alpha) (1 - p)^a, p = 1 / (1 + alpha lambda).
double nb_oracle(std::int64_t a, double lambda, double alpha) {
  const double r = 1.0 / alpha;
  const double p = 1.0 / (1.0 + alpha * lambda);
  const double x = static_cast<double>(a);
  return std::lgamma(x + r) - std::lgamma(r) - std::lgamma(x + 1.0) + r * std::log(p) + x * std::log1p(-p);
}

}  // namespace

TEST_CASE("rate") {
  const std::vector<double> x3{1.0, 2.0, -1.0};
  CHECK(rate(std::vector<double>{0.0, 0.0, 0.0}, x3) == 1.0);
  CHECK(rate(std::vector<double>{std::log(2.0), 0.0, 0.0}, x3) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(rate(std::vector<double>{1.0, 0.5}, std::vector<double>{1.0, 2.0}) ==
        doctest::Approx(7.38905609893065).epsilon(1e-14));
  CHECK_THROWS_AS(rate(std::vector<double>{800.0}, std::vector<double>{1.0}), NumericalError);
  CHECK_THROWS_AS(rate(std::vector<double>{1.0}, x3), UsageError);
}

TEST_CASE("negative binomial log mass") {
  CHECK(log_pmf_nb(0, 1.0, 1.0) == doctest::Approx(std::log(0.5)).epsilon(1e-14));
  CHECK(log_pmf_nb(2, 1.0, 0.5) == doctest::Approx(std::log(4.0 / 27.0)).epsilon(1e-13));
  CHECK(std::log(4.0 / 27.0) == doctest::Approx(-1.90954).epsilon(1e-5));
  CHECK(std::abs(log_pmf_nb(0, 2.0, 1e-8) - (-2.0)) < 1e-6);
  CHECK_THROWS(log_pmf_nb(-1, 1.0, 1.0));

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> lam(0.01, 50.0), alp(0.01, 3.0);
  for (int i = 0; i < 50; ++i) {
    const double l = lam(rng), a = alp(rng);
    for (std::int64_t k : {0, 1, 5, 37, 400}) CHECK(log_pmf_nb(k, l, a) == doctest::Approx(nb_oracle(k, l, a)).epsilon(1e-10));
  }
}

TEST_CASE("poisson log mass") {
  CHECK(log_pmf_poisson(0, 1.0) == doctest::Approx(-1.0));
  CHECK(log_pmf_poisson(1, 1.0) == doctest::Approx(-1.0));
  CHECK(log_pmf_poisson(3, 2.0) == doctest::Approx(std::log(8.0 * std::exp(-2.0) / 6.0)).epsilon(1e-14));
  CHECK(log_pmf_poisson(3, 2.0) == doctest::Approx(-1.71232).epsilon(1e-5));
  CHECK_THROWS_AS(log_pmf_poisson(1, 0.0), UsageError);
}

TEST_CASE("NB mass sums to one and approaches Poisson") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> lam(0.0, 50.0), alp(1e-6, 3.0);
  for (int i = 0; i < 100; ++i) {
    const double l = lam(rng), a = alp(rng);
    // Sum in increasing order until the tail is negligible.
    double total = 0.0;
    for (std::int64_t k = 0; k < 200000; ++k) {
      const double p = std::exp(log_pmf_nb(k, l, a));
      total += p;
      if (static_cast<double>(k) > l && p < 1e-18) break;
    }
    CHECK(std::abs(total - 1.0) < 1e-8);
  }
  CHECK(std::abs(log_pmf_nb(0, 2.0, 1e-8) - log_pmf_poisson(0, 2.0)) < 1e-6);
  // Far from the mean the log masses differ by about alpha ((k - l)^2 - k) / 2; the masses themselves agree.
  for (double l : {0.3, 2.0, 17.0, 50.0}) {
    for (std::int64_t k = 0; k < 150; ++k) {
      CHECK(std::abs(std::exp(log_pmf_nb(k, l, 1e-8)) - std::exp(log_pmf_poisson(k, l))) < 1e-6);
    }
  }
}

TEST_CASE("rising factorial") {
  CHECK(log_rising_factorial(0, 3.7) == 0.0);
  CHECK(log_rising_factorial(3, 2.0) == doctest::Approx(std::log(2.0 * 3.0 * 4.0)));
  for (double r : {1e-3, 0.7, 55.0, 1e12}) {
    for (std::int64_t a : {1, 7, 300, 5000}) {
      long double direct = 0.0L;
      for (std::int64_t j = 0; j < a; ++j) direct += std::log(static_cast<long double>(r) + j);
      CHECK(log_rising_factorial(a, r) == doctest::Approx(static_cast<double>(direct)).epsilon(1e-12));
    }
  }
}

TEST_CASE("total log-likelihood") {
  SUBCASE("single observation") {
    const PanelDataset d = test::make_panel({1}, {4}, {1.0, 0.5}, {"intercept", "x"});
    ParamState th;
    th.beta0 = {0.2, -0.4};
    th.beta1 = th.beta0;
    th.log_alpha0 = std::log(0.7);
    th.log_alpha1 = th.log_alpha0;
    th.s = {0};
    const ModelSpec spec = ModelSpec::standard(Kernel::NegativeBinomial, 2);
    CHECK(total_log_likelihood(th, d, spec) == doctest::Approx(nb_oracle(4, std::exp(0.2 - 0.2), 0.7)));
  }
  SUBCASE("identical state parameters make the value independent of S") {
    const auto sim = simulate_panel(test::two_state_config(3, 12, 4));
    const ModelSpec spec = ModelSpec::full(Kernel::NegativeBinomial, 3);
    ParamState th;
    th.beta0 = {0.3, 0.1, -0.2};
    th.beta1 = th.beta0;
    th.log_alpha0 = th.log_alpha1 = std::log(0.5);
    th.tp = {0.2, 0.4};
    th.s.assign(12, 0);
    const double a = total_log_likelihood(th, sim.data, spec);
    th.s = {1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 1, 0};
    CHECK(total_log_likelihood(th, sim.data, spec) == doctest::Approx(a).epsilon(1e-13));
  }
  SUBCASE("T = 2, N = 2 brute-force sum") {
    const PanelDataset d =
        test::make_panel({2, 2}, {0, 3, 5, 1}, {1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, -1.0}, {"intercept", "x"});
    ParamState th;
    th.beta0 = {0.1, 0.3};
    th.beta1 = {1.0, -0.2};
    th.log_alpha0 = std::log(0.4);
    th.log_alpha1 = std::log(1.5);
    th.tp = {0.3, 0.5};
    th.s = {0, 1};
    const double want = nb_oracle(0, std::exp(0.1), 0.4) + nb_oracle(3, std::exp(0.4), 0.4) +
                        nb_oracle(5, std::exp(1.0 - 0.4), 1.5) + nb_oracle(1, std::exp(1.2), 1.5);
    CHECK(total_log_likelihood(th, d, ModelSpec::full(Kernel::NegativeBinomial, 2)) ==
          doctest::Approx(want).epsilon(1e-13));
    const double want_p = log_pmf_poisson(0, std::exp(0.1)) + log_pmf_poisson(3, std::exp(0.4)) +
                          log_pmf_poisson(5, std::exp(0.6)) + log_pmf_poisson(1, std::exp(1.2));
    CHECK(total_log_likelihood(th, d, ModelSpec::full(Kernel::Poisson, 2)) == doctest::Approx(want_p).epsilon(1e-13));
  }
}

TEST_CASE("rate summary") {
  ParamState th;
  th.beta0 = {0.0};
  th.beta1 = {0.0};
  th.log_alpha0 = 0.0;
  th.log_alpha1 = 0.0;
  const PanelDataset ones = test::make_panel({3}, {0, 1, 2}, {1.0, 1.0, 1.0}, {"intercept"});
  auto rs = rate_summary(th, ones, Kernel::NegativeBinomial);
  CHECK(rs[0].mean_rate == doctest::Approx(1.0));
  CHECK(rs[0].mean_sd == doctest::Approx(std::sqrt(2.0)));
  rs = rate_summary(th, ones, Kernel::Poisson);
  CHECK(rs[1].mean_sd == doctest::Approx(1.0));

  const PanelDataset two = test::make_panel({2}, {0, 0}, {1.0, 0.0, 1.0, std::log(3.0)}, {"intercept", "x"});
  th.beta0 = {0.0, 1.0};
  th.beta1 = th.beta0;
  th.log_alpha0 = std::log(0.5);
  rs = rate_summary(th, two, Kernel::NegativeBinomial);
  CHECK(rs[0].mean_rate == doctest::Approx(2.0));
  CHECK(rs[0].mean_sd == doctest::Approx((std::sqrt(1.5) + std::sqrt(7.5)) / 2.0));
  CHECK(rs[0].mean_sd == doctest::Approx(1.981679).epsilon(1e-6));
}

TEST_CASE("sample_count moments") {
  Rng rng = make_rng(8);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double c = static_cast<double>(sample_count(Kernel::NegativeBinomial, 4.0, 0.5, rng));
    s += c;
    s2 += c * c;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  CHECK(mean == doctest::Approx(4.0).epsilon(0.01));
  CHECK(var == doctest::Approx(4.0 * (1.0 + 0.5 * 4.0)).epsilon(0.03));
}

TEST_CASE("sufficient-statistic cache matches direct summation") {
  const auto sim = simulate_panel(test::two_state_config(21, 40, 9));
  for (Kernel kernel : {Kernel::NegativeBinomial, Kernel::Poisson}) {
    const ModelSpec spec = ModelSpec::full(kernel, 3);
    detail::LikelihoodCache cache(sim.data, kernel);
    ParamState th;
    th.beta0 = {0.1, 0.3, -0.6};
    th.beta1 = {1.1, -0.2, 0.4};
    th.log_alpha0 = std::log(0.35);
    th.log_alpha1 = std::log(1.7);
    th.tp = {0.2, 0.5};
    th.s = sim.true_states;
    for (int round = 0; round < 3; ++round) {
      cache.assign_states(th.s);
      const double direct = total_log_likelihood(th, sim.data, spec);
      const double cached = cache.state_loglik(0, th.beta0, th.log_alpha0) + cache.state_loglik(1, th.beta1, th.log_alpha1);
      CHECK(cached == doctest::Approx(direct).epsilon(1e-12));

      std::vector<double> L0(40), L1(40);
      cache.period_logliks(th.beta0, th.log_alpha0, L0);
      cache.period_logliks(th.beta1, th.log_alpha1, L1);
      double by_period = 0.0;
      for (std::size_t t = 0; t < 40; ++t) by_period += th.s[t] ? L1[t] : L0[t];
      CHECK(by_period == doctest::Approx(direct).epsilon(1e-12));
      for (std::size_t t = 0; t < 40; t += 7) th.s[t] = static_cast<std::uint8_t>(1 - th.s[t]);
    }
  }
}

TEST_CASE("cache reports overflow as -inf") {
  const PanelDataset d = test::make_panel({1}, {1}, {1.0, 2.0}, {"intercept", "x"});
  detail::LikelihoodCache cache(d, Kernel::NegativeBinomial);
  CHECK(cache.state_loglik(0, std::vector<double>{0.0, 400.0}, 0.0) == -INFINITY);
  std::vector<double> out(1);
  cache.period_logliks(std::vector<double>{0.0, 400.0}, 0.0, out);
  CHECK(out[0] == -INFINITY);
}
