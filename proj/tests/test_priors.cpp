#include <doctest.h>

#include <cmath>
#include <numbers>

#include "msnb/error.hpp"
#include "msnb/markov.hpp"
#include "msnb/priors.hpp"

using namespace msnb;

namespace {

MleResult two_coef_mle() {
  MleResult m;
  m.kernel = Kernel::NegativeBinomial;
  m.names = {"intercept", "x", "alpha"};
  m.beta_hat = {2.0, 0.1};
  m.alpha_hat = 0.5;
  m.log_alpha_hat = std::log(0.5);
  m.covariance = {0.1, 0, 0, 0, 4.0, 0, 0, 0, 0.01};
  return m;
}

double normal_peak(double var) { return -0.5 * std::log(2.0 * std::numbers::pi * var); }

}  // namespace

TEST_CASE("hyper-parameter rule") {
  const PriorSpec p = build_prior(two_coef_mle());
  CHECK(p.beta_mean[0] == 2.0);
  CHECK(p.beta_var[0] == doctest::Approx(40.0));  // 10 max(4, 0.1)
  CHECK(p.beta_mean[1] == 0.1);
  CHECK(p.beta_var[1] == doctest::Approx(40.0));  // 10 max(0.01, 4)
  CHECK(p.has_alpha);
  CHECK(p.alpha_mean == 0.5);
  CHECK(p.alpha_var == doctest::Approx(2.5));  // 10 max(0.25, 0.01)
  CHECK(p.p01.a == 1.0);
  CHECK(p.p01.b == 1.0);
  CHECK(p.p10.a == 1.0);
  CHECK(p.p10.b == 1.0);
}

TEST_CASE("missing variance is an error unless the coefficient is fixed at zero") {
  MleResult m = two_coef_mle();
  m.covariance[4] = NAN;
  CHECK_THROWS_AS(build_prior(m), DataError);
  ModelSpec spec = ModelSpec::full(Kernel::NegativeBinomial, 2);
  spec.coef_mask[1] = CoefMask::FixedZeroBoth;
  CHECK_NOTHROW(build_prior(m, &spec));
  m.covariance[0] = 0.0;
  CHECK_THROWS_AS(build_prior(m, &spec), DataError);
}

TEST_CASE("log prior at the prior mode") {
  const PriorSpec p = build_prior(two_coef_mle());
  const ModelSpec spec = ModelSpec::full(Kernel::NegativeBinomial, 2);
  ParamState th;
  th.beta0 = p.beta_mean;
  th.beta1 = p.beta_mean;
  th.log_alpha0 = std::log(p.alpha_mean);
  th.log_alpha1 = th.log_alpha0;
  th.tp = {0.2, 0.5};
  th.s = {0, 0, 1, 0};
  const double want = 2.0 * (normal_peak(40.0) + normal_peak(40.0) + normal_peak(2.5)) +
                      log_state_prior(th.s, th.tp);
  CHECK(log_prior(th, p, spec) == doctest::Approx(want).epsilon(1e-13));

  th.tp = {0.6, 0.5};
  CHECK(log_prior(th, p, spec) == -INFINITY);
}

TEST_CASE("mask semantics of the prior") {
  const PriorSpec p = build_prior(two_coef_mle());
  ParamState th;
  th.beta0 = {2.0, 0.1};
  th.beta1 = {2.0, 0.1};
  th.log_alpha0 = th.log_alpha1 = std::log(0.5);
  th.tp = {0.2, 0.5};
  th.s = {0, 1};
  const ModelSpec full = ModelSpec::full(Kernel::NegativeBinomial, 2);
  ModelSpec shared_x = full;
  shared_x.coef_mask[1] = CoefMask::SharedAcrossStates;
  // Sharing x removes exactly one normal term.
  CHECK(log_prior(th, p, full) - log_prior(th, p, shared_x) == doctest::Approx(normal_peak(40.0)));
  ModelSpec shared_alpha = full;
  shared_alpha.dispersion_mask = DispersionMask::SharedAcrossStates;
  CHECK(log_prior(th, p, full) - log_prior(th, p, shared_alpha) == doctest::Approx(normal_peak(2.5)));
  ModelSpec zero1 = full;
  zero1.coef_mask[1] = CoefMask::FixedZeroState1;
  th.beta1[1] = 0.0;
  CHECK(log_prior(th, p, full) - log_prior(th, p, zero1) ==
        doctest::Approx(log_normal_density(0.0, 0.1, 40.0)));

  const ModelSpec standard = ModelSpec::standard(Kernel::NegativeBinomial, 2);
  th.beta1 = th.beta0;
  th.tp = {0.9, 0.1};  // ignored by single-state models
  CHECK(log_prior(th, p, standard) == doctest::Approx(2.0 * normal_peak(40.0) + normal_peak(2.5)));
}

TEST_CASE("alpha prior has no log-alpha Jacobian") {
  const PriorSpec p = build_prior(two_coef_mle());
  for (double a : {0.1, 0.5, 3.0}) CHECK(log_prior_alpha(std::log(a), p) == doctest::Approx(log_normal_density(a, 0.5, 2.5)));
  CHECK(log_prior_alpha(-INFINITY, p) == -INFINITY);
  CHECK(log_normal_density(1.0, 1.0, 1.0) == doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)));
}
