#include <doctest.h>

#include <cmath>
#include <vector>

#include "msnb/error.hpp"
#include "msnb/markov.hpp"

using namespace msnb;

TEST_CASE("stationary probabilities") {
  // Anchor: full-model transition estimates (.158, .627) with reported occupancies (.798, .202).
  StationaryProbs p = stationary({0.158, 0.627});
  CHECK(std::abs(p.p0 - 0.798) <= 1e-3);
  CHECK(std::abs(p.p1 - 0.202) <= 1e-3);
  CHECK(p.p0 == doctest::Approx(0.627 / 0.785));
  // Restricted model (.0933, .651) against reported (.873, .127). The reported pair is the posterior
  // mean of the ratio, not the ratio of posterior means, so agreement is only to about 2e-3.
  p = stationary({0.0933, 0.651});
  CHECK(std::abs(p.p0 - 0.873) <= 2e-3);
  CHECK(std::abs(p.p1 - 0.127) <= 2e-3);
  p = stationary({0.5, 0.5});
  CHECK(p.p0 == 0.5);
  CHECK(p.p1 == 0.5);
  CHECK(stationary({0.0, 0.3}).p0 == 1.0);
  CHECK_THROWS(stationary({0.0, 0.0}));
  CHECK_THROWS(stationary({1.2, 0.3}));
}

TEST_CASE("transition counts") {
  auto c = transition_counts(std::vector<std::uint8_t>{0, 0, 1, 1, 0});
  CHECK(c.n00 == 1);
  CHECK(c.n01 == 1);
  CHECK(c.n10 == 1);
  CHECK(c.n11 == 1);
  c = transition_counts(std::vector<std::uint8_t>(10, 0));
  CHECK(c.n00 == 9);
  CHECK(c.n01 + c.n10 + c.n11 == 0);
  c = transition_counts(std::vector<std::uint8_t>{0, 1, 0, 1, 0, 1});
  CHECK(c.n00 == 0);
  CHECK(c.n01 == 3);
  CHECK(c.n10 == 2);
  CHECK(c.n11 == 0);
  CHECK_THROWS(transition_counts(std::vector<std::uint8_t>{0}));
}

TEST_CASE("state prior") {
  CHECK(log_state_prior(std::vector<std::uint8_t>{0, 0}, {0.25, 0.5}) == doctest::Approx(std::log(0.75)));
  CHECK(log_state_prior(std::vector<std::uint8_t>{0, 1}, {0.0, 0.5}) == -INFINITY);
  CHECK(log_state_prior(std::vector<std::uint8_t>{0, 0, 1, 1, 0}, {0.2, 0.6}) ==
        doctest::Approx(std::log(0.8 * 0.2 * 0.4 * 0.6)));
  CHECK(log_state_prior(std::vector<std::uint8_t>{1}, {0.2, 0.6}) == 0.0);

  // Summing over every continuation of s_1 gives one.
  const TransitionProbs tp{0.3, 0.45};
  for (std::uint8_t first : {0, 1}) {
    double total = 0.0;
    for (unsigned x = 0; x < 16; ++x) {
      std::vector<std::uint8_t> s{first};
      for (int j = 0; j < 4; ++j) s.push_back(static_cast<std::uint8_t>((x >> j) & 1u));
      total += std::exp(log_state_prior(s, tp));
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("label identification") {
  CHECK(enforce_identification({0.1, 0.5}));
  CHECK_FALSE(enforce_identification({0.5, 0.1}));
  CHECK(enforce_identification({0.3, 0.3}));
}
