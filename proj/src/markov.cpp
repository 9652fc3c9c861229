#include "msnb/markov.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "msnb/error.hpp"

namespace msnb {

namespace {

// n * log(p) with the 0 * log(0) = 0 convention.
double count_log(std::size_t n, double p) {
  if (n == 0) return 0.0;
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  return static_cast<double>(n) * std::log(p);
}

}  // namespace

void validate_probabilities(TransitionProbs tp) {
  auto ok = [](double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; };
  if (!ok(tp.p01) || !ok(tp.p10)) {
    throw DataError("transition probabilities must lie in [0,1] (p01=" + std::to_string(tp.p01) +
                    ", p10=" + std::to_string(tp.p10) + ")");
  }
}

StationaryProbs stationary(TransitionProbs tp) {
  validate_probabilities(tp);
  const double total = tp.p01 + tp.p10;
  if (total <= 0.0) {
    throw DataError("stationary probabilities undefined for p01 = p10 = 0");
  }
  return {tp.p10 / total, tp.p01 / total};
}

TransitionCounts transition_counts(std::span<const std::uint8_t> s) {
  if (s.size() < 2) throw UsageError("transition_counts needs at least two periods");
  TransitionCounts c;
  for (std::size_t t = 1; t < s.size(); ++t) {
    const int from = s[t - 1];
    const int to = s[t];
    if (from > 1 || to > 1) throw DataError("state sequence entries must be 0 or 1");
    if (from == 0) {
      (to == 0 ? c.n00 : c.n01)++;
    } else {
      (to == 0 ? c.n10 : c.n11)++;
    }
  }
  return c;
}

double log_state_prior(std::span<const std::uint8_t> s, TransitionProbs tp) {
  if (s.size() < 2) return 0.0;
  const TransitionCounts c = transition_counts(s);
  return count_log(c.n01, tp.p01) + count_log(c.n00, 1.0 - tp.p01) + count_log(c.n10, tp.p10) +
         count_log(c.n11, 1.0 - tp.p10);
}

bool enforce_identification(TransitionProbs tp) { return tp.p01 <= tp.p10; }

}  // namespace msnb
