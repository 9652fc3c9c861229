#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace msnb {

/// Per-period switching probabilities of the two-state chain:
/// p01 = P(s_{t+1}=1 | s_t=0), p10 = P(s_{t+1}=0 | s_t=1).
struct TransitionProbs {
  double p01 = 0.0;
  double p10 = 0.0;
};

/// One latent state per period, each entry 0 or 1.
using StateSequence = std::vector<std::uint8_t>;

struct StationaryProbs {
  double p0 = 0.0;
  double p1 = 0.0;
};

struct TransitionCounts {
  std::size_t n00 = 0;
  std::size_t n01 = 0;
  std::size_t n10 = 0;
  std::size_t n11 = 0;
};

/// Throws DataError unless both probabilities are in [0,1].
void validate_probabilities(TransitionProbs tp);

/// Long-run occupancy of each state. Requires p01 + p10 > 0.
StationaryProbs stationary(TransitionProbs tp);

/// Counts of consecutive state pairs. Requires at least two periods.
TransitionCounts transition_counts(std::span<const std::uint8_t> s);

/// log P(s_2..s_T | s_1). The initial-state term is omitted, so summing the
/// exponential over all sequences sharing s_1 gives one. Returns -inf when s
/// contains a transition of zero probability. Sequences shorter than two
/// periods contribute zero.
double log_state_prior(std::span<const std::uint8_t> s, TransitionProbs tp);

/// Label identification: state 0 must be at least as frequent as state 1,
/// which is equivalent to p01 <= p10 (ties admitted).
bool enforce_identification(TransitionProbs tp);

}  // namespace msnb
