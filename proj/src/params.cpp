#include "msnb/params.hpp"

#include <cmath>
#include <string>

#include "msnb/error.hpp"

namespace msnb {

void check_param_state(const ParamState& theta, const ModelSpec& spec, std::size_t n_covariates,
                       std::size_t periods) {
  spec.validate(n_covariates);
  if (theta.beta0.size() != n_covariates || theta.beta1.size() != n_covariates) {
    throw DataError("coefficient vectors must have " + std::to_string(n_covariates) + " entries");
  }
  if (theta.s.size() != periods) {
    throw DataError("state sequence has " + std::to_string(theta.s.size()) + " entries for " +
                    std::to_string(periods) + " periods");
  }
  for (std::uint8_t v : theta.s) {
    if (v > 1) throw DataError("state sequence entries must be 0 or 1");
  }
  for (std::size_t k = 0; k < n_covariates; ++k) {
    const double b0 = theta.beta0[k];
    const double b1 = theta.beta1[k];
    if (!std::isfinite(b0) || !std::isfinite(b1)) throw DataError("coefficients must be finite");
    const std::string where = " (coefficient " + std::to_string(k) + ")";
    switch (spec.coef_mask[k]) {
      case CoefMask::FreePerState: break;
      case CoefMask::SharedAcrossStates:
        if (b0 != b1) throw DataError("shared coefficient differs between states" + where);
        break;
      case CoefMask::FixedZeroState0:
        if (b0 != 0.0) throw DataError("coefficient fixed at zero in state 0 is nonzero" + where);
        break;
      case CoefMask::FixedZeroState1:
        if (b1 != 0.0) throw DataError("coefficient fixed at zero in state 1 is nonzero" + where);
        break;
      case CoefMask::FixedZeroBoth:
        if (b0 != 0.0 || b1 != 0.0) throw DataError("coefficient fixed at zero is nonzero" + where);
        break;
    }
  }
  if (spec.has_dispersion()) {
    if (!std::isfinite(theta.log_alpha0) || !std::isfinite(theta.log_alpha1)) {
      throw DataError("log dispersion must be finite");
    }
    if (spec.dispersion_shared() && theta.log_alpha0 != theta.log_alpha1) {
      throw DataError("shared dispersion differs between states");
    }
  }
  if (spec.switching) {
    validate_probabilities(theta.tp);
    if (!enforce_identification(theta.tp)) throw DataError("transition probabilities violate p01 <= p10");
  } else {
    for (std::uint8_t v : theta.s) {
      if (v != 0) throw DataError("a single-state model requires every state to be 0");
    }
  }
}

void apply_mask(ParamState& theta, const ModelSpec& spec) {
  for (std::size_t k = 0; k < spec.coef_mask.size(); ++k) {
    switch (spec.coef_mask[k]) {
      case CoefMask::FreePerState: break;
      case CoefMask::SharedAcrossStates: theta.beta1[k] = theta.beta0[k]; break;
      case CoefMask::FixedZeroState0: theta.beta0[k] = 0.0; break;
      case CoefMask::FixedZeroState1: theta.beta1[k] = 0.0; break;
      case CoefMask::FixedZeroBoth:
        theta.beta0[k] = 0.0;
        theta.beta1[k] = 0.0;
        break;
    }
  }
  if (spec.dispersion_shared()) theta.log_alpha1 = theta.log_alpha0;
  if (!spec.switching) std::fill(theta.s.begin(), theta.s.end(), std::uint8_t{0});
}

}  // namespace msnb
