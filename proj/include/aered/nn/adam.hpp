#pragma once

#include "aered/nn/network.hpp"

namespace aered::nn {

struct LearningRates {
  double encoder = 1e-3;
  double decoder = 1e-4;
};

/// Bias-corrected Adam moments, congruent to the parameters they update.
struct AdamState {
  AeParams first_moment;
  AeParams second_moment;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState zeros_like(const AeParams& params);
};

/// One Adam update in place, then clamps the decoder (endmembers) at zero.
/// Throws ValueError naming the first gradient block holding a non-finite value.
void adam_step(AeParams& params, const AeParams& grads, AdamState& state, LearningRates lr);

}  // namespace aered::nn
