#include "aered/nn/adam.hpp"

#include "aered/core/error.hpp"

#include <cmath>

namespace aered::nn {
namespace {

template <typename Block>
void update_block(Block& p, const Block& g, Block& m, Block& v, const AdamState& s, double lr, double bc1,
                  double bc2) {
  m = s.beta1 * m + (1.0 - s.beta1) * g;
  v = s.beta2 * v + (1.0 - s.beta2) * g.cwiseAbs2();
  p.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + s.epsilon);
}

}  // namespace

AdamState AdamState::zeros_like(const AeParams& params) {
  AdamState s;
  s.first_moment = params.zeros_like();
  s.second_moment = params.zeros_like();
  return s;
}

void adam_step(AeParams& params, const AeParams& grads, AdamState& state, LearningRates lr) {
  if (!(lr.encoder >= 0.0) || !(lr.decoder >= 0.0)) throw ValueError("adam: learning rates must be >= 0");
  if (grads.encoder.size() != params.encoder.size() || state.first_moment.encoder.size() != params.encoder.size()) {
    throw DimensionError("adam: gradient/state blocks are not congruent with the parameters");
  }
  for (std::size_t l = 0; l < grads.encoder.size(); ++l) {
    if (!grads.encoder[l].kernel.allFinite()) {
      throw ValueError("adam: non-finite gradient in encoder[" + std::to_string(l) + "].kernel");
    }
    if (!grads.encoder[l].bias.allFinite()) {
      throw ValueError("adam: non-finite gradient in encoder[" + std::to_string(l) + "].bias");
    }
  }
  if (!grads.decoder.allFinite()) throw ValueError("adam: non-finite gradient in decoder");

  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t l = 0; l < params.encoder.size(); ++l) {
    update_block(params.encoder[l].kernel, grads.encoder[l].kernel, state.first_moment.encoder[l].kernel,
                 state.second_moment.encoder[l].kernel, state, lr.encoder, bc1, bc2);
    update_block(params.encoder[l].bias, grads.encoder[l].bias, state.first_moment.encoder[l].bias,
                 state.second_moment.encoder[l].bias, state, lr.encoder, bc1, bc2);
  }
  update_block(params.decoder, grads.decoder, state.first_moment.decoder, state.second_moment.decoder, state,
               lr.decoder, bc1, bc2);
  params.decoder = params.decoder.cwiseMax(0.0);
}

}  // namespace aered::nn
