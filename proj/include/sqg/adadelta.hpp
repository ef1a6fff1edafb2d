// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace sqg {

/// ADADELTA accumulator state. The update per parameter is
///   delta = -learning_rate * sqrt(E[d^2] + eps) / sqrt(E[g^2] + eps) * g
/// with both running averages decayed by rho. Pure ADADELTA has no rate
/// knob; learning_rate is a plain multiplier on the step, so the quoted
/// starting rates (0.1 discriminator, 0.5 generator) plug in directly.
struct AdadeltaState {
  double rho = 0.95;
  double epsilon = 1e-7;
  double learning_rate = 1.0;
  std::vector<double> accum_grad_sq;
  std::vector<double> accum_update_sq;

  static AdadeltaState make(std::size_t n_params, double learning_rate, double rho = 0.95,
                            double epsilon = 1e-7) {
    if (!(rho > 0 && rho < 1)) throw std::invalid_argument("AdadeltaState: rho must be in (0,1)");
    if (!(epsilon > 0)) throw std::invalid_argument("AdadeltaState: epsilon must be > 0");
    if (!(learning_rate > 0))
      throw std::invalid_argument("AdadeltaState: learning_rate must be > 0");
    AdadeltaState s;
    s.rho = rho;
    s.epsilon = epsilon;
    s.learning_rate = learning_rate;
    s.accum_grad_sq.assign(n_params, 0.0);
    s.accum_update_sq.assign(n_params, 0.0);
    return s;
  }
};

/// One descent step on the gradient; returns the updated parameters and
/// accumulator state, leaving the inputs untouched.
inline std::pair<std::vector<double>, AdadeltaState> adadelta_step(
    const AdadeltaState& state, const std::vector<double>& params,
    const std::vector<double>& gradient) {
  if (params.size() != gradient.size() || params.size() != state.accum_grad_sq.size())
    throw std::invalid_argument("adadelta_step: shape mismatch");
  AdadeltaState next = state;
  std::vector<double> out = params;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = gradient[i];
    next.accum_grad_sq[i] = state.rho * state.accum_grad_sq[i] + (1.0 - state.rho) * g * g;
    const double delta = -state.learning_rate *
                         std::sqrt(next.accum_update_sq[i] + state.epsilon) /
                         std::sqrt(next.accum_grad_sq[i] + state.epsilon) * g;
    next.accum_update_sq[i] =
        state.rho * state.accum_update_sq[i] + (1.0 - state.rho) * delta * delta;
    out[i] += delta;
  }
  return {std::move(out), std::move(next)};
}

}  // namespace sqg
