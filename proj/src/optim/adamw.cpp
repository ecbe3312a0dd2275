// SPDX-License-Identifier: Apache-2.0
#include "ivb/optim/adamw.hpp"

#include <cmath>

namespace ivb {

void AdamwConfig::validate() const {
  if (!(lr >= 0.0)) throw ConfigError("adamw: lr must be >= 0");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw ConfigError("adamw: beta1 must be in (0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw ConfigError("adamw: beta2 must be in (0, 1)");
  if (!(eps > 0.0)) throw ConfigError("adamw: eps must be > 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("adamw: weight_decay must be >= 0");
}

AdamwState AdamwState::zeros(Index num_params) {
  return {Vector::Zero(num_params), Vector::Zero(num_params), 0};
}

void adamw_step(AdamwState& state, Vector& params, const Vector& grad,
                const AdamwConfig& config, double lr) {
  if (params.size() != grad.size() || state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size())
    throw ShapeError("adamw_step: length mismatch");
  if (!grad.allFinite()) throw NumericError("adamw_step: non-finite gradient");

  state.step += 1;
  state.first_moment = config.beta1 * state.first_moment + (1.0 - config.beta1) * grad;
  state.second_moment =
      config.beta2 * state.second_moment + (1.0 - config.beta2) * grad.cwiseAbs2();

  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(config.beta1, t);
  const double bias2 = 1.0 - std::pow(config.beta2, t);
  const auto m_hat = state.first_moment.array() / bias1;
  const auto v_hat = state.second_moment.array() / bias2;

  params.array() -= lr * (m_hat / (v_hat.sqrt() + config.eps) +
                          config.weight_decay * params.array());
  if (!params.allFinite()) throw NumericError("adamw_step: non-finite update");
}

}  // namespace ivb
