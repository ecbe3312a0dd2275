// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "ivb/core/types.hpp"

namespace ivb {

struct AdamwConfig {
  double lr = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;

  void validate() const;
};

struct AdamwState {
  Vector first_moment;
  Vector second_moment;
  std::int64_t step = 0;

  static AdamwState zeros(Index num_params);
};

/// One decoupled-weight-decay Adam step, applied in place.
void adamw_step(AdamwState& state, Vector& params, const Vector& grad,
                const AdamwConfig& config, double lr);

}  // namespace ivb
