// SPDX-License-Identifier: Apache-2.0
#include "ivb/optim/schedule.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ivb/core/types.hpp"

namespace ivb {

double cosine_lr(std::int64_t step, std::int64_t total_steps, double lr0) {
  if (total_steps < 1) throw InvalidArgument("cosine_lr: total_steps must be >= 1");
  if (step < 0 || step > total_steps)
    throw InvalidArgument("cosine_lr: step " + std::to_string(step) + " outside [0, " +
                          std::to_string(total_steps) + "]");
  if (step == total_steps) return 0.0;
  const double progress = static_cast<double>(step) / static_cast<double>(total_steps);
  return lr0 * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace ivb
