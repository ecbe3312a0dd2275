// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace ivb {

/// lr0 * (1 + cos(pi * step / total_steps)) / 2, decaying to 0 at the last step.
double cosine_lr(std::int64_t step, std::int64_t total_steps, double lr0);

}  // namespace ivb
