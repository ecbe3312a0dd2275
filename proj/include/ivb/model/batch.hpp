// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include "ivb/core/types.hpp"

namespace ivb {

/// Features [n x d] with integer class labels.
struct Batch {
  Matrix features;
  Labels labels;

  Index size() const { return features.rows(); }
  Index dim() const { return features.cols(); }

  /// Throws ShapeError/DataError unless n >= 1, rows match labels, every
  /// label is in [0, num_classes) and features are finite.
  void validate(Index num_classes) const;

  /// Rows picked by index, in the given order.
  Batch gather(std::span<const Index> rows) const;
};

}  // namespace ivb
