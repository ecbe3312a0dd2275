// SPDX-License-Identifier: Apache-2.0
#include "ivb/model/batch.hpp"

#include <string>

namespace ivb {

void Batch::validate(Index num_classes) const {
  if (features.rows() < 1) throw ShapeError("batch: no rows");
  if (labels.size() != features.rows())
    throw ShapeError("batch: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(features.rows()) + " feature rows");
  for (Index i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes)
      throw DataError("batch: label " + std::to_string(labels[i]) + " at row " +
                      std::to_string(i) + " outside [0, " +
                      std::to_string(num_classes) + ")");
  }
  if (!features.allFinite()) throw DataError("batch: non-finite feature");
}

Batch Batch::gather(std::span<const Index> rows) const {
  Batch out;
  out.features.resize(static_cast<Index>(rows.size()), features.cols());
  out.labels.resize(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = rows[i];
    out.features.row(static_cast<Index>(i)) = features.row(r);
    out.labels[static_cast<Index>(i)] = labels[r];
  }
  return out;
}

}  // namespace ivb
