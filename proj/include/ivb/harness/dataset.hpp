// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>

#include "ivb/harness/config.hpp"
#include "ivb/model/batch.hpp"

namespace ivb {

struct Dataset {
  Batch train;
  Batch dev;
  Index num_classes = 0;
  Matrix centers;  // [C x d]; empty for data loaded from CSV
};

/// Gaussian class clusters: class c has center separation * u_c with u_c a
/// random unit direction, features are center + N(0, I), and a fraction
/// label_noise of labels is redrawn uniformly over all classes. Train rows are
/// drawn first, then dev rows, from a single stream seeded by spec.seed.
Dataset generate_dataset(const DatasetSpec& spec);

/// CSV with header feature_0,...,feature_{d-1},label. Throws DataError naming
/// the line on malformed input.
Batch load_csv(const std::filesystem::path& path);

void write_csv(const std::filesystem::path& path, const Batch& batch);

/// Generated or CSV-backed dataset for a config. C for CSV data is one past the
/// largest label in either split.
Dataset load_dataset(const ExperimentConfig& config);

}  // namespace ivb
