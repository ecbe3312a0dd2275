// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>

#include "ivb/harness/experiment.hpp"

namespace ivb {

/// A trained run on disk, together with the config hash and data shape it
/// was trained under. Doubles round-trip exactly.
struct SavedArtifact {
  TrainedArtifact artifact;
  std::uint64_t config_hash = 0;
  Index input_dim = 0;
  Index num_classes = 0;
};

void save_artifact(const std::filesystem::path& path, const SavedArtifact& saved);

/// Throws DataError on a missing or malformed file.
SavedArtifact load_artifact(const std::filesystem::path& path);

}  // namespace ivb
