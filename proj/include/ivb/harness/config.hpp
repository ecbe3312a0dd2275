// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ivb/optim/adamw.hpp"
#include "ivb/optim/ivon.hpp"

namespace ivb {

struct DatasetSpec {
  Index num_classes = 4;
  Index dim = 16;
  Index train_size = 2000;
  Index dev_size = 1000;
  double separation = 2.0;
  double label_noise = 0.1;
  std::uint64_t seed = 20250101;

  void validate() const;
};

enum class OptimizerKind { AdamW, Ivon };

std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(const std::string& name);

struct LoraSettings {
  bool enabled = false;
  Index rank = 8;
  double alpha = 16.0;
  std::uint64_t base_seed = 0;
};

struct TrainSettings {
  int epochs = 3;
  Index batch_size = 4;
};

struct EvalSettings {
  std::vector<int> mc_samples{8};
  std::vector<double> temperatures{1.0};
  std::vector<double> thresholds{0.0, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99};
  Index ece_bins = 10;
  // C@R columns of the report, in order.
  std::vector<double> risk_budgets{0.01, 0.05, 0.10};
};

/// Declarative run description. Defaults follow the reference training
/// recipe: 3 epochs, batch 4, AdamW lr 5e-5, IVON lr 0.03 with ess 1e7,
/// h0 1e-3 and no weight decay, LoRA rank 8 / alpha 16.
struct ExperimentConfig {
  DatasetSpec dataset;
  std::optional<std::filesystem::path> train_csv;
  std::optional<std::filesystem::path> dev_csv;

  std::vector<Index> hidden{32};
  LoraSettings lora;

  std::vector<OptimizerKind> optimizers{OptimizerKind::AdamW, OptimizerKind::Ivon};
  AdamwConfig adamw;
  IvonConfig ivon;
  TrainSettings train;
  EvalSettings eval;

  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::filesystem::path out_dir = "out";
  int threads = 1;

  void validate() const;

  /// Canonical `key = value` text covering every setting; its hash
  /// identifies the run in report metadata.
  std::string canonical() const;
  std::uint64_t hash() const;
};

/// Parses the key/value format:
///
///   # comment
///   [section]
///   key = value
///
/// Lists are comma separated. Unknown sections or keys are a ConfigError.
ExperimentConfig parse_config(const std::string& text,
                              const std::filesystem::path& base_dir = {});

ExperimentConfig load_config(const std::filesystem::path& path);

/// Seeds 0..count-1.
std::vector<std::uint64_t> seed_range(std::size_t count);

}  // namespace ivb
