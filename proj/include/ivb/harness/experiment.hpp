// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ivb/eval/metrics.hpp"
#include "ivb/harness/config.hpp"
#include "ivb/harness/dataset.hpp"
#include "ivb/model/classifier.hpp"
#include "ivb/optim/adamw.hpp"
#include "ivb/optim/ivon.hpp"

namespace ivb {

/// Child streams of a run seed.
enum class Stream : std::uint64_t { Init = 0, Shuffle = 1, Sampling = 2, Eval = 3, LoraBase = 4 };

inline Rng stream(std::uint64_t seed, Stream s) {
  return Rng(seed).split(static_cast<std::uint64_t>(s));
}

/// The trainable model a config describes, for data with the given shape.
/// With LoRA enabled the frozen base comes from lora.base_seed.
std::unique_ptr<Classifier> build_classifier(const ExperimentConfig& config, Index input_dim,
                                             Index num_classes);

/// Initial flat parameter vector for a run seed.
Vector initial_params(const ExperimentConfig& config, const Classifier& model,
                      std::uint64_t seed);

struct TrainedArtifact {
  OptimizerKind optimizer = OptimizerKind::AdamW;
  std::uint64_t seed = 0;
  Vector params;                          // AdamW point estimate
  std::optional<AdamwState> adamw_state;
  std::optional<PosteriorState> posterior;
  std::vector<double> epoch_loss;         // mean minibatch loss per epoch
  double min_precision_factor = 0.0;      // min over steps of min_i(h_i + delta), IVON only
  std::int64_t precision_violations = 0;  // steps where min_i(h_i + delta) <= 0
  std::int64_t steps = 0;
  bool failed = false;
  std::string diagnostics;
};

struct TrainHooks {
  std::function<void(std::int64_t step, const PosteriorState&)> on_ivon_step;
};

/// Seeded minibatch training with a cosine learning-rate schedule over all
/// steps. A non-finite loss or update marks the artifact failed instead of
/// throwing.
TrainedArtifact train_one(const ExperimentConfig& config, OptimizerKind optimizer,
                          std::uint64_t seed, const Batch& train, const Classifier& model,
                          const TrainHooks& hooks = {});

/// One evaluated prediction setting of one run.
struct EvalRow {
  std::string method;  // "AdamW", "IVON Mean", "IVON MC-8", "IVON MC-8 T=10"
  std::uint64_t seed = 0;
  MetricSet metrics;
  PredictionBatch predictions;
};

std::string mc_method_name(int num_samples, double temperature);

/// AdamW yields one row; IVON yields the mean row followed by one row per
/// (K, T) in config order.
std::vector<EvalRow> evaluate_one(const TrainedArtifact& artifact, const Classifier& model,
                                  const Batch& dev, const ExperimentConfig& config);

/// Per-method aggregate over seeds: mean and sample standard deviation.
struct ReportRow {
  std::string method;
  std::size_t seed_count = 0;
  MetricSet mean;
  MetricSet sd;
};

struct ExperimentResult {
  std::vector<EvalRow> runs;  // seed-major, method order within a seed
  std::vector<ReportRow> rows;
  std::vector<std::string> failures;
  std::vector<TrainedArtifact> artifacts;
};

std::vector<ReportRow> aggregate(const std::vector<EvalRow>& runs);

/// Trains and evaluates every (seed, optimizer) pair. Seeds may run on
/// config.threads workers; results are ordered by seed position regardless.
ExperimentResult run_experiment(const ExperimentConfig& config, const Dataset& data);

enum class SweepAxis { McSamples, Temperature };

SweepAxis parse_sweep_axis(const std::string& name);
std::string to_string(SweepAxis axis);

struct SweepPoint {
  double axis_value = 0.0;
  std::uint64_t seed = 0;
  MetricSet metrics;
};

/// Trains one IVON posterior per seed and evaluates it at every axis value.
/// The fixed other coordinate is `fixed_samples` (temperature axis) or
/// `fixed_temperature` (sample axis).
std::vector<SweepPoint> sweep(const ExperimentConfig& config, const Dataset& data,
                              SweepAxis axis, const std::vector<double>& values,
                              int fixed_samples = 8, double fixed_temperature = 1.0);

}  // namespace ivb
