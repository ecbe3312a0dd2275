// SPDX-License-Identifier: Apache-2.0
// ivonbench: AdamW vs IVON calibration and selective-prediction benchmark.
#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ivb/harness/artifact.hpp"
#include "ivb/harness/dataset.hpp"
#include "ivb/harness/experiment.hpp"
#include "ivb/harness/report.hpp"
#include "ivb/version.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kConfig = 2, kData = 3, kRunFailure = 4 };

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> seeds;
  std::string out;
  std::string optimizer;
  std::optional<int> mc_samples;
  std::optional<double> temperature;
  std::optional<int> threads;
  // sweep
  std::string axis = "mc_samples";
  std::vector<double> values;
  // eval
  std::vector<std::string> artifacts;
};

ivb::ExperimentConfig resolve(const Options& o) {
  ivb::ExperimentConfig c = o.config.empty() ? ivb::ExperimentConfig{} : ivb::load_config(o.config);
  if (o.seeds) c.seeds = ivb::seed_range(*o.seeds);
  if (o.seed) c.seeds = {*o.seed};
  if (!o.out.empty()) c.out_dir = o.out;
  if (!o.optimizer.empty()) c.optimizers = {ivb::parse_optimizer(o.optimizer)};
  if (o.mc_samples) c.eval.mc_samples = {*o.mc_samples};
  if (o.temperature) c.eval.temperatures = {*o.temperature};
  if (o.threads) c.threads = *o.threads;
  c.validate();
  return c;
}

std::string artifact_name(ivb::OptimizerKind kind, std::uint64_t seed) {
  return fmt::format("{}-seed{}.json", kind == ivb::OptimizerKind::AdamW ? "adamw" : "ivon", seed);
}

int cmd_gen_data(const Options& o) {
  const auto c = resolve(o);
  const auto data = ivb::generate_dataset(c.dataset);
  ivb::write_csv(c.out_dir / "train.csv", data.train);
  ivb::write_csv(c.out_dir / "dev.csv", data.dev);
  std::cout << fmt::format("wrote {} train and {} dev rows to {}\n", data.train.size(),
                           data.dev.size(), c.out_dir.string());
  return kOk;
}

int cmd_train(const Options& o) {
  const auto c = resolve(o);
  const auto data = ivb::load_dataset(c);
  const auto model = ivb::build_classifier(c, data.train.dim(), data.num_classes);
  int failures = 0;
  for (const auto seed : c.seeds) {
    for (const auto opt : c.optimizers) {
      auto art = ivb::train_one(c, opt, seed, data.train, *model);
      const auto path = c.out_dir / "artifacts" / artifact_name(opt, seed);
      if (art.failed) {
        ++failures;
        std::cerr << "run failed: " << art.diagnostics << "\n";
      } else {
        std::cout << fmt::format("{} seed {}: final train loss {:.4f} -> {}\n", ivb::to_string(opt),
                                 seed, art.epoch_loss.back(), path.string());
      }
      ivb::save_artifact(path, {std::move(art), c.hash(), data.train.dim(), data.num_classes});
    }
  }
  return failures > 0 ? kRunFailure : kOk;
}

int cmd_eval(const Options& o) {
  const auto c = resolve(o);
  const auto data = ivb::load_dataset(c);
  const auto model = ivb::build_classifier(c, data.train.dim(), data.num_classes);

  std::vector<fs::path> paths(o.artifacts.begin(), o.artifacts.end());
  if (paths.empty()) {
    for (const auto seed : c.seeds)
      for (const auto opt : c.optimizers)
        paths.push_back(c.out_dir / "artifacts" / artifact_name(opt, seed));
  }

  ivb::ExperimentResult result;
  for (const auto& p : paths) {
    auto saved = ivb::load_artifact(p);
    if (saved.input_dim != data.train.dim() || saved.num_classes != data.num_classes)
      throw ivb::DataError("artifact '" + p.string() + "' was trained on data of another shape");
    if (saved.artifact.params.size() != model->num_params())
      throw ivb::ConfigError("artifact '" + p.string() + "' does not match the configured model");
    if (saved.config_hash != c.hash())
      std::cerr << "warning: " << p.string() << " was trained under a different config\n";
    if (saved.artifact.failed) {
      result.failures.push_back(saved.artifact.diagnostics);
    } else {
      for (auto& row : ivb::evaluate_one(saved.artifact, *model, data.dev, c))
        result.runs.push_back(std::move(row));
    }
    result.artifacts.push_back(std::move(saved.artifact));
  }
  result.rows = ivb::aggregate(result.runs);
  ivb::emit_report(c.out_dir, c, result);
  std::cout << ivb::report_table(result.rows);
  return result.failures.empty() ? kOk : kRunFailure;
}

int cmd_run(const Options& o) {
  const auto c = resolve(o);
  const auto data = ivb::load_dataset(c);
  const auto result = ivb::run_experiment(c, data);
  for (const auto& f : result.failures) std::cerr << "run failed: " << f << "\n";
  if (result.rows.empty()) return kRunFailure;
  ivb::emit_report(c.out_dir, c, result);
  std::cout << ivb::report_table(result.rows);
  return result.failures.empty() ? kOk : kRunFailure;
}

int cmd_sweep(const Options& o) {
  const auto c = resolve(o);
  const auto axis = ivb::parse_sweep_axis(o.axis);
  std::vector<double> values = o.values;
  if (values.empty())
    values = axis == ivb::SweepAxis::McSamples ? std::vector<double>{1, 2, 4, 8, 16, 32}
                                               : std::vector<double>{1, 10, 1e3, 1e12};
  const auto data = ivb::load_dataset(c);
  const int k = c.eval.mc_samples.front();
  const double t = c.eval.temperatures.front();
  const auto points = ivb::sweep(c, data, axis, values, k, t);
  const auto path = c.out_dir / fmt::format("sweep_{}.csv", ivb::to_string(axis));
  ivb::write_text(path, ivb::sweep_csv(points));
  std::cout << fmt::format("wrote {} points to {}\n", points.size(), path.string());
  if (axis == ivb::SweepAxis::McSamples && values.front() < 4)
    std::cout << "note: very few samples can underperform the posterior mean\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AdamW vs IVON calibration and selective-prediction benchmark"};
  app.set_version_flag("--version", ivb::kVersion);
  app.require_subcommand(1);

  Options o;
  auto common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "Config file (key = value sections)");
    sub->add_option("--seed", o.seed, "Run a single seed");
    sub->add_option("--seeds", o.seeds, "Run seeds 0..n-1")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--optimizer", o.optimizer, "Restrict to one optimizer")
        ->check(CLI::IsMember({"adamw", "ivon"}));
    sub->add_option("--mc-samples", o.mc_samples, "MC samples K at evaluation")
        ->check(CLI::PositiveNumber);
    sub->add_option("--temperature", o.temperature, "Posterior temperature T at evaluation")
        ->check(CLI::PositiveNumber);
    sub->add_option("--threads", o.threads, "Seeds trained in parallel")
        ->check(CLI::PositiveNumber);
  };

  auto* gen = app.add_subcommand("gen-data", "Write the synthetic train/dev CSVs");
  auto* train = app.add_subcommand("train", "Train and save one artifact per seed and optimizer");
  auto* eval = app.add_subcommand("eval", "Evaluate saved artifacts and write a report");
  auto* run = app.add_subcommand("run", "Train, evaluate and report over all seeds");
  auto* sweep = app.add_subcommand("sweep", "MC-sample or temperature curve on IVON posteriors");
  for (auto* sub : {gen, train, eval, run, sweep}) common(sub);
  eval->add_option("--artifact", o.artifacts, "Artifact files (default: <out>/artifacts/*)");
  sweep->add_option("--axis", o.axis, "mc_samples or temperature")
      ->check(CLI::IsMember({"mc_samples", "temperature"}));
  sweep->add_option("--values", o.values, "Axis values")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*gen) return cmd_gen_data(o);
    if (*train) return cmd_train(o);
    if (*eval) return cmd_eval(o);
    if (*run) return cmd_run(o);
    return cmd_sweep(o);
  } catch (const ivb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ivb::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRunFailure;
  }
}
