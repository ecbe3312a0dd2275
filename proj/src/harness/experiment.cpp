// SPDX-License-Identifier: Apache-2.0
#include "ivb/harness/experiment.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "ivb/optim/schedule.hpp"
#include "ivb/predict/predict.hpp"

namespace ivb {
namespace {

std::vector<Index> layer_sizes(const ExperimentConfig& config, Index input_dim,
                               Index num_classes) {
  std::vector<Index> sizes{input_dim};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(num_classes);
  return sizes;
}

std::array<double, 3> budgets(const ExperimentConfig& config) {
  const auto& r = config.eval.risk_budgets;
  return {r[0], r[1], r[2]};
}

PredictionBatch make_batch(Matrix probs, const Batch& dev) {
  return {std::move(probs), dev.labels};
}

template <typename Fn>
void for_each_seed(const ExperimentConfig& config, Fn&& fn) {
  const std::size_t n = config.seeds.size();
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config.threads), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::mutex error_mutex;
  std::exception_ptr error;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

MetricSet metric_sd(const std::vector<MetricSet>& xs, const MetricSet& mean) {
  MetricSet sd;
  if (xs.size() < 2) return sd;
  auto acc = [&](double MetricSet::*field) {
    double ss = 0.0;
    for (const auto& x : xs) ss += (x.*field - mean.*field) * (x.*field - mean.*field);
    sd.*field = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  };
  for (auto f : {&MetricSet::acc, &MetricSet::ece, &MetricSet::nll, &MetricSet::brier,
                 &MetricSet::c_at_1, &MetricSet::c_at_5, &MetricSet::c_at_10, &MetricSet::auc})
    acc(f);
  return sd;
}

}  // namespace

std::unique_ptr<Classifier> build_classifier(const ExperimentConfig& config, Index input_dim,
                                             Index num_classes) {
  const auto sizes = layer_sizes(config, input_dim, num_classes);
  if (!config.lora.enabled) return std::make_unique<MlpClassifier>(zero_mlp<double>(sizes));

  Rng base_rng = stream(config.lora.base_seed, Stream::LoraBase);
  Mlp<double> base = init_mlp<double>(sizes, base_rng);
  Rng adapter_rng = stream(config.lora.base_seed, Stream::Init);
  auto shape = init_lora(base, config.lora.rank, config.lora.alpha, adapter_rng);
  return std::make_unique<LoraClassifier>(std::move(base), std::move(shape));
}

Vector initial_params(const ExperimentConfig& config, const Classifier& model,
                      std::uint64_t seed) {
  Rng rng = stream(seed, Stream::Init);
  if (const auto* lora = dynamic_cast<const LoraClassifier*>(&model)) {
    return flatten(init_lora(lora->base(), config.lora.rank, config.lora.alpha, rng));
  }
  const auto& mlp = dynamic_cast<const MlpClassifier&>(model);
  return flatten(init_mlp<double>(mlp.shape().layer_sizes(), rng));
}

TrainedArtifact train_one(const ExperimentConfig& config, OptimizerKind optimizer,
                          std::uint64_t seed, const Batch& train, const Classifier& model,
                          const TrainHooks& hooks) {
  train.validate(model.num_classes());
  TrainedArtifact art;
  art.optimizer = optimizer;
  art.seed = seed;

  const Index n = train.size();
  const Index bs = std::min(config.train.batch_size, n);
  const Index steps_per_epoch = (n + bs - 1) / bs;
  const std::int64_t total_steps = static_cast<std::int64_t>(config.train.epochs) * steps_per_epoch;

  Rng shuffle_rng = stream(seed, Stream::Shuffle);
  Rng sample_rng = stream(seed, Stream::Sampling);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});

  Vector params = initial_params(config, model, seed);
  if (optimizer == OptimizerKind::AdamW) {
    art.adamw_state = AdamwState::zeros(params.size());
  } else {
    art.posterior = init_posterior(params, config.ivon);
    art.min_precision_factor = min_precision_factor(*art.posterior, config.ivon);
  }

  std::int64_t step = 0;
  try {
    for (int epoch = 0; epoch < config.train.epochs; ++epoch) {
      shuffle(order.begin(), order.end(), shuffle_rng);
      double loss_sum = 0.0;
      for (Index b = 0; b < steps_per_epoch; ++b) {
        const Index begin = b * bs;
        const Index count = std::min(bs, n - begin);
        const Batch mb = train.gather(std::span<const Index>(order).subspan(
            static_cast<std::size_t>(begin), static_cast<std::size_t>(count)));
        const double lr_scale = cosine_lr(step, total_steps, 1.0);

        if (optimizer == OptimizerKind::AdamW) {
          const auto lg = model.loss_and_grad(params, mb);
          loss_sum += lg.loss;
          adamw_step(*art.adamw_state, params, lg.grad, config.adamw, config.adamw.lr * lr_scale);
        } else {
          auto& post = *art.posterior;
          std::vector<GradientSample> samples;
          samples.reserve(static_cast<std::size_t>(config.ivon.mc_samples));
          double sample_loss = 0.0;
          for (int m = 0; m < config.ivon.mc_samples; ++m) {
            Vector theta = ivon_sample(post, config.ivon, sample_rng);
            auto lg = model.loss_and_grad(theta, mb);
            sample_loss += lg.loss;
            samples.push_back({std::move(theta), std::move(lg.grad)});
          }
          loss_sum += sample_loss / config.ivon.mc_samples;
          ivon_step(post, samples, config.ivon, config.ivon.lr * lr_scale);
          const double min_prec = min_precision_factor(post, config.ivon);
          art.min_precision_factor = std::min(art.min_precision_factor, min_prec);
          if (!(min_prec > 0.0)) ++art.precision_violations;
          if (hooks.on_ivon_step) hooks.on_ivon_step(step, post);
        }
        ++step;
      }
      const double epoch_loss = loss_sum / static_cast<double>(steps_per_epoch);
      if (!std::isfinite(epoch_loss))
        throw NumericError(fmt::format("non-finite training loss in epoch {}", epoch));
      art.epoch_loss.push_back(epoch_loss);
    }
  } catch (const NumericError& e) {
    art.failed = true;
    art.diagnostics = fmt::format("{} seed {} diverged at step {}: {}", to_string(optimizer),
                                  seed, step, e.what());
  }
  art.steps = step;
  if (optimizer == OptimizerKind::AdamW) {
    art.params = std::move(params);
  } else {
    art.params = art.posterior->mean;
    if (art.posterior->hess_floor_hits > 0)
      std::cerr << fmt::format("warning: ivon seed {}: Hessian floored at zero {} times\n", seed,
                               art.posterior->hess_floor_hits);
  }
  return art;
}

std::string mc_method_name(int num_samples, double temperature) {
  if (temperature == 1.0) return fmt::format("IVON MC-{}", num_samples);
  return fmt::format("IVON MC-{} T={}", num_samples, temperature);
}

std::vector<EvalRow> evaluate_one(const TrainedArtifact& artifact, const Classifier& model,
                                  const Batch& dev, const ExperimentConfig& config) {
  dev.validate(model.num_classes());
  std::vector<EvalRow> rows;
  auto push = [&](std::string method, Matrix probs) {
    EvalRow row{std::move(method), artifact.seed, {}, make_batch(std::move(probs), dev)};
    row.metrics = compute_metrics(row.predictions, config.eval.ece_bins, budgets(config));
    rows.push_back(std::move(row));
  };

  if (artifact.optimizer == OptimizerKind::AdamW) {
    push("AdamW", predict_point(model, artifact.params, dev.features));
    return rows;
  }
  const auto& post = *artifact.posterior;
  push("IVON Mean", predict_mean(post, model, dev.features));
  const Rng eval_rng = stream(artifact.seed, Stream::Eval);
  for (const int k : config.eval.mc_samples)
    for (const double t : config.eval.temperatures)
      push(mc_method_name(k, t),
           predict_mc(post, config.ivon, model, dev.features, k, t, eval_rng));
  return rows;
}

std::vector<ReportRow> aggregate(const std::vector<EvalRow>& runs) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<MetricSet>> by_method;
  for (const auto& r : runs) {
    if (!by_method.contains(r.method)) order.push_back(r.method);
    by_method[r.method].push_back(r.metrics);
  }
  std::vector<ReportRow> rows;
  for (const auto& method : order) {
    const auto& xs = by_method[method];
    MetricSet mean;
    for (auto f : {&MetricSet::acc, &MetricSet::ece, &MetricSet::nll, &MetricSet::brier,
                   &MetricSet::c_at_1, &MetricSet::c_at_5, &MetricSet::c_at_10, &MetricSet::auc}) {
      double s = 0.0;
      for (const auto& x : xs) s += x.*f;
      mean.*f = s / static_cast<double>(xs.size());
    }
    rows.push_back({method, xs.size(), mean, metric_sd(xs, mean)});
  }
  return rows;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const Dataset& data) {
  config.validate();
  const auto model = build_classifier(config, data.train.dim(), data.num_classes);
  data.dev.validate(model->num_classes());

  const std::size_t n_seeds = config.seeds.size();
  std::vector<std::vector<EvalRow>> per_seed(n_seeds);
  std::vector<std::vector<TrainedArtifact>> per_seed_art(n_seeds);

  for_each_seed(config, [&](std::size_t i) {
    const auto seed = config.seeds[i];
    for (const auto opt : config.optimizers) {
      auto art = train_one(config, opt, seed, data.train, *model);
      if (!art.failed) {
        auto rows = evaluate_one(art, *model, data.dev, config);
        for (auto& r : rows) per_seed[i].push_back(std::move(r));
      }
      per_seed_art[i].push_back(std::move(art));
    }
  });

  ExperimentResult result;
  for (std::size_t i = 0; i < n_seeds; ++i) {
    for (auto& r : per_seed[i]) result.runs.push_back(std::move(r));
    for (auto& a : per_seed_art[i]) {
      if (a.failed) result.failures.push_back(a.diagnostics);
      result.artifacts.push_back(std::move(a));
    }
  }
  result.rows = aggregate(result.runs);
  return result;
}

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "mc_samples") return SweepAxis::McSamples;
  if (name == "temperature") return SweepAxis::Temperature;
  throw ConfigError("unknown sweep axis '" + name + "' (expected mc_samples or temperature)");
}

std::string to_string(SweepAxis axis) {
  return axis == SweepAxis::McSamples ? "mc_samples" : "temperature";
}

std::vector<SweepPoint> sweep(const ExperimentConfig& config, const Dataset& data,
                              SweepAxis axis, const std::vector<double>& values,
                              int fixed_samples, double fixed_temperature) {
  config.validate();
  if (values.empty()) throw ConfigError("sweep: empty value list");
  for (const double v : values) {
    if (axis == SweepAxis::McSamples && (v < 1.0 || v != std::floor(v)))
      throw ConfigError(fmt::format("sweep: mc_samples value {} is not a positive integer", v));
    if (axis == SweepAxis::Temperature && !(v > 0.0))
      throw ConfigError(fmt::format("sweep: temperature value {} must be > 0", v));
  }
  const auto model = build_classifier(config, data.train.dim(), data.num_classes);

  std::vector<std::vector<SweepPoint>> per_seed(config.seeds.size());
  std::vector<std::string> failures(config.seeds.size());
  for_each_seed(config, [&](std::size_t i) {
    const auto seed = config.seeds[i];
    const auto art = train_one(config, OptimizerKind::Ivon, seed, data.train, *model);
    if (art.failed) {
      failures[i] = art.diagnostics;
      return;
    }
    const Rng eval_rng = stream(seed, Stream::Eval);
    for (const double v : values) {
      const int k = axis == SweepAxis::McSamples ? static_cast<int>(v) : fixed_samples;
      const double t = axis == SweepAxis::Temperature ? v : fixed_temperature;
      PredictionBatch batch{
          predict_mc(*art.posterior, config.ivon, *model, data.dev.features, k, t, eval_rng),
          data.dev.labels};
      per_seed[i].push_back(
          {v, seed, compute_metrics(batch, config.eval.ece_bins, budgets(config))});
    }
  });
  for (const auto& f : failures)
    if (!f.empty()) throw NumericError("sweep: " + f);

  std::vector<SweepPoint> points;
  for (auto& seed_points : per_seed)
    for (auto& p : seed_points) points.push_back(p);
  return points;
}

}  // namespace ivb
