// SPDX-License-Identifier: Apache-2.0
#include "ivb/optim/ivon.hpp"

#include <cmath>
#include <string>

namespace ivb {

void IvonConfig::validate() const {
  if (!(ess > 0.0)) throw ConfigError("ivon: ess must be > 0");
  if (!(hess_init >= 0.0)) throw ConfigError("ivon: hess_init must be >= 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("ivon: weight_decay must be >= 0");
  if (!(hess_init + weight_decay > 0.0))
    throw ConfigError("ivon: hess_init + weight_decay must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw ConfigError("ivon: beta1 must be in (0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw ConfigError("ivon: beta2 must be in (0, 1)");
  if (!(lr >= 0.0)) throw ConfigError("ivon: lr must be >= 0");
  if (mc_samples < 1) throw ConfigError("ivon: mc_samples must be >= 1");
}

PosteriorState init_posterior(const Vector& initial_mean, const IvonConfig& config) {
  config.validate();
  if (!initial_mean.allFinite()) throw NumericError("init_posterior: non-finite mean");
  const Index p = initial_mean.size();
  return {initial_mean, Vector::Constant(p, config.hess_init), Vector::Zero(p), 0, 0};
}

Vector posterior_stddev(const PosteriorState& state, const IvonConfig& config,
                        double temperature) {
  if (!(temperature > 0.0))
    throw InvalidArgument("posterior_stddev: temperature must be > 0");
  Vector sd = (temperature * config.ess * (state.hess.array() + config.weight_decay))
                  .rsqrt()
                  .matrix();
  if (!sd.allFinite()) throw NumericError("posterior_stddev: non-finite variance");
  return sd;
}

Vector ivon_sample(const PosteriorState& state, const IvonConfig& config, Rng& rng,
                   double temperature) {
  const Vector sd = posterior_stddev(state, config, temperature);
  Vector theta = state.mean;
  for (Index i = 0; i < theta.size(); ++i) theta[i] += rng.normal() * sd[i];
  return theta;
}

Vector hessian_estimate(const PosteriorState& state, const IvonConfig& config,
                        const GradientSample& sample) {
  // 1 / sigma^2 = ess * (h + delta)
  const auto precision = config.ess * (state.hess.array() + config.weight_decay);
  return (sample.grad.array() * (sample.params - state.mean).array() * precision).matrix();
}

void ivon_step(PosteriorState& state, std::span<const GradientSample> samples,
               const IvonConfig& config, double lr) {
  if (samples.empty()) throw InvalidArgument("ivon_step: no gradient samples");
  const Index p = state.num_params();
  Vector grad = Vector::Zero(p);
  Vector hess_hat = Vector::Zero(p);
  for (const auto& sample : samples) {
    if (sample.params.size() != p || sample.grad.size() != p)
      throw ShapeError("ivon_step: sample length does not match posterior");
    if (!sample.grad.allFinite() || !sample.params.allFinite())
      throw NumericError("ivon_step: non-finite gradient sample");
    grad += sample.grad;
    hess_hat += hessian_estimate(state, config, sample);
  }
  const double inv_count = 1.0 / static_cast<double>(samples.size());
  grad *= inv_count;
  hess_hat *= inv_count;

  const double b1 = config.beta1;
  const double b2 = config.beta2;
  const double delta = config.weight_decay;

  state.momentum = b1 * state.momentum + (1.0 - b1) * grad;

  const auto h = state.hess.array();
  Vector next_hess =
      (b2 * h + (1.0 - b2) * hess_hat.array() +
       0.5 * (1.0 - b2) * (1.0 - b2) * (h - hess_hat.array()).square() / (h + delta))
          .matrix();
  for (Index i = 0; i < p; ++i) {
    if (next_hess[i] < 0.0) {
      next_hess[i] = 0.0;
      ++state.hess_floor_hits;
    }
  }
  state.hess = std::move(next_hess);

  state.step += 1;
  const double debias = 1.0 - std::pow(b1, static_cast<double>(state.step));
  state.mean.array() -= lr * (state.momentum.array() / debias + delta * state.mean.array()) /
                        (state.hess.array() + delta);

  if (!state.mean.allFinite() || !state.hess.allFinite() || !state.momentum.allFinite())
    throw NumericError("ivon_step: non-finite update at step " + std::to_string(state.step));
  if (!(min_precision_factor(state, config) > 0.0))
    throw NumericError("ivon_step: posterior variance is no longer positive at step " +
                       std::to_string(state.step));
}

double min_precision_factor(const PosteriorState& state, const IvonConfig& config) {
  return state.hess.minCoeff() + config.weight_decay;
}

}  // namespace ivb
