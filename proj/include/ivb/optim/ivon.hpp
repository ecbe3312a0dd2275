// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>

#include "ivb/core/rng.hpp"
#include "ivb/core/types.hpp"

namespace ivb {

struct IvonConfig {
  double ess = 1e7;          // effective sample size lambda
  double hess_init = 1e-3;   // h0
  double weight_decay = 0.0; // delta, also the prior precision factor
  double beta1 = 0.9;
  double beta2 = 1.0 - 1e-5;
  double lr = 0.03;
  int mc_samples = 1;        // parameter samples per training step

  void validate() const;
};

/// Diagonal Gaussian posterior N(mean, 1 / (ess * (hess + weight_decay))).
struct PosteriorState {
  Vector mean;
  Vector hess;
  Vector momentum;
  std::int64_t step = 0;
  // Coordinates where the Hessian recursion had to be floored at zero.
  std::int64_t hess_floor_hits = 0;

  Index num_params() const { return mean.size(); }
};

/// One parameter draw together with the loss gradient evaluated at it.
struct GradientSample {
  Vector params;
  Vector grad;
};

PosteriorState init_posterior(const Vector& initial_mean, const IvonConfig& config);

/// Per-coordinate 1 / sqrt(temperature * ess * (hess + weight_decay)).
Vector posterior_stddev(const PosteriorState& state, const IvonConfig& config,
                        double temperature = 1.0);

/// mean + eps * stddev with eps ~ N(0, I). Temperature rescales the effective
/// sample size, so large temperatures concentrate on the mean.
Vector ivon_sample(const PosteriorState& state, const IvonConfig& config, Rng& rng,
                   double temperature = 1.0);

/// Reparameterised diagonal Hessian estimate grad * (params - mean) / sigma^2.
Vector hessian_estimate(const PosteriorState& state, const IvonConfig& config,
                        const GradientSample& sample);

/// One IVON update from gradients taken at samples of the current posterior:
///
///   h_hat = mean over samples of grad * (theta - m) / sigma^2
///   g     = mean over samples of grad
///   momentum <- beta1 momentum + (1 - beta1) g
///   h <- beta2 h + (1 - beta2) h_hat + (1 - beta2)^2 (h - h_hat)^2 / (2 (h + delta))
///   m <- m - lr (momentum / (1 - beta1^t) + delta m) / (h + delta)
///
/// Throws NumericError if the update is non-finite or h + delta <= 0.
void ivon_step(PosteriorState& state, std::span<const GradientSample> samples,
               const IvonConfig& config, double lr);

inline void ivon_step(PosteriorState& state, const Vector& params_used, const Vector& grad,
                      const IvonConfig& config, double lr) {
  const GradientSample sample{params_used, grad};
  ivon_step(state, std::span<const GradientSample>(&sample, 1), config, lr);
}

/// min_i (hess_i + weight_decay); positive for every valid posterior.
double min_precision_factor(const PosteriorState& state, const IvonConfig& config);

}  // namespace ivb
