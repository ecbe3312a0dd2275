// SPDX-License-Identifier: Apache-2.0
#include "ivb/predict/predict.hpp"

#include <cmath>
#include <string>

#include "ivb/core/numeric.hpp"

namespace ivb {
namespace {

constexpr double kRowSumTol = 1e-9;

bool is_distribution(const Eigen::Ref<const Vector>& row) {
  if (row.size() == 0 || !row.allFinite()) return false;
  if ((row.array() < 0.0).any() || (row.array() > 1.0).any()) return false;
  return std::abs(row.sum() - 1.0) <= kRowSumTol;
}

}  // namespace

void PredictionBatch::validate() const {
  if (probs.rows() < 1) throw InvalidArgument("prediction batch: empty");
  if (labels.size() != probs.rows())
    throw ShapeError("prediction batch: label count does not match rows");
  for (Index i = 0; i < probs.rows(); ++i) {
    if (!is_distribution(probs.row(i).transpose()))
      throw InvalidArgument("prediction batch: row " + std::to_string(i) +
                            " is not a probability distribution");
    if (labels[i] < 0 || labels[i] >= probs.cols())
      throw InvalidArgument("prediction batch: label out of range at row " +
                            std::to_string(i));
  }
}

Matrix predict_point(const Classifier& model, const Vector& params, const Matrix& features) {
  return softmax_rows(model.logits(params, features));
}

Matrix predict_mean(const PosteriorState& state, const Classifier& model,
                    const Matrix& features) {
  if (state.mean.size() != model.num_params())
    throw ShapeError("predict_mean: posterior length does not match model");
  return predict_point(model, state.mean, features);
}

Matrix predict_mc(const PosteriorState& state, const IvonConfig& config,
                  const Classifier& model, const Matrix& features, int num_samples,
                  double temperature, const Rng& rng) {
  if (num_samples < 1) throw InvalidArgument("predict_mc: need at least one sample");
  if (!(temperature > 0.0)) throw InvalidArgument("predict_mc: temperature must be > 0");
  if (state.mean.size() != model.num_params())
    throw ShapeError("predict_mc: posterior length does not match model");

  Matrix logit_sum = Matrix::Zero(features.rows(), model.num_classes());
  for (int k = 0; k < num_samples; ++k) {
    Rng sample_rng = rng.split(static_cast<std::uint64_t>(k));
    const Vector theta = ivon_sample(state, config, sample_rng, temperature);
    logit_sum += model.logits(theta, features);
  }
  return softmax_rows(logit_sum / static_cast<double>(num_samples));
}

MaxProb checked_maxprob(const Eigen::Ref<const Vector>& row) {
  if (!is_distribution(row)) throw InvalidArgument("maxprob: invalid distribution");
  return maxprob(row);
}

SelectiveDecision select(Index label, double confidence, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw InvalidArgument("select: threshold must be in [0, 1]");
  if (confidence >= threshold) return {label, confidence};
  return {std::nullopt, confidence};
}

}  // namespace ivb
