// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "ivb/core/rng.hpp"
#include "ivb/core/types.hpp"
#include "ivb/model/classifier.hpp"
#include "ivb/optim/ivon.hpp"

namespace ivb {

/// Row-wise class probabilities with the gold labels they are scored against.
struct PredictionBatch {
  Matrix probs;  // [n x C]
  Labels labels;

  Index size() const { return probs.rows(); }
  Index num_classes() const { return probs.cols(); }

  /// Each row must be a distribution (entries in [0, 1], sum within 1e-9).
  void validate() const;
};

/// softmax(logits(params)) for a point estimate.
Matrix predict_point(const Classifier& model, const Vector& params, const Matrix& features);

/// Prediction at the posterior mean.
Matrix predict_mean(const PosteriorState& state, const Classifier& model,
                    const Matrix& features);

/// Monte-Carlo prediction: draws K parameter samples at the given temperature,
/// averages the logits and applies softmax to the average. Sample k uses the
/// child stream rng.split(k), so the first K samples are shared across K and T.
Matrix predict_mc(const PosteriorState& state, const IvonConfig& config,
                  const Classifier& model, const Matrix& features, int num_samples,
                  double temperature, const Rng& rng);

struct MaxProb {
  Index label;
  double confidence;
};

/// argmax with ties going to the lowest class index.
template <typename Derived>
MaxProb maxprob(const Eigen::MatrixBase<Derived>& row) {
  if (row.size() == 0) throw InvalidArgument("maxprob: empty distribution");
  Index best = 0;
  for (Index i = 1; i < row.size(); ++i)
    if (row(i) > row(best)) best = i;
  return {best, static_cast<double>(row(best))};
}

/// Throws InvalidArgument unless the row is a distribution within 1e-9.
MaxProb checked_maxprob(const Eigen::Ref<const Vector>& row);

/// Answer when confidence >= threshold, abstain (nullopt) otherwise.
struct SelectiveDecision {
  std::optional<Index> answer;
  double confidence;

  bool abstained() const { return !answer.has_value(); }
};

SelectiveDecision select(Index label, double confidence, double threshold);

}  // namespace ivb
