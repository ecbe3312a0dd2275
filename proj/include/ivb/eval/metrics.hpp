// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <span>
#include <vector>

#include "ivb/core/types.hpp"
#include "ivb/predict/predict.hpp"

namespace ivb {

/// (confidence, predicted, gold) for one example.
struct EvalRecord {
  double confidence;
  Index predicted;
  Index gold;

  bool correct() const { return predicted == gold; }
};

struct RiskCoveragePoint {
  double coverage;
  double risk;
};

struct ReliabilityBin {
  double lower;
  double upper;
  Index count;
  double mean_confidence;  // 0 for empty bins
  double accuracy;         // 0 for empty bins
};

/// MaxProb records for every row of a prediction batch.
std::vector<EvalRecord> make_records(const PredictionBatch& batch);

double accuracy(const PredictionBatch& batch);

/// Negative log-likelihood of the gold class, clamped at 1e-12.
double nll(const PredictionBatch& batch);

/// Mean squared distance between each row and the one-hot gold vector, in [0, 2].
double brier(const PredictionBatch& batch);

/// Bin of a confidence among n_bins equal-width bins: [b/n, (b+1)/n), with the
/// last bin closed on the right.
Index confidence_bin(double confidence, Index n_bins);

/// Expected calibration error over n_bins equal-width confidence bins.
double ece(std::span<const EvalRecord> records, Index n_bins = 10);

std::vector<ReliabilityBin> reliability_table(std::span<const EvalRecord> records,
                                              Index n_bins = 10);

/// Records sorted by descending confidence; among equal confidences
/// incorrect predictions come first.
std::vector<EvalRecord> selective_order(std::span<const EvalRecord> records);

/// Largest answered fraction k/n whose top-k error rate is <= risk_budget.
double coverage_at_risk(std::span<const EvalRecord> records, double risk_budget);

/// (k/n, errors in top k / k) for k = 1..n.
std::vector<RiskCoveragePoint> risk_coverage_curve(std::span<const EvalRecord> records);

/// Mean of the prefix risks, i.e. the step integral of the risk-coverage curve.
double risk_coverage_auc(std::span<const EvalRecord> records);

/// Every metric for one prediction batch, stored as raw fractions.
struct MetricSet {
  double acc = 0.0;
  double ece = 0.0;
  double nll = 0.0;
  double brier = 0.0;
  double c_at_1 = 0.0;
  double c_at_5 = 0.0;
  double c_at_10 = 0.0;
  double auc = 0.0;
};

/// C@R is reported at the three given risk budgets.
MetricSet compute_metrics(const PredictionBatch& batch, Index n_bins = 10,
                          const std::array<double, 3>& risk_budgets = {0.01, 0.05, 0.10});

}  // namespace ivb
