// SPDX-License-Identifier: Apache-2.0
#include "ivb/eval/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace ivb {
namespace {

void require_records(std::span<const EvalRecord> records, const char* who) {
  if (records.empty()) throw InvalidArgument(std::string(who) + ": no records");
}

void require_batch(const PredictionBatch& batch, const char* who) {
  if (batch.size() < 1) throw InvalidArgument(std::string(who) + ": empty batch");
  if (batch.labels.size() != batch.size())
    throw ShapeError(std::string(who) + ": label count does not match rows");
}

}  // namespace

std::vector<EvalRecord> make_records(const PredictionBatch& batch) {
  require_batch(batch, "make_records");
  std::vector<EvalRecord> records;
  records.reserve(static_cast<std::size_t>(batch.size()));
  for (Index i = 0; i < batch.size(); ++i) {
    const MaxProb mp = maxprob(batch.probs.row(i));
    records.push_back({mp.confidence, mp.label, batch.labels[i]});
  }
  return records;
}

double accuracy(const PredictionBatch& batch) {
  require_batch(batch, "accuracy");
  Index correct = 0;
  for (Index i = 0; i < batch.size(); ++i)
    if (maxprob(batch.probs.row(i)).label == batch.labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(batch.size());
}

double nll(const PredictionBatch& batch) {
  require_batch(batch, "nll");
  double total = 0.0;
  for (Index i = 0; i < batch.size(); ++i)
    total -= std::log(std::max(batch.probs(i, batch.labels[i]), 1e-12));
  return total / static_cast<double>(batch.size());
}

double brier(const PredictionBatch& batch) {
  require_batch(batch, "brier");
  double total = 0.0;
  for (Index i = 0; i < batch.size(); ++i) {
    Vector diff = batch.probs.row(i).transpose();
    diff[batch.labels[i]] -= 1.0;
    total += diff.squaredNorm();
  }
  return total / static_cast<double>(batch.size());
}

Index confidence_bin(double confidence, Index n_bins) {
  if (n_bins < 1) throw InvalidArgument("ece: n_bins must be >= 1");
  const double nb = static_cast<double>(n_bins);
  auto bin = static_cast<Index>(std::floor(confidence * nb));
  bin = std::clamp<Index>(bin, 0, n_bins - 1);
  // Snap against the edges b / n_bins exactly as the bin boundaries define them.
  while (bin + 1 < n_bins && confidence >= static_cast<double>(bin + 1) / nb) ++bin;
  while (bin > 0 && confidence < static_cast<double>(bin) / nb) --bin;
  return bin;
}

std::vector<ReliabilityBin> reliability_table(std::span<const EvalRecord> records,
                                              Index n_bins) {
  require_records(records, "reliability_table");
  if (n_bins < 1) throw InvalidArgument("reliability_table: n_bins must be >= 1");
  std::vector<ReliabilityBin> bins(static_cast<std::size_t>(n_bins));
  std::vector<double> conf_sum(bins.size(), 0.0);
  std::vector<Index> hits(bins.size(), 0);
  for (const auto& r : records) {
    const auto b = static_cast<std::size_t>(confidence_bin(r.confidence, n_bins));
    bins[b].count += 1;
    conf_sum[b] += r.confidence;
    if (r.correct()) hits[b] += 1;
  }
  for (std::size_t b = 0; b < bins.size(); ++b) {
    auto& bin = bins[b];
    bin.lower = static_cast<double>(b) / static_cast<double>(n_bins);
    bin.upper = static_cast<double>(b + 1) / static_cast<double>(n_bins);
    if (bin.count > 0) {
      bin.mean_confidence = conf_sum[b] / static_cast<double>(bin.count);
      bin.accuracy = static_cast<double>(hits[b]) / static_cast<double>(bin.count);
    }
  }
  return bins;
}

double ece(std::span<const EvalRecord> records, Index n_bins) {
  const auto table = reliability_table(records, n_bins);
  const double n = static_cast<double>(records.size());
  double total = 0.0;
  for (const auto& bin : table) {
    if (bin.count == 0) continue;
    total += static_cast<double>(bin.count) / n * std::abs(bin.accuracy - bin.mean_confidence);
  }
  return total;
}

std::vector<EvalRecord> selective_order(std::span<const EvalRecord> records) {
  std::vector<EvalRecord> sorted(records.begin(), records.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const EvalRecord& a, const EvalRecord& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return !a.correct() && b.correct();
  });
  return sorted;
}

std::vector<RiskCoveragePoint> risk_coverage_curve(std::span<const EvalRecord> records) {
  require_records(records, "risk_coverage_curve");
  const auto sorted = selective_order(records);
  const double n = static_cast<double>(sorted.size());
  std::vector<RiskCoveragePoint> curve;
  curve.reserve(sorted.size());
  Index errors = 0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    if (!sorted[k].correct()) ++errors;
    const double answered = static_cast<double>(k + 1);
    curve.push_back({answered / n, static_cast<double>(errors) / answered});
  }
  return curve;
}

double coverage_at_risk(std::span<const EvalRecord> records, double risk_budget) {
  require_records(records, "coverage_at_risk");
  if (!(risk_budget >= 0.0 && risk_budget <= 1.0))
    throw InvalidArgument("coverage_at_risk: risk budget must be in [0, 1]");
  double best = 0.0;
  for (const auto& point : risk_coverage_curve(records))
    if (point.risk <= risk_budget) best = point.coverage;
  return best;
}

double risk_coverage_auc(std::span<const EvalRecord> records) {
  const auto curve = risk_coverage_curve(records);
  double total = 0.0;
  for (const auto& point : curve) total += point.risk;
  return total / static_cast<double>(curve.size());
}

MetricSet compute_metrics(const PredictionBatch& batch, Index n_bins,
                          const std::array<double, 3>& risk_budgets) {
  const auto records = make_records(batch);
  MetricSet m;
  m.acc = accuracy(batch);
  m.ece = ece(records, n_bins);
  m.nll = nll(batch);
  m.brier = brier(batch);
  m.c_at_1 = coverage_at_risk(records, risk_budgets[0]);
  m.c_at_5 = coverage_at_risk(records, risk_budgets[1]);
  m.c_at_10 = coverage_at_risk(records, risk_budgets[2]);
  m.auc = risk_coverage_auc(records);
  return m;
}

}  // namespace ivb
