// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ivb/harness/experiment.hpp"

namespace ivb {

/// Column order of report.csv; every metric is followed later by its _sd column.
inline constexpr const char* kReportCsvHeader =
    "method,seed_count,acc,ece,nll,brier,c_at_1,c_at_5,c_at_10,auc,"
    "acc_sd,ece_sd,nll_sd,brier_sd,c_at_1_sd,c_at_5_sd,c_at_10_sd,auc_sd";

inline constexpr const char* kCurveCsvHeader = "axis_value,seed,acc,ece,c_at_5,auc";

/// Raw (unscaled) aggregate rows.
std::string report_csv(const std::vector<ReportRow>& rows);

/// Aligned table. ACC and C@R are percentages, ECE/Brier/AUC are scaled by
/// 100, NLL is raw; arrows mark the better direction.
std::string report_table(const std::vector<ReportRow>& rows);

/// Per-seed rows: method,seed,acc,ece,nll,brier,c_at_1,c_at_5,c_at_10,auc.
std::string runs_csv(const std::vector<EvalRow>& runs);

/// method,seed,bin,lower,upper,count,mean_confidence,accuracy
std::string reliability_csv(const std::vector<EvalRow>& runs, Index n_bins);

/// method,seed,coverage,risk
std::string risk_coverage_csv(const std::vector<EvalRow>& runs);

/// method,seed,threshold,coverage,risk: the answer/abstain rule at each threshold;
/// risk is the error rate among answered examples (0 when nothing is answered).
std::string selective_csv(const std::vector<EvalRow>& runs, const std::vector<double>& thresholds);

std::string sweep_csv(const std::vector<SweepPoint>& points);

/// Writes report.txt, report.csv, runs.csv, reliability.csv,
/// risk_coverage.csv, selective.csv and metadata.json into dir.
/// Throws Error if the directory cannot be written.
void emit_report(const std::filesystem::path& dir, const ExperimentConfig& config,
                 const ExperimentResult& result);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace ivb
