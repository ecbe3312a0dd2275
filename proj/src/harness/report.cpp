// SPDX-License-Identifier: Apache-2.0
#include "ivb/harness/report.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <Eigen/Core>
#include <algorithm>
#include <fstream>

#include "ivb/version.hpp"

namespace ivb {
namespace {

std::string metric_fields(const MetricSet& m) {
  return fmt::format("{},{},{},{},{},{},{},{}", m.acc, m.ece, m.nll, m.brier, m.c_at_1, m.c_at_5,
                     m.c_at_10, m.auc);
}

}  // namespace

std::string report_csv(const std::vector<ReportRow>& rows) {
  std::string out = std::string(kReportCsvHeader) + "\n";
  for (const auto& r : rows)
    out += fmt::format("{},{},{},{}\n", r.method, r.seed_count, metric_fields(r.mean),
                       metric_fields(r.sd));
  return out;
}

std::string report_table(const std::vector<ReportRow>& rows) {
  std::size_t width = 6;
  for (const auto& r : rows) width = std::max(width, r.method.size());
  constexpr int kCol = 8;

  std::string out = fmt::format("{:<{}}  {:>5}", "Method", width, "Seeds");
  for (const char* h : {"ACC↑", "ECE↓", "NLL↓", "Brier↓", "C@1%↑", "C@5%↑", "C@10%↑", "AUC↓"})
    out += fmt::format("  {:>{}}", h, kCol);
  out += "\n";
  for (const auto& r : rows) {
    const auto& m = r.mean;
    out += fmt::format("{:<{}}  {:>5}", r.method, width, r.seed_count);
    for (const double v : {100.0 * m.acc, 100.0 * m.ece, m.nll, 100.0 * m.brier, 100.0 * m.c_at_1,
                           100.0 * m.c_at_5, 100.0 * m.c_at_10, 100.0 * m.auc})
      out += fmt::format("  {:>{}.2f}", v, kCol);
    out += "\n";
  }
  out += "ACC and C@R in percent; ECE, Brier score and AUC are 100x; mean over seeds.\n";
  return out;
}

std::string runs_csv(const std::vector<EvalRow>& runs) {
  std::string out = "method,seed,acc,ece,nll,brier,c_at_1,c_at_5,c_at_10,auc\n";
  for (const auto& r : runs)
    out += fmt::format("{},{},{}\n", r.method, r.seed, metric_fields(r.metrics));
  return out;
}

std::string reliability_csv(const std::vector<EvalRow>& runs, Index n_bins) {
  std::string out = "method,seed,bin,lower,upper,count,mean_confidence,accuracy\n";
  for (const auto& r : runs) {
    const auto records = make_records(r.predictions);
    const auto table = reliability_table(records, n_bins);
    for (std::size_t b = 0; b < table.size(); ++b) {
      const auto& bin = table[b];
      out += fmt::format("{},{},{},{},{},{},{},{}\n", r.method, r.seed, b, bin.lower, bin.upper,
                         bin.count, bin.mean_confidence, bin.accuracy);
    }
  }
  return out;
}

std::string risk_coverage_csv(const std::vector<EvalRow>& runs) {
  std::string out = "method,seed,coverage,risk\n";
  for (const auto& r : runs)
    for (const auto& p : risk_coverage_curve(make_records(r.predictions)))
      out += fmt::format("{},{},{},{}\n", r.method, r.seed, p.coverage, p.risk);
  return out;
}

std::string selective_csv(const std::vector<EvalRow>& runs, const std::vector<double>& thresholds) {
  std::string out = "method,seed,threshold,coverage,risk\n";
  for (const auto& r : runs) {
    const auto records = make_records(r.predictions);
    for (const double gamma : thresholds) {
      std::size_t answered = 0;
      std::size_t wrong = 0;
      for (const auto& rec : records) {
        const auto decision = select(rec.predicted, rec.confidence, gamma);
        if (decision.abstained()) continue;
        ++answered;
        if (*decision.answer != rec.gold) ++wrong;
      }
      const double coverage = static_cast<double>(answered) / static_cast<double>(records.size());
      const double risk =
          answered == 0 ? 0.0 : static_cast<double>(wrong) / static_cast<double>(answered);
      out += fmt::format("{},{},{},{},{}\n", r.method, r.seed, gamma, coverage, risk);
    }
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
  std::string out = std::string(kCurveCsvHeader) + "\n";
  for (const auto& p : points)
    out += fmt::format("{},{},{},{},{},{}\n", p.axis_value, p.seed, p.metrics.acc, p.metrics.ece,
                       p.metrics.c_at_5, p.metrics.auc);
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

void emit_report(const std::filesystem::path& dir, const ExperimentConfig& config,
                 const ExperimentResult& result) {
  if (result.rows.empty() && result.failures.empty())
    throw InvalidArgument("emit_report: no rows to report");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());

  std::string table = report_table(result.rows);
  for (const auto& f : result.failures) table += "FAILED: " + f + "\n";
  write_text(dir / "report.txt", table);
  write_text(dir / "report.csv", report_csv(result.rows));
  write_text(dir / "runs.csv", runs_csv(result.runs));
  write_text(dir / "reliability.csv", reliability_csv(result.runs, config.eval.ece_bins));
  write_text(dir / "risk_coverage.csv", risk_coverage_csv(result.runs));
  write_text(dir / "selective.csv", selective_csv(result.runs, config.eval.thresholds));

  nlohmann::ordered_json meta;
  meta["tool"] = "ivonbench";
  meta["version"] = kVersion;
  meta["eigen"] = fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION,
                              EIGEN_MINOR_VERSION);
  meta["config_hash"] = fmt::format("{:016x}", config.hash());
  meta["seeds"] = config.seeds;
  std::vector<std::string> optimizers;
  for (auto o : config.optimizers) optimizers.push_back(to_string(o));
  meta["optimizers"] = optimizers;
  meta["failures"] = result.failures;
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (const auto& a : result.artifacts) {
    nlohmann::ordered_json run;
    run["optimizer"] = to_string(a.optimizer);
    run["seed"] = a.seed;
    run["steps"] = a.steps;
    run["failed"] = a.failed;
    run["epoch_loss"] = a.epoch_loss;
    if (a.posterior) {
      run["min_precision_factor"] = a.min_precision_factor;
      run["hess_floor_hits"] = a.posterior->hess_floor_hits;
    }
    runs.push_back(run);
  }
  meta["runs"] = runs;
  meta["config"] = config.canonical();
  write_text(dir / "metadata.json", meta.dump(2) + "\n");
}

}  // namespace ivb
