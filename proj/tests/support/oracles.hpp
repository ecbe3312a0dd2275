// SPDX-License-Identifier: Apache-2.0
// Brute-force reference implementations used as test oracles. Written
// straight from the metric definitions, sharing no code with src/.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

struct Rec {
  double conf;
  int pred;
  int gold;
};

// ECE with equal-width bins: bin b holds confidences in [b/B, (b+1)/B), the
// last bin also holds 1. Each bin scans every record.
inline double ece(const std::vector<Rec>& rs, int bins) {
  const double n = static_cast<double>(rs.size());
  double total = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double lo = static_cast<double>(b) / bins;
    const double hi = static_cast<double>(b + 1) / bins;
    double count = 0, conf = 0, hit = 0;
    for (const auto& r : rs) {
      const bool in = r.conf >= lo && (r.conf < hi || (b == bins - 1 && r.conf <= hi));
      if (!in) continue;
      count += 1;
      conf += r.conf;
      hit += r.pred == r.gold ? 1 : 0;
    }
    if (count > 0) total += count / n * std::abs(hit / count - conf / count);
  }
  return total;
}

// Number of records ranked ahead of record i: strictly more confident, or
// equally confident and incorrect while i is correct (incorrect first), or
// equal on both with a lower index.
inline std::size_t rank_of(const std::vector<Rec>& rs, std::size_t i) {
  std::size_t ahead = 0;
  const bool ci = rs[i].pred == rs[i].gold;
  for (std::size_t j = 0; j < rs.size(); ++j) {
    if (j == i) continue;
    const bool cj = rs[j].pred == rs[j].gold;
    if (rs[j].conf > rs[i].conf) ++ahead;
    else if (rs[j].conf == rs[i].conf && !cj && ci) ++ahead;
    else if (rs[j].conf == rs[i].conf && cj == ci && j < i) ++ahead;
  }
  return ahead;
}

// O(n^2): for every prefix length k, count errors among the k top-ranked.
inline std::vector<double> prefix_risks(const std::vector<Rec>& rs) {
  std::vector<double> risks;
  for (std::size_t k = 1; k <= rs.size(); ++k) {
    double errors = 0;
    for (std::size_t i = 0; i < rs.size(); ++i)
      if (rank_of(rs, i) < k && rs[i].pred != rs[i].gold) errors += 1;
    risks.push_back(errors / static_cast<double>(k));
  }
  return risks;
}

inline double coverage_at_risk(const std::vector<Rec>& rs, double r) {
  const auto risks = prefix_risks(rs);
  double best = 0.0;
  for (std::size_t k = 1; k <= risks.size(); ++k)
    if (risks[k - 1] <= r) best = static_cast<double>(k) / static_cast<double>(rs.size());
  return best;
}

inline double auc(const std::vector<Rec>& rs) {
  const auto risks = prefix_risks(rs);
  double s = 0.0;
  for (double x : risks) s += x;
  return s / static_cast<double>(risks.size());
}

// Central finite differences of f at x with step eps.
inline std::vector<double> central_diff(const std::function<double(const std::vector<double>&)>& f,
                                        std::vector<double> x, double eps) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + eps;
    const double up = f(x);
    x[i] = keep - eps;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2 * eps);
  }
  return g;
}

}  // namespace oracle
