// SPDX-License-Identifier: Apache-2.0
#include "ivb/harness/dataset.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ivb/core/rng.hpp"

namespace ivb {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

Dataset generate_dataset(const DatasetSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const Index c = spec.num_classes;
  const Index d = spec.dim;

  Matrix centers(c, d);
  for (Index k = 0; k < c; ++k) {
    Vector dir = sample_standard_normal(rng, d);
    centers.row(k) = spec.separation * dir.normalized().transpose();
  }

  auto draw = [&](Index n) {
    Batch batch{Matrix(n, d), Labels(n)};
    for (Index i = 0; i < n; ++i) {
      const auto cls = static_cast<Index>(rng.below(static_cast<std::uint64_t>(c)));
      for (Index j = 0; j < d; ++j) batch.features(i, j) = centers(cls, j) + rng.normal();
      Index label = cls;
      if (rng.uniform() < spec.label_noise)
        label = static_cast<Index>(rng.below(static_cast<std::uint64_t>(c)));
      batch.labels[i] = static_cast<int>(label);
    }
    return batch;
  };

  Dataset data;
  data.train = draw(spec.train_size);
  data.dev = draw(spec.dev_size);
  data.num_classes = c;
  data.centers = std::move(centers);
  return data;
}

Batch load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CSV file '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  const auto header = split_fields(strip_cr(line));
  if (header.empty() || header.back() != "label")
    throw DataError(path.string() + ": schema error, last column must be 'label'");
  const Index d = static_cast<Index>(header.size()) - 1;
  for (Index j = 0; j < d; ++j) {
    if (header[static_cast<std::size_t>(j)] != fmt::format("feature_{}", j))
      throw DataError(fmt::format("{}: schema error, column {} must be 'feature_{}'",
                                  path.string(), j, j));
  }

  std::vector<double> values;
  std::vector<int> labels;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (static_cast<Index>(fields.size()) != d + 1)
      throw DataError(fmt::format("{}:{}: expected {} fields, got {}", path.string(), line_no,
                                  d + 1, fields.size()));
    for (Index j = 0; j < d; ++j) {
      const auto& cell = fields[static_cast<std::size_t>(j)];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v))
        throw DataError(fmt::format("{}:{}: feature_{} is not a finite number: '{}'",
                                    path.string(), line_no, j, cell));
      values.push_back(v);
    }
    const auto& cell = fields.back();
    int label = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), label);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || label < 0)
      throw DataError(fmt::format("{}:{}: label must be a non-negative integer: '{}'",
                                  path.string(), line_no, cell));
    labels.push_back(label);
  }
  if (labels.empty()) throw DataError(path.string() + ": no data rows");

  const auto n = static_cast<Index>(labels.size());
  Batch batch;
  batch.features = Eigen::Map<const RowMatrix>(values.data(), n, d);
  batch.labels = Eigen::Map<const Labels>(labels.data(), n);
  return batch;
}

void write_csv(const std::filesystem::path& path, const Batch& batch) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write CSV file '" + path.string() + "'");
  for (Index j = 0; j < batch.dim(); ++j) out << fmt::format("feature_{},", j);
  out << "label\n";
  for (Index i = 0; i < batch.size(); ++i) {
    for (Index j = 0; j < batch.dim(); ++j) out << fmt::format("{},", batch.features(i, j));
    out << batch.labels[i] << '\n';
  }
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

Dataset load_dataset(const ExperimentConfig& config) {
  if (!config.train_csv) return generate_dataset(config.dataset);
  Dataset data;
  data.train = load_csv(*config.train_csv);
  data.dev = load_csv(*config.dev_csv);
  if (data.train.dim() != data.dev.dim())
    throw DataError("train and dev CSV files have different feature widths");
  const int max_label = std::max(data.train.labels.maxCoeff(), data.dev.labels.maxCoeff());
  data.num_classes = max_label + 1;
  if (data.num_classes < 2) throw DataError("CSV data must contain at least two classes");
  return data;
}

}  // namespace ivb
