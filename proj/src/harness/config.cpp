// SPDX-License-Identifier: Apache-2.0
#include "ivb/harness/config.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace ivb {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + key + "' expects a number, got '" + value + "'");
  }
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
  std::int64_t v = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("config: '" + key + "' expects an integer, got '" + value + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("config: '" + key + "' expects an unsigned integer, got '" + value + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw ConfigError("config: '" + key + "' expects true/false, got '" + value + "'");
}

template <typename T, typename F>
std::vector<T> parse_list(const std::string& key, const std::string& value, F parse_one) {
  std::vector<T> out;
  for (const auto& item : split_list(value)) out.push_back(static_cast<T>(parse_one(key, item)));
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["dataset.classes"] = [](auto& c, auto& k, auto& v) { c.dataset.num_classes = parse_int(k, v); };
    t["dataset.dim"] = [](auto& c, auto& k, auto& v) { c.dataset.dim = parse_int(k, v); };
    t["dataset.train_size"] = [](auto& c, auto& k, auto& v) { c.dataset.train_size = parse_int(k, v); };
    t["dataset.dev_size"] = [](auto& c, auto& k, auto& v) { c.dataset.dev_size = parse_int(k, v); };
    t["dataset.separation"] = [](auto& c, auto& k, auto& v) { c.dataset.separation = parse_double(k, v); };
    t["dataset.label_noise"] = [](auto& c, auto& k, auto& v) { c.dataset.label_noise = parse_double(k, v); };
    t["dataset.seed"] = [](auto& c, auto& k, auto& v) { c.dataset.seed = parse_u64(k, v); };
    t["dataset.train_csv"] = [](auto& c, auto&, auto& v) { c.train_csv = v; };
    t["dataset.dev_csv"] = [](auto& c, auto&, auto& v) { c.dev_csv = v; };

    t["model.hidden"] = [](auto& c, auto& k, auto& v) {
      c.hidden = parse_list<Index>(k, v, parse_int);
    };
    t["lora.enabled"] = [](auto& c, auto& k, auto& v) { c.lora.enabled = parse_bool(k, v); };
    t["lora.rank"] = [](auto& c, auto& k, auto& v) { c.lora.rank = parse_int(k, v); };
    t["lora.alpha"] = [](auto& c, auto& k, auto& v) { c.lora.alpha = parse_double(k, v); };
    t["lora.base_seed"] = [](auto& c, auto& k, auto& v) { c.lora.base_seed = parse_u64(k, v); };

    t["adamw.lr"] = [](auto& c, auto& k, auto& v) { c.adamw.lr = parse_double(k, v); };
    t["adamw.beta1"] = [](auto& c, auto& k, auto& v) { c.adamw.beta1 = parse_double(k, v); };
    t["adamw.beta2"] = [](auto& c, auto& k, auto& v) { c.adamw.beta2 = parse_double(k, v); };
    t["adamw.eps"] = [](auto& c, auto& k, auto& v) { c.adamw.eps = parse_double(k, v); };
    t["adamw.weight_decay"] = [](auto& c, auto& k, auto& v) { c.adamw.weight_decay = parse_double(k, v); };

    t["ivon.lr"] = [](auto& c, auto& k, auto& v) { c.ivon.lr = parse_double(k, v); };
    t["ivon.ess"] = [](auto& c, auto& k, auto& v) { c.ivon.ess = parse_double(k, v); };
    t["ivon.hess_init"] = [](auto& c, auto& k, auto& v) { c.ivon.hess_init = parse_double(k, v); };
    t["ivon.weight_decay"] = [](auto& c, auto& k, auto& v) { c.ivon.weight_decay = parse_double(k, v); };
    t["ivon.beta1"] = [](auto& c, auto& k, auto& v) { c.ivon.beta1 = parse_double(k, v); };
    t["ivon.beta2"] = [](auto& c, auto& k, auto& v) { c.ivon.beta2 = parse_double(k, v); };
    t["ivon.mc_samples"] = [](auto& c, auto& k, auto& v) {
      c.ivon.mc_samples = static_cast<int>(parse_int(k, v));
    };

    t["train.epochs"] = [](auto& c, auto& k, auto& v) { c.train.epochs = static_cast<int>(parse_int(k, v)); };
    t["train.batch_size"] = [](auto& c, auto& k, auto& v) { c.train.batch_size = parse_int(k, v); };
    t["train.optimizers"] = [](auto& c, auto&, auto& v) {
      c.optimizers.clear();
      for (const auto& item : split_list(v)) c.optimizers.push_back(parse_optimizer(item));
    };

    t["eval.mc_samples"] = [](auto& c, auto& k, auto& v) {
      c.eval.mc_samples = parse_list<int>(k, v, parse_int);
    };
    t["eval.temperatures"] = [](auto& c, auto& k, auto& v) {
      c.eval.temperatures = parse_list<double>(k, v, parse_double);
    };
    t["eval.thresholds"] = [](auto& c, auto& k, auto& v) {
      c.eval.thresholds = parse_list<double>(k, v, parse_double);
    };
    t["eval.ece_bins"] = [](auto& c, auto& k, auto& v) { c.eval.ece_bins = parse_int(k, v); };
    t["eval.risk_budgets"] = [](auto& c, auto& k, auto& v) {
      c.eval.risk_budgets = parse_list<double>(k, v, parse_double);
    };

    t["run.seeds"] = [](auto& c, auto& k, auto& v) {
      c.seeds = parse_list<std::uint64_t>(k, v, parse_u64);
    };
    t["run.num_seeds"] = [](auto& c, auto& k, auto& v) {
      c.seeds = seed_range(static_cast<std::size_t>(parse_u64(k, v)));
    };
    t["run.out"] = [](auto& c, auto&, auto& v) { c.out_dir = v; };
    t["run.threads"] = [](auto& c, auto& k, auto& v) { c.threads = static_cast<int>(parse_int(k, v)); };
    return t;
  }();
  return table;
}

}  // namespace

void DatasetSpec::validate() const {
  if (num_classes < 2) throw ConfigError("dataset: classes must be >= 2");
  if (dim < 1) throw ConfigError("dataset: dim must be >= 1");
  if (train_size < num_classes || dev_size < num_classes)
    throw ConfigError("dataset: train and dev sizes must be >= classes");
  if (!(separation >= 0.0)) throw ConfigError("dataset: separation must be >= 0");
  if (!(label_noise >= 0.0 && label_noise < 1.0))
    throw ConfigError("dataset: label_noise must be in [0, 1)");
}

std::string to_string(OptimizerKind kind) {
  return kind == OptimizerKind::AdamW ? "adamw" : "ivon";
}

OptimizerKind parse_optimizer(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "adamw") return OptimizerKind::AdamW;
  if (lower == "ivon") return OptimizerKind::Ivon;
  throw ConfigError("unknown optimizer '" + name + "' (expected adamw or ivon)");
}

void ExperimentConfig::validate() const {
  if (train_csv.has_value() != dev_csv.has_value())
    throw ConfigError("config: train_csv and dev_csv must be given together");
  if (!train_csv) dataset.validate();
  for (const auto h : hidden)
    if (h < 1) throw ConfigError("model: hidden layer widths must be >= 1");
  if (lora.enabled) {
    if (lora.rank < 1) throw ConfigError("lora: rank must be >= 1");
    if (!(lora.alpha > 0.0)) throw ConfigError("lora: alpha must be > 0");
  }
  if (optimizers.empty()) throw ConfigError("train: no optimizers selected");
  adamw.validate();
  ivon.validate();
  if (train.epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (train.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (eval.mc_samples.empty()) throw ConfigError("eval: mc_samples list is empty");
  for (const auto k : eval.mc_samples)
    if (k < 1) throw ConfigError("eval: mc_samples entries must be >= 1");
  if (eval.temperatures.empty()) throw ConfigError("eval: temperatures list is empty");
  for (const auto t : eval.temperatures)
    if (!(t > 0.0)) throw ConfigError("eval: temperatures must be > 0");
  for (const auto g : eval.thresholds)
    if (!(g >= 0.0 && g <= 1.0)) throw ConfigError("eval: thresholds must be in [0, 1]");
  if (eval.ece_bins < 1) throw ConfigError("eval: ece_bins must be >= 1");
  if (eval.risk_budgets.size() != 3)
    throw ConfigError("eval: risk_budgets must list exactly three budgets");
  for (const auto r : eval.risk_budgets)
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("eval: risk budgets must be in [0, 1]");
  if (!std::is_sorted(eval.risk_budgets.begin(), eval.risk_budgets.end()))
    throw ConfigError("eval: risk budgets must be ascending");
  if (seeds.empty()) throw ConfigError("run: seed list is empty");
  if (threads < 1) throw ConfigError("run: threads must be >= 1");
}

std::string ExperimentConfig::canonical() const {
  std::string s;
  auto line = [&s](std::string_view key, auto&& value) {
    s += fmt::format("{} = {}\n", key, std::forward<decltype(value)>(value));
  };
  std::vector<std::string> opt_names;
  for (auto o : optimizers) opt_names.push_back(to_string(o));

  line("dataset.classes", dataset.num_classes);
  line("dataset.dim", dataset.dim);
  line("dataset.train_size", dataset.train_size);
  line("dataset.dev_size", dataset.dev_size);
  line("dataset.separation", dataset.separation);
  line("dataset.label_noise", dataset.label_noise);
  line("dataset.seed", dataset.seed);
  line("dataset.train_csv", train_csv ? train_csv->generic_string() : "");
  line("dataset.dev_csv", dev_csv ? dev_csv->generic_string() : "");
  line("model.hidden", fmt::join(hidden, ","));
  line("lora.enabled", lora.enabled);
  line("lora.rank", lora.rank);
  line("lora.alpha", lora.alpha);
  line("lora.base_seed", lora.base_seed);
  line("adamw.lr", adamw.lr);
  line("adamw.beta1", adamw.beta1);
  line("adamw.beta2", adamw.beta2);
  line("adamw.eps", adamw.eps);
  line("adamw.weight_decay", adamw.weight_decay);
  line("ivon.lr", ivon.lr);
  line("ivon.ess", ivon.ess);
  line("ivon.hess_init", ivon.hess_init);
  line("ivon.weight_decay", ivon.weight_decay);
  line("ivon.beta1", ivon.beta1);
  line("ivon.beta2", ivon.beta2);
  line("ivon.mc_samples", ivon.mc_samples);
  line("train.epochs", train.epochs);
  line("train.batch_size", train.batch_size);
  line("train.optimizers", fmt::join(opt_names, ","));
  line("eval.mc_samples", fmt::join(eval.mc_samples, ","));
  line("eval.temperatures", fmt::join(eval.temperatures, ","));
  line("eval.thresholds", fmt::join(eval.thresholds, ","));
  line("eval.ece_bins", eval.ece_bins);
  line("eval.risk_budgets", fmt::join(eval.risk_budgets, ","));
  line("run.seeds", fmt::join(seeds, ","));
  return s;
}

std::uint64_t ExperimentConfig::hash() const {
  // FNV-1a over the canonical text.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : canonical()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash_pos = raw.find('#');
    const std::string line = trim(hash_pos == std::string::npos ? raw : raw.substr(0, hash_pos));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(fmt::format("config line {}: unterminated section header", line_no));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(fmt::format("config line {}: expected 'key = value'", line_no));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string full = section.empty() ? key : section + "." + key;
    const auto it = setters().find(full);
    if (it == setters().end())
      throw ConfigError(fmt::format("config line {}: unknown key '{}'", line_no, full));
    it->second(config, full, value);
  }
  if (!base_dir.empty()) {
    if (config.train_csv && config.train_csv->is_relative())
      config.train_csv = base_dir / *config.train_csv;
    if (config.dev_csv && config.dev_csv->is_relative()) config.dev_csv = base_dir / *config.dev_csv;
  }
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << file.rdbuf();
  return parse_config(buffer.str(), path.parent_path());
}

std::vector<std::uint64_t> seed_range(std::size_t count) {
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t i = 0; i < count; ++i) seeds[i] = i;
  return seeds;
}

}  // namespace ivb
