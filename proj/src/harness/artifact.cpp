// SPDX-License-Identifier: Apache-2.0
#include "ivb/harness/artifact.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

#include "ivb/harness/report.hpp"
#include "ivb/version.hpp"

namespace ivb {
namespace {

using json = nlohmann::ordered_json;

json vec_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vec_from_json(const json& j) {
  const auto xs = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(xs.data(), static_cast<Index>(xs.size()));
}

}  // namespace

void save_artifact(const std::filesystem::path& path, const SavedArtifact& saved) {
  const auto& a = saved.artifact;
  json j;
  j["format"] = "ivonbench-artifact";
  j["version"] = kVersion;
  j["config_hash"] = fmt::format("{:016x}", saved.config_hash);
  j["input_dim"] = saved.input_dim;
  j["num_classes"] = saved.num_classes;
  j["optimizer"] = to_string(a.optimizer);
  j["seed"] = a.seed;
  j["steps"] = a.steps;
  j["failed"] = a.failed;
  j["diagnostics"] = a.diagnostics;
  j["epoch_loss"] = a.epoch_loss;
  j["min_precision_factor"] = a.min_precision_factor;
  j["precision_violations"] = a.precision_violations;
  j["params"] = vec_to_json(a.params);
  if (a.adamw_state) {
    j["adamw"] = {{"step", a.adamw_state->step},
                  {"first_moment", vec_to_json(a.adamw_state->first_moment)},
                  {"second_moment", vec_to_json(a.adamw_state->second_moment)}};
  }
  if (a.posterior) {
    j["posterior"] = {{"step", a.posterior->step},
                      {"hess_floor_hits", a.posterior->hess_floor_hits},
                      {"mean", vec_to_json(a.posterior->mean)},
                      {"hess", vec_to_json(a.posterior->hess)},
                      {"momentum", vec_to_json(a.posterior->momentum)}};
  }
  write_text(path, j.dump() + "\n");
}

SavedArtifact load_artifact(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open artifact '" + path.string() + "'");
  try {
    const json j = json::parse(in);
    if (j.at("format") != "ivonbench-artifact")
      throw DataError("'" + path.string() + "' is not an ivonbench artifact");
    SavedArtifact saved;
    saved.config_hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
    saved.input_dim = j.at("input_dim").get<Index>();
    saved.num_classes = j.at("num_classes").get<Index>();
    auto& a = saved.artifact;
    a.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
    a.seed = j.at("seed").get<std::uint64_t>();
    a.steps = j.at("steps").get<std::int64_t>();
    a.failed = j.at("failed").get<bool>();
    a.diagnostics = j.at("diagnostics").get<std::string>();
    a.epoch_loss = j.at("epoch_loss").get<std::vector<double>>();
    a.min_precision_factor = j.at("min_precision_factor").get<double>();
    a.precision_violations = j.at("precision_violations").get<std::int64_t>();
    a.params = vec_from_json(j.at("params"));
    if (j.contains("adamw")) {
      const auto& s = j["adamw"];
      a.adamw_state = AdamwState{vec_from_json(s.at("first_moment")),
                                 vec_from_json(s.at("second_moment")),
                                 s.at("step").get<std::int64_t>()};
    }
    if (j.contains("posterior")) {
      const auto& s = j["posterior"];
      PosteriorState p;
      p.mean = vec_from_json(s.at("mean"));
      p.hess = vec_from_json(s.at("hess"));
      p.momentum = vec_from_json(s.at("momentum"));
      p.step = s.at("step").get<std::int64_t>();
      p.hess_floor_hits = s.at("hess_floor_hits").get<std::int64_t>();
      if (p.hess.size() != p.mean.size() || p.momentum.size() != p.mean.size())
        throw DataError("artifact posterior vectors differ in length");
      a.posterior = std::move(p);
    }
    if (a.optimizer == OptimizerKind::Ivon && !a.posterior)
      throw DataError("IVON artifact without posterior");
    return saved;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed artifact '" + path.string() + "': " + e.what());
  } catch (const ConfigError& e) {
    throw DataError("malformed artifact '" + path.string() + "': " + e.what());
  }
}

}  // namespace ivb
