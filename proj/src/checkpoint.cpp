// Copyright 2026 The pvhri Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pvhri/checkpoint.hpp"

#include <sstream>

#include "pvhri/io.hpp"
#include "pvhri/json.hpp"

namespace pvhri {

std::string checkpoint_to_string(const TrainerState& s) {
  std::ostringstream rng;
  rng << s.rng;
  Json log = Json::object();
  Json epoch = Json::array(), rec = Json::array(), reg = Json::array(), def = Json::array();
  for (const auto& e : s.log) {
    epoch.push_back(e.epoch);
    rec.push_back(e.reconstruction);
    reg.push_back(e.regulation);
    def.push_back(e.deficit);
  }
  log["epoch"] = std::move(epoch);
  log["reconstruction"] = std::move(rec);
  log["regulation"] = std::move(reg);
  log["deficit"] = std::move(def);

  Json j = Json::object();
  j["format"] = "pvhri-checkpoint";
  j["version"] = kCheckpointVersion;
  j["config"] = s.config;
  j["coding"] = s.coding;
  j["profile"] = s.profile;
  j["options"] = s.options;
  j["dataset"] = s.dataset;
  j["params"] = s.params;
  j["adaptive"] = s.adaptive;
  j["param_moments"] = s.param_moments;
  j["adaptive_moments"] = s.adaptive_moments;
  j["rng"] = rng.str();
  j["epoch"] = s.epoch;
  j["log"] = std::move(log);
  return j.dump();
}

TrainerState checkpoint_from_string(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw FormatError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "pvhri-checkpoint") {
    throw FormatError("not a pvhri checkpoint");
  }
  const int version = j.value("version", -1);
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint schema version " + std::to_string(version) + ", expected " +
                      std::to_string(kCheckpointVersion));
  }
  TrainerState s;
  try {
    s.config = j.at("config").get<NetworkConfig>();
    s.coding = j.at("coding").get<SoftmaxCoding>();
    s.profile = j.at("profile").get<CognitiveProfile>();
    s.options = j.at("options").get<TrainOptions>();
    s.dataset = j.at("dataset").get<std::vector<Trajectory>>();
    s.params = j.at("params").get<NetworkParams<double>>();
    s.adaptive = j.at("adaptive").get<std::vector<AdaptiveSequence<double>>>();
    s.param_moments = j.at("param_moments").get<AdamState<NetworkParams<double>>>();
    s.adaptive_moments =
        j.at("adaptive_moments").get<std::vector<AdamState<AdaptiveSequence<double>>>>();
    std::istringstream rng(j.at("rng").get<std::string>());
    rng >> s.rng;
    if (!rng) throw FormatError("checkpoint: bad RNG state");
    s.epoch = j.at("epoch").get<int>();
    const auto& log = j.at("log");
    const auto& epoch = log.at("epoch");
    for (std::size_t i = 0; i < epoch.size(); ++i) {
      s.log.push_back({epoch[i].get<int>(), log.at("reconstruction")[i].get<double>(),
                       log.at("regulation")[i].get<double>(), log.at("deficit")[i].get<double>()});
    }
  } catch (const Json::exception& e) {
    throw FormatError(std::string("corrupt checkpoint: ") + e.what());
  }

  // Shape checks against the stored config.
  const auto expect = NetworkParams<double>::zeros(s.config);
  bool shapes_ok = s.params.layers.size() == expect.layers.size() &&
                   s.param_moments.m.layers.size() == expect.layers.size() &&
                   s.param_moments.v.layers.size() == expect.layers.size();
  if (shapes_ok) {
    NetworkParams<double>::visit(
        [&](const auto& a, const auto& b, const auto& c, const auto& d) {
          shapes_ok = shapes_ok && a.rows() == b.rows() && a.cols() == b.cols() &&
                      c.rows() == b.rows() && c.cols() == b.cols() && d.rows() == b.rows() &&
                      d.cols() == b.cols();
        },
        s.params, expect, s.param_moments.m, s.param_moments.v);
  }
  if (!shapes_ok || s.adaptive.size() != s.dataset.size() ||
      s.adaptive_moments.size() != s.dataset.size()) {
    throw FormatError("checkpoint: tensor shapes do not match the stored config");
  }
  for (std::size_t i = 0; i < s.dataset.size(); ++i) {
    const auto& a = s.adaptive[i];
    if (static_cast<int>(a.mu.size()) != s.config.num_layers() ||
        a.steps() != s.dataset[i].steps()) {
      throw FormatError("checkpoint: adaptive values do not match the dataset");
    }
  }
  return s;
}

void save_checkpoint(const TrainerState& state, const std::string& path) {
  io::write_file(path, checkpoint_to_string(state));
}

TrainerState load_checkpoint(const std::string& path) {
  return checkpoint_from_string(io::read_file(path));
}

std::string checkpoint_path(const std::string& dir, const std::string& profile) {
  return io::join(dir, profile + ".json");
}

}  // namespace pvhri
