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

#pragma once

// Small trained agents shared by the tests of one binary. Training happens once, on
// first use.

#include <map>
#include <string>

#include "pvhri/analysis.hpp"
#include "pvhri/primitives.hpp"
#include "pvhri/session.hpp"
#include "pvhri/trainer.hpp"

namespace pvhri::testing {

inline NetworkConfig small_config() {
  NetworkConfig c;
  c.layers = {{20, 2, 2.0}, {6, 1, 6.0}};
  c.output_dims = 6;
  c.bins_per_dim = 9;
  return c;
}

inline const std::vector<Trajectory>& small_primitives() {
  static const auto data = make_primitives(6, 60, 4.0);
  return data;
}

inline const TrainerState& small_agent(const std::string& profile) {
  static std::map<std::string, TrainerState> cache;
  auto it = cache.find(profile);
  if (it == cache.end()) {
    const auto& data = small_primitives();
    it = cache
             .emplace(profile, train(data, small_config(), coding_for(data, 9, 25.0),
                                     CognitiveProfile::by_name(profile), TrainOptions{}, 1500, 1))
             .first;
  }
  return it->second;
}

inline const ObserverNet& small_observer() {
  static const ObserverNet net = [] {
    ObserverOptions o;
    o.epochs = 1500;
    return fit_observer(small_primitives(), o).net;
  }();
  return net;
}

inline SessionOptions small_session_options() {
  SessionOptions o;
  o.plant = PlantModel::reference(6);
  return o;
}

inline TrialSpec small_spec(const std::string& profile, const std::string& robot,
                            const std::string& human, int steps) {
  TrialSpec s;
  s.profile = profile;
  s.robot_intent = robot;
  s.human_intent = human;
  s.steps = steps;
  return s;
}

}  // namespace pvhri::testing
