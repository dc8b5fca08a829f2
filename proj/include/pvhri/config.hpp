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

#include <cstdint>
#include <string>
#include <vector>

#include "pvhri/analysis.hpp"
#include "pvhri/gateway.hpp"
#include "pvhri/primitives.hpp"
#include "pvhri/session.hpp"
#include "pvhri/trainer.hpp"

namespace pvhri {

/// Environment variable naming the default config file.
inline constexpr const char* kConfigEnv = "PVHRI_CONFIG";

struct DataOptions {
  int dims = 12;
  int steps = 90;
  double rate_hz = 4.0;
  PrimitiveShape shape;
};

/// Every hyperparameter of the pipeline. A config file may set any subset; the rest keep
/// these defaults.
struct Config {
  std::uint64_t seed = 1;
  DataOptions data;
  NetworkConfig network = NetworkConfig::reference();
  double sharpness = 25.0;  // softmax coding
  TrainOptions train;
  std::vector<CognitiveProfile> profiles = CognitiveProfile::reference();
  ObserverOptions observer;
  SessionOptions session;
  int trial_steps = 300;
  int repeats = 3;
  LiveOptions live;

  /// Throws ValidationError on inconsistent settings.
  void validate() const;
  CognitiveProfile profile(const std::string& name) const;
};

/// Unknown keys are rejected so that typos do not silently fall back to defaults.
Config config_from_json(const Json& j);
Json config_to_json(const Config& c);
Config load_config(const std::string& path);

/// The explicit path if given, else $PVHRI_CONFIG, else "" (built-in defaults).
std::string resolve_config_path(const std::string& explicit_path);
Config load_config_or_defaults(const std::string& explicit_path);

void to_json(Json& j, const RegressionOptions& o);
void from_json(const Json& j, RegressionOptions& o);
void to_json(Json& j, const ObserverOptions& o);
void from_json(const Json& j, ObserverOptions& o);
void to_json(Json& j, const ObserverNet& n);
void from_json(const Json& j, ObserverNet& n);
void save_observer(const ObserverNet& n, const std::string& path);
ObserverNet load_observer(const std::string& path);
void to_json(Json& j, const PrimitiveShape& s);
void from_json(const Json& j, PrimitiveShape& s);

}  // namespace pvhri
