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

// JSON conversions for the domain types, found by nlohmann::json through ADL.

#include <json.hpp>

#include "pvhri/control.hpp"
#include "pvhri/encoding.hpp"
#include "pvhri/pvrnn.hpp"
#include "pvhri/trainer.hpp"

namespace pvhri {

using Json = nlohmann::json;

/// {"rows", "cols", "data"} with data in row-major order.
Json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const Json& j);

std::string optimizer_name(Optimizer o);
/// "adam" or "plain"; throws ValidationError otherwise.
Optimizer optimizer_from(const std::string& s);

void to_json(Json& j, const JointRange& r);
void from_json(const Json& j, JointRange& r);
void to_json(Json& j, const Trajectory& t);
void from_json(const Json& j, Trajectory& t);
void to_json(Json& j, const SoftmaxCoding& c);
void from_json(const Json& j, SoftmaxCoding& c);
void to_json(Json& j, const LayerConfig& c);
void from_json(const Json& j, LayerConfig& c);
void to_json(Json& j, const NetworkConfig& c);
void from_json(const Json& j, NetworkConfig& c);
void to_json(Json& j, const NetworkParams<double>& p);
void from_json(const Json& j, NetworkParams<double>& p);
void to_json(Json& j, const AdaptiveSequence<double>& a);
void from_json(const Json& j, AdaptiveSequence<double>& a);
void to_json(Json& j, const CognitiveProfile& p);
void from_json(const Json& j, CognitiveProfile& p);
void to_json(Json& j, const AdamSettings& s);
void from_json(const Json& j, AdamSettings& s);
void to_json(Json& j, const TrainOptions& o);
void from_json(const Json& j, TrainOptions& o);
void to_json(Json& j, const ControllerGains& g);
void from_json(const Json& j, ControllerGains& g);
/// Missing per-joint vectors keep their current values.
void to_json(Json& j, const PlantModel& p);
void from_json(const Json& j, PlantModel& p);
void to_json(Json& j, const SurrogateOptions& s);
void from_json(const Json& j, SurrogateOptions& s);

template <typename T>
void to_json(Json& j, const AdamState<T>& s) {
  j = Json{{"t", s.t}, {"m", s.m}, {"v", s.v}};
}

template <typename T>
void from_json(const Json& j, AdamState<T>& s) {
  s.t = j.at("t").get<long long>();
  s.m = j.at("m").get<T>();
  s.v = j.at("v").get<T>();
}

/// Reads `key` into `value` when present; keeps the default otherwise.
template <typename T>
void read_optional(const Json& j, const char* key, T& value) {
  if (j.contains(key)) value = j.at(key).get<T>();
}

}  // namespace pvhri
