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

#include "pvhri/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

#include "pvhri/error.hpp"
#include "pvhri/io.hpp"

namespace pvhri {

namespace {

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError("config: " + where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ValidationError("config: unknown key '" + where + "." + key + "'");
  }
}

}  // namespace

void to_json(Json& j, const RegressionOptions& o) {
  j = Json{{"length", o.length},
           {"inner_epochs", o.inner_epochs},
           {"alpha", o.alpha},
           {"optimizer", optimizer_name(o.optimizer)}};
}

void from_json(const Json& j, RegressionOptions& o) {
  check_keys(j, {"length", "inner_epochs", "alpha", "optimizer"}, "session.regression");
  read_optional(j, "length", o.length);
  read_optional(j, "inner_epochs", o.inner_epochs);
  read_optional(j, "alpha", o.alpha);
  if (j.contains("optimizer")) o.optimizer = optimizer_from(j.at("optimizer").get<std::string>());
}

void to_json(Json& j, const ObserverOptions& o) {
  j = Json{{"epochs", o.epochs},     {"lr", o.lr},
           {"hidden1", o.hidden1},   {"hidden2", o.hidden2},
           {"weight_decay", o.weight_decay}, {"holdout_every", o.holdout_every},
           {"seed", o.seed}};
}

void from_json(const Json& j, ObserverOptions& o) {
  check_keys(j, {"epochs", "lr", "hidden1", "hidden2", "weight_decay", "holdout_every", "seed"},
             "observer");
  read_optional(j, "epochs", o.epochs);
  read_optional(j, "lr", o.lr);
  read_optional(j, "hidden1", o.hidden1);
  read_optional(j, "hidden2", o.hidden2);
  read_optional(j, "weight_decay", o.weight_decay);
  read_optional(j, "holdout_every", o.holdout_every);
  read_optional(j, "seed", o.seed);
}

void to_json(Json& j, const ObserverNet& n) {
  j = Json{{"format", "pvhri-observer"},
           {"w1", matrix_to_json(n.w1)}, {"b1", matrix_to_json(n.b1)},
           {"w2", matrix_to_json(n.w2)}, {"b2", matrix_to_json(n.b2)},
           {"w3", matrix_to_json(n.w3)}, {"b3", matrix_to_json(n.b3)}};
}

void from_json(const Json& j, ObserverNet& n) {
  if (j.value("format", std::string()) != "pvhri-observer") throw FormatError("not an observer file");
  n.w1 = matrix_from_json(j.at("w1"));
  n.b1 = matrix_from_json(j.at("b1"));
  n.w2 = matrix_from_json(j.at("w2"));
  n.b2 = matrix_from_json(j.at("b2"));
  n.w3 = matrix_from_json(j.at("w3"));
  n.b3 = matrix_from_json(j.at("b3"));
  if (n.b1.size() != n.w1.rows() || n.w2.cols() != n.w1.rows() || n.b2.size() != n.w2.rows() ||
      n.w3.cols() != n.w2.rows() || n.b3.size() != n.w3.rows()) {
    throw FormatError("observer layer shapes do not chain");
  }
}

void save_observer(const ObserverNet& n, const std::string& path) {
  io::write_file(path, Json(n).dump() + "\n");
}

ObserverNet load_observer(const std::string& path) {
  try {
    return Json::parse(io::read_file(path)).get<ObserverNet>();
  } catch (const Json::exception& e) {
    throw FormatError(path + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void to_json(Json& j, const PrimitiveShape& s) {
  j = Json{{"offset", s.offset}, {"amplitude", s.amplitude}, {"background", s.background}, {"limit", s.limit}};
}

void from_json(const Json& j, PrimitiveShape& s) {
  check_keys(j, {"offset", "amplitude", "background", "limit"}, "data.shape");
  read_optional(j, "offset", s.offset);
  read_optional(j, "amplitude", s.amplitude);
  read_optional(j, "background", s.background);
  read_optional(j, "limit", s.limit);
}

void Config::validate() const {
  if (data.dims < 2 || data.steps < 2 || !(data.rate_hz > 0)) {
    throw ValidationError("config: data needs dims >= 2, steps >= 2 and rate_hz > 0");
  }
  network.validate();
  if (network.output_dims != data.dims) {
    throw ValidationError("config: network.output_dims (" + std::to_string(network.output_dims) +
                          ") differs from data.dims (" + std::to_string(data.dims) + ")");
  }
  if (!(sharpness > 0)) throw ValidationError("config: sharpness must be > 0");
  train.validate();
  if (profiles.empty()) throw ValidationError("config: no profiles");
  for (const auto& p : profiles) {
    if (!(p.train_w >= 0) || !(p.interact_w >= 0)) {
      throw ValidationError("config: profile '" + p.name + "' has a negative w");
    }
  }
  if (observer.epochs < 1 || !(observer.lr > 0) || observer.hidden1 < 1 || observer.hidden2 < 1 ||
      observer.holdout_every < 2 || observer.weight_decay < 0) {
    throw ValidationError("config: invalid observer settings");
  }
  session.validate();
  if (session.plant.joints != data.dims) {
    throw ValidationError("config: session.plant.joints differs from data.dims");
  }
  if (trial_steps < session.regression.length) {
    throw ValidationError("config: trial_steps shorter than the regression window");
  }
  if (repeats < 1) throw ValidationError("config: repeats must be >= 1");
  live.validate();
}

CognitiveProfile Config::profile(const std::string& name) const {
  for (const auto& p : profiles) {
    if (p.name == name) return p;
  }
  throw ValidationError("config: no profile named '" + name + "'");
}

Config config_from_json(const Json& j) {
  check_keys(j, {"seed", "data", "network", "sharpness", "train", "profiles", "observer", "session",
                 "trial_steps", "repeats", "live"},
             "config");
  Config c;
  try {
    read_optional(j, "seed", c.seed);
    if (j.contains("data")) {
      const Json& d = j.at("data");
      check_keys(d, {"dims", "steps", "rate_hz", "shape"}, "data");
      read_optional(d, "dims", c.data.dims);
      read_optional(d, "steps", c.data.steps);
      read_optional(d, "rate_hz", c.data.rate_hz);
      read_optional(d, "shape", c.data.shape);
    }
    // Dimension-dependent defaults follow data.dims unless set explicitly.
    c.network.output_dims = c.data.dims;
    c.session.plant = PlantModel::reference(c.data.dims);
    if (j.contains("network")) {
      check_keys(j.at("network"), {"layers", "output_dims", "bins_per_dim", "meta_w", "seed"}, "network");
      from_json(j.at("network"), c.network);
    }
    read_optional(j, "sharpness", c.sharpness);
    if (j.contains("train")) {
      check_keys(j.at("train"), {"epochs", "param_optimizer", "param_adam", "param_lr_plain",
                                 "adaptive_optimizer", "adaptive_alpha"},
                 "train");
      from_json(j.at("train"), c.train);
    }
    read_optional(j, "profiles", c.profiles);
    read_optional(j, "observer", c.observer);
    if (j.contains("session")) {
      const Json& s = j.at("session");
      check_keys(s, {"network_hz", "control_hz", "regression", "gains", "plant", "surrogate"}, "session");
      read_optional(s, "network_hz", c.session.network_hz);
      read_optional(s, "control_hz", c.session.control_hz);
      read_optional(s, "regression", c.session.regression);
      read_optional(s, "gains", c.session.gains);
      if (s.contains("plant")) from_json(s.at("plant"), c.session.plant);
      read_optional(s, "surrogate", c.session.surrogate);
    }
    read_optional(j, "trial_steps", c.trial_steps);
    read_optional(j, "repeats", c.repeats);
    if (j.contains("live")) {
      const Json& l = j.at("live");
      check_keys(l, {"host", "port", "torque_bound", "speed", "latent_layer"}, "live");
      read_optional(l, "host", c.live.host);
      read_optional(l, "port", c.live.port);
      read_optional(l, "torque_bound", c.live.torque_bound);
      read_optional(l, "speed", c.live.speed);
      read_optional(l, "latent_layer", c.live.latent_layer);
    }
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

Json config_to_json(const Config& c) {
  return Json{{"seed", c.seed},
              {"data",
               {{"dims", c.data.dims},
                {"steps", c.data.steps},
                {"rate_hz", c.data.rate_hz},
                {"shape", c.data.shape}}},
              {"network", c.network},
              {"sharpness", c.sharpness},
              {"train", c.train},
              {"profiles", c.profiles},
              {"observer", c.observer},
              {"session",
               {{"network_hz", c.session.network_hz},
                {"control_hz", c.session.control_hz},
                {"regression", c.session.regression},
                {"gains", c.session.gains},
                {"plant", c.session.plant},
                {"surrogate", c.session.surrogate}}},
              {"trial_steps", c.trial_steps},
              {"repeats", c.repeats},
              {"live",
               {{"host", c.live.host},
                {"port", c.live.port},
                {"torque_bound", c.live.torque_bound},
                {"speed", c.live.speed},
                {"latent_layer", c.live.latent_layer}}}};
}

Config load_config(const std::string& path) {
  Json j;
  try {
    j = Json::parse(io::read_file(path));
  } catch (const Json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::string resolve_config_path(const std::string& explicit_path) {
  if (!explicit_path.empty()) return explicit_path;
  const char* env = std::getenv(kConfigEnv);
  return env ? std::string(env) : std::string();
}

Config load_config_or_defaults(const std::string& explicit_path) {
  const std::string path = resolve_config_path(explicit_path);
  return path.empty() ? Config{} : load_config(path);
}

}  // namespace pvhri
