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

#include "pvhri/json.hpp"

namespace pvhri {

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json data = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) data.push_back(m(i, k));
  }
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw FormatError("matrix: data length does not match rows x cols");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t n = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = data[n++].get<double>();
  }
  return m;
}

void to_json(Json& j, const JointRange& r) { j = Json::array({r.lo, r.hi}); }
void from_json(const Json& j, JointRange& r) {
  r.lo = j.at(0).get<double>();
  r.hi = j.at(1).get<double>();
}

void to_json(Json& j, const Trajectory& t) {
  j = Json::object();
  j["rate_hz"] = t.rate_hz;
  j["dims"] = t.dims();
  j["joint_names"] = t.joint_names;
  j["limits"] = t.limits;
  Json values = Json::array();
  for (int s = 0; s < t.steps(); ++s) {
    Json row = Json::array();
    for (int d = 0; d < t.dims(); ++d) row.push_back(t.values(s, d));
    values.push_back(std::move(row));
  }
  j["values"] = std::move(values);
}

void from_json(const Json& j, Trajectory& t) {
  t.rate_hz = j.at("rate_hz").get<double>();
  const int dims = j.at("dims").get<int>();
  t.joint_names.clear();
  read_optional(j, "joint_names", t.joint_names);
  t.limits = j.at("limits").get<std::vector<JointRange>>();
  const auto& values = j.at("values");
  t.values.resize(static_cast<Eigen::Index>(values.size()), dims);
  for (std::size_t s = 0; s < values.size(); ++s) {
    if (static_cast<int>(values[s].size()) != dims) {
      throw FormatError("trajectory row " + std::to_string(s) + " has wrong length");
    }
    for (int d = 0; d < dims; ++d) t.values(s, d) = values[s][d].get<double>();
  }
}

void to_json(Json& j, const SoftmaxCoding& c) {
  j = Json{{"bins_per_dim", c.bins_per_dim}, {"sharpness", c.sharpness}, {"ranges", c.ranges}};
}
void from_json(const Json& j, SoftmaxCoding& c) {
  c = SoftmaxCoding(j.at("bins_per_dim").get<int>(), j.at("sharpness").get<double>(),
                    j.at("ranges").get<std::vector<JointRange>>());
}

void to_json(Json& j, const LayerConfig& c) {
  j = Json{{"d_units", c.d_units}, {"z_units", c.z_units}, {"timescale", c.timescale}};
}
void from_json(const Json& j, LayerConfig& c) {
  c.d_units = j.at("d_units").get<int>();
  c.z_units = j.at("z_units").get<int>();
  c.timescale = j.at("timescale").get<double>();
}

void to_json(Json& j, const NetworkConfig& c) {
  j = Json{{"layers", c.layers},     {"output_dims", c.output_dims},
           {"bins_per_dim", c.bins_per_dim}, {"meta_w", c.meta_w},
           {"seed", c.seed}};
}
void from_json(const Json& j, NetworkConfig& c) {
  read_optional(j, "layers", c.layers);
  read_optional(j, "output_dims", c.output_dims);
  read_optional(j, "bins_per_dim", c.bins_per_dim);
  read_optional(j, "meta_w", c.meta_w);
  read_optional(j, "seed", c.seed);
}

namespace {

constexpr const char* kLayerTensorNames[] = {
    "w_rec",      "w_below",       "w_above",   "w_zd",         "w_mu",
    "w_sigma",    "b_mu_prior",    "b_sigma_prior", "b_mu_post", "b_sigma_post"};

}  // namespace

void to_json(Json& j, const NetworkParams<double>& p) {
  Json layers = Json::array();
  for (const auto& l : p.layers) {
    Json lj = Json::object();
    int i = 0;
    LayerParams<double>::visit(
        [&](const auto& t) { lj[kLayerTensorNames[i++]] = matrix_to_json(t); }, l);
    layers.push_back(std::move(lj));
  }
  j = Json{{"layers", std::move(layers)},
           {"w_out", matrix_to_json(p.w_out)},
           {"b_out", matrix_to_json(p.b_out)}};
}

void from_json(const Json& j, NetworkParams<double>& p) {
  p.layers.clear();
  for (const auto& lj : j.at("layers")) {
    LayerParams<double> l;
    int i = 0;
    LayerParams<double>::visit(
        [&](auto& t) {
          const auto m = matrix_from_json(lj.at(kLayerTensorNames[i++]));
          if constexpr (std::decay_t<decltype(t)>::ColsAtCompileTime == 1) {
            if (m.cols() != 1) throw FormatError("params: bias is not a column vector");
            t = m.col(0);
          } else {
            t = m;
          }
        },
        l);
    p.layers.push_back(std::move(l));
  }
  p.w_out = matrix_from_json(j.at("w_out"));
  const auto b = matrix_from_json(j.at("b_out"));
  if (b.cols() != 1) throw FormatError("params: b_out is not a column vector");
  p.b_out = b.col(0);
}

void to_json(Json& j, const AdaptiveSequence<double>& a) {
  Json mu = Json::array(), sigma = Json::array();
  for (std::size_t k = 0; k < a.mu.size(); ++k) {
    mu.push_back(matrix_to_json(a.mu[k]));
    sigma.push_back(matrix_to_json(a.sigma[k]));
  }
  j = Json{{"mu", std::move(mu)}, {"sigma", std::move(sigma)}};
}

void from_json(const Json& j, AdaptiveSequence<double>& a) {
  a.mu.clear();
  a.sigma.clear();
  for (const auto& m : j.at("mu")) a.mu.push_back(matrix_from_json(m));
  for (const auto& m : j.at("sigma")) a.sigma.push_back(matrix_from_json(m));
  if (a.mu.size() != a.sigma.size()) throw FormatError("adaptive: mu/sigma layer mismatch");
}

void to_json(Json& j, const CognitiveProfile& p) {
  j = Json{{"name", p.name}, {"train_w", p.train_w}, {"interact_w", p.interact_w}};
}
void from_json(const Json& j, CognitiveProfile& p) {
  p.name = j.at("name").get<std::string>();
  p.train_w = j.at("train_w").get<double>();
  p.interact_w = j.at("interact_w").get<double>();
}

void to_json(Json& j, const AdamSettings& s) {
  j = Json{{"lr", s.lr}, {"beta1", s.beta1}, {"beta2", s.beta2}, {"eps", s.eps}};
}
void from_json(const Json& j, AdamSettings& s) {
  read_optional(j, "lr", s.lr);
  read_optional(j, "beta1", s.beta1);
  read_optional(j, "beta2", s.beta2);
  read_optional(j, "eps", s.eps);
}

std::string optimizer_name(Optimizer o) { return o == Optimizer::kAdam ? "adam" : "plain"; }

Optimizer optimizer_from(const std::string& s) {
  if (s == "adam") return Optimizer::kAdam;
  if (s == "plain") return Optimizer::kPlain;
  throw ValidationError("unknown optimizer '" + s + "' (expected adam or plain)");
}

void to_json(Json& j, const TrainOptions& o) {
  j = Json{{"epochs", o.epochs},
           {"param_optimizer", optimizer_name(o.param_optimizer)},
           {"param_adam", o.param_adam},
           {"param_lr_plain", o.param_lr_plain},
           {"adaptive_optimizer", optimizer_name(o.adaptive_optimizer)},
           {"adaptive_alpha", o.adaptive_alpha}};
}

void from_json(const Json& j, TrainOptions& o) {
  read_optional(j, "epochs", o.epochs);
  if (j.contains("param_optimizer")) {
    o.param_optimizer = optimizer_from(j.at("param_optimizer").get<std::string>());
  }
  read_optional(j, "param_adam", o.param_adam);
  read_optional(j, "param_lr_plain", o.param_lr_plain);
  if (j.contains("adaptive_optimizer")) {
    o.adaptive_optimizer = optimizer_from(j.at("adaptive_optimizer").get<std::string>());
  }
  read_optional(j, "adaptive_alpha", o.adaptive_alpha);
}

void to_json(Json& j, const ControllerGains& g) {
  j = Json{{"tau_th", g.tau_th},       {"eta_a_min", g.eta_a_min},
           {"eta_a_max", g.eta_a_max}, {"e_max", g.e_max},
           {"eta_p", g.eta_p},         {"eta_i", g.eta_i},
           {"eta_n", g.eta_n},         {"s_max", g.s_max},
           {"delta_max", g.delta_max}, {"integral_bound", g.integral_bound},
           {"exit_ratio", g.exit_ratio}, {"hold_ticks", g.hold_ticks}};
}

void from_json(const Json& j, ControllerGains& g) {
  read_optional(j, "tau_th", g.tau_th);
  read_optional(j, "eta_a_min", g.eta_a_min);
  read_optional(j, "eta_a_max", g.eta_a_max);
  read_optional(j, "e_max", g.e_max);
  read_optional(j, "eta_p", g.eta_p);
  read_optional(j, "eta_i", g.eta_i);
  read_optional(j, "eta_n", g.eta_n);
  read_optional(j, "s_max", g.s_max);
  read_optional(j, "delta_max", g.delta_max);
  read_optional(j, "integral_bound", g.integral_bound);
  read_optional(j, "exit_ratio", g.exit_ratio);
  read_optional(j, "hold_ticks", g.hold_ticks);
}

void to_json(Json& j, const PlantModel& p) {
  j = Json{{"joints", p.joints},
           {"rate_hz", p.rate_hz},
           {"servo_time_constant", p.servo_time_constant},
           {"inertia", p.inertia},
           {"friction", p.friction},
           {"gravity", p.gravity},
           {"stiffness", p.stiffness},
           {"limits", p.limits},
           {"noise_std", p.noise_std},
           {"noise_seed", p.noise_seed}};
}

void from_json(const Json& j, PlantModel& p) {
  read_optional(j, "joints", p.joints);
  read_optional(j, "rate_hz", p.rate_hz);
  read_optional(j, "servo_time_constant", p.servo_time_constant);
  read_optional(j, "inertia", p.inertia);
  read_optional(j, "friction", p.friction);
  read_optional(j, "gravity", p.gravity);
  read_optional(j, "stiffness", p.stiffness);
  read_optional(j, "limits", p.limits);
  read_optional(j, "noise_std", p.noise_std);
  read_optional(j, "noise_seed", p.noise_seed);
}

void to_json(Json& j, const SurrogateOptions& s) {
  j = Json{{"gain", s.gain}, {"bound", s.bound}};
}

void from_json(const Json& j, SurrogateOptions& s) {
  read_optional(j, "gain", s.gain);
  read_optional(j, "bound", s.bound);
}

}  // namespace pvhri
