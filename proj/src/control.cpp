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

#include "pvhri/control.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pvhri/io.hpp"
#include "pvhri/json.hpp"

namespace pvhri {

const char* mode_name(Mode m) { return m == Mode::kActive ? "active" : "compliant"; }

void ControllerGains::validate() const {
  const double all[] = {tau_th, eta_a_min, eta_a_max, e_max, eta_p, eta_i,
                        eta_n,  s_max,     delta_max, integral_bound, exit_ratio};
  for (double v : all) {
    if (!(v >= 0) || !std::isfinite(v)) throw ValidationError("controller gains must be >= 0");
  }
  if (eta_a_min > eta_a_max) throw ValidationError("eta_a_min must not exceed eta_a_max");
  if (!(delta_max > 0)) throw ValidationError("delta_max must be > 0");
  if (!(e_max > 0)) throw ValidationError("e_max must be > 0");
  if (hold_ticks < 1) throw ValidationError("hold_ticks must be >= 1");
}

Mode select_mode(JointState& joint, const ControllerGains& gains) {
  const double mag = std::abs(joint.tau_ext);
  if (joint.mode == Mode::kActive) {
    if (mag > gains.tau_th) {
      joint.mode = Mode::kCompliant;
      joint.exit_count = 0;
    }
    return joint.mode;
  }
  if (mag < gains.exit_ratio * gains.tau_th) {
    if (++joint.exit_count >= gains.hold_ticks) {
      joint.mode = Mode::kActive;
      joint.exit_count = 0;
      joint.integral = 0;
    }
  } else {
    joint.exit_count = 0;
  }
  return joint.mode;
}

double active_gain(double error, const ControllerGains& gains) {
  const double e = std::min(std::abs(error), gains.e_max);
  return gains.eta_a_min +
         (gains.eta_a_max - gains.eta_a_min) * 0.5 * (1.0 + std::cos(M_PI * e / gains.e_max));
}

double active_target(double theta_net, double theta_hat, const ControllerGains& gains) {
  const double error = theta_net - theta_hat;
  const double correction = std::clamp(active_gain(error, gains) * error, -gains.delta_max,
                                       gains.delta_max);
  return theta_hat + correction;
}

double compliant_target(const JointState& joint, const ControllerGains& gains) {
  const double theta_ext =
      joint.theta_hat + gains.eta_p * joint.tau_ext + gains.eta_i * joint.integral;
  const double pull = std::clamp(joint.theta_net - joint.theta_hat, -gains.s_max, gains.s_max);
  const double theta_com = theta_ext + gains.eta_n * pull;
  return joint.theta_hat +
         std::clamp(theta_com - joint.theta_hat, -gains.delta_max, gains.delta_max);
}

void accumulate_integral(JointState& joint, const ControllerGains& gains) {
  joint.integral =
      std::clamp(joint.integral + joint.tau_ext, -gains.integral_bound, gains.integral_bound);
}

double controller_tick(JointState& joint, const ControllerGains& gains, const JointRange& range) {
  double target;
  if (select_mode(joint, gains) == Mode::kCompliant) {
    accumulate_integral(joint, gains);
    target = compliant_target(joint, gains);
  } else {
    target = active_target(joint.theta_net, joint.theta_hat, gains);
  }
  target = std::clamp(target, joint.command - gains.delta_max, joint.command + gains.delta_max);
  joint.command = std::clamp(target, range.lo, range.hi);
  return joint.command;
}

PlantModel PlantModel::reference(int joints) {
  PlantModel p;
  p.joints = joints;
  p.inertia.assign(joints, 0.05);
  p.friction.assign(joints, 0.2);
  p.gravity.assign(joints, 1.0);
  p.stiffness.assign(joints, 20.0);
  p.limits.assign(joints, JointRange{-1.0, 1.0});
  return p;
}

void PlantModel::validate() const {
  if (joints < 1) throw ValidationError("plant: joints must be >= 1");
  if (!(rate_hz > 0) || !(servo_time_constant > 0)) {
    throw ValidationError("plant: rate and servo time constant must be positive");
  }
  const auto n = static_cast<std::size_t>(joints);
  if (inertia.size() != n || friction.size() != n || gravity.size() != n ||
      stiffness.size() != n || limits.size() != n) {
    throw ValidationError("plant: per-joint vectors must have one entry per joint");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!(inertia[j] > 0) || !(friction[j] > 0) || !(stiffness[j] > 0)) {
      throw ValidationError("plant: inertia, friction and stiffness must be positive");
    }
    if (!(limits[j].lo < limits[j].hi)) throw ValidationError("plant: empty joint range");
  }
  if (!(noise_std >= 0)) throw ValidationError("plant: noise_std must be >= 0");
}

PlantState make_plant_state(const PlantModel& plant, const Eigen::VectorXd& initial) {
  plant.validate();
  if (initial.size() != plant.joints) throw ShapeError("plant: initial posture size mismatch");
  PlantState s;
  s.theta = initial;
  for (int j = 0; j < plant.joints; ++j) {
    s.theta(j) = std::clamp(s.theta(j), plant.limits[j].lo, plant.limits[j].hi);
  }
  s.history.assign(3, s.theta);
  s.rng.seed(plant.noise_seed);
  return s;
}

Eigen::VectorXd inverse_dynamics(const PlantModel& plant,
                                 const std::deque<Eigen::VectorXd>& history) {
  if (history.size() < 2) throw ValidationError("inverse_dynamics: need >= 2 history samples");
  const double dt = plant.dt();
  const auto n = history.size();
  const Eigen::VectorXd& now = history[n - 1];
  const Eigen::VectorXd& prev = history[n - 2];
  Eigen::VectorXd tau(now.size());
  for (Eigen::Index j = 0; j < now.size(); ++j) {
    const double vel = (now(j) - prev(j)) / dt;
    const double acc = n >= 3 ? (now(j) - 2 * prev(j) + history[n - 3](j)) / (dt * dt) : 0.0;
    tau(j) = plant.inertia[j] * acc + plant.friction[j] * vel +
             plant.gravity[j] * std::sin(now(j));
  }
  return tau;
}

Measurement plant_step(const PlantModel& plant, PlantState& state, const Eigen::VectorXd& commands,
                       const Eigen::VectorXd& injected) {
  if (commands.size() != plant.joints || injected.size() != plant.joints) {
    throw ShapeError("plant_step: command/torque size mismatch");
  }
  const double lambda = 1.0 - std::exp(-plant.dt() / plant.servo_time_constant);
  Measurement m;
  m.at_limit.assign(plant.joints, false);
  Eigen::VectorXd next(plant.joints);
  for (int j = 0; j < plant.joints; ++j) {
    const auto& r = plant.limits[j];
    const double cmd = std::clamp(commands(j), r.lo, r.hi);
    double th = state.theta(j) + lambda * (cmd - state.theta(j)) +
                lambda * injected(j) / plant.stiffness[j];
    if (th < r.lo || th > r.hi) {
      th = std::clamp(th, r.lo, r.hi);
      m.at_limit[j] = true;
      ++state.limit_hits;
    }
    next(j) = th;
  }
  state.theta = next;
  state.history.push_back(next);
  while (state.history.size() > 3) state.history.pop_front();
  ++state.tick;

  m.theta_hat = next;
  m.tau_hat = inverse_dynamics(plant, state.history) + injected;
  if (plant.noise_std > 0) {
    std::normal_distribution<double> noise(0.0, plant.noise_std);
    for (int j = 0; j < plant.joints; ++j) m.tau_hat(j) += noise(state.rng);
  }
  return m;
}

Eigen::VectorXd human_surrogate(const Eigen::VectorXd& script_posture,
                                const Eigen::VectorXd& theta_hat, const SurrogateOptions& opt) {
  if (script_posture.size() != theta_hat.size()) {
    throw ShapeError("human_surrogate: posture size mismatch");
  }
  return (opt.gain * (script_posture - theta_hat)).cwiseMax(-opt.bound).cwiseMin(opt.bound);
}

Eigen::VectorXd script_posture(const Trajectory& script, double network_step) {
  const int n = script.steps();
  if (n < 1) throw ValidationError("script_posture: empty script");
  const double wrapped = std::fmod(std::fmod(network_step, n) + n, n);
  const int i0 = static_cast<int>(std::floor(wrapped));
  const int i1 = (i0 + 1) % n;
  const double f = wrapped - i0;
  return ((1.0 - f) * script.values.row(i0) + f * script.values.row(i1)).transpose();
}

Arm::Arm(PlantModel plant, ControllerGains gains, const Eigen::VectorXd& initial)
    : plant_(std::move(plant)), gains_(gains) {
  gains_.validate();
  state_ = make_plant_state(plant_, initial);
  joints_.resize(plant_.joints);
  const auto tau = inverse_dynamics(plant_, state_.history);
  for (int j = 0; j < plant_.joints; ++j) {
    auto& js = joints_[j];
    js.theta_hat = state_.theta(j);
    js.theta_net = js.theta_hat;
    js.command = js.theta_hat;
    js.tau_hat = js.tau_act = tau(j);
    js.tau_ext = 0;
  }
}

Arm::Tick Arm::step(const Eigen::VectorXd& theta_net, const Eigen::VectorXd& injected) {
  if (theta_net.size() != plant_.joints) throw ShapeError("Arm: theta_net size mismatch");
  Tick out;
  out.command.resize(plant_.joints);
  for (int j = 0; j < plant_.joints; ++j) {
    auto& js = joints_[j];
    const Mode before = js.mode;
    js.theta_net = theta_net(j);
    out.command(j) = controller_tick(js, gains_, plant_.limits[j]);
    out.modes.push_back(js.mode);
    out.switches += js.mode != before;
  }
  out.measured = plant_step(plant_, state_, out.command, injected);
  const auto tau_act = inverse_dynamics(plant_, state_.history);
  for (int j = 0; j < plant_.joints; ++j) {
    auto& js = joints_[j];
    js.theta_hat = out.measured.theta_hat(j);
    js.tau_hat = out.measured.tau_hat(j);
    js.tau_act = tau_act(j);
    js.tau_ext = estimate_external(js.tau_hat, js.tau_act);
  }
  return out;
}

Eigen::VectorXd Arm::theta_hat() const { return state_.theta; }

Eigen::VectorXd Arm::tau_ext() const {
  Eigen::VectorXd t(plant_.joints);
  for (int j = 0; j < plant_.joints; ++j) t(j) = joints_[j].tau_ext;
  return t;
}

double SinusoidReference::at(double t) const {
  return offset + amplitude * std::sin(2.0 * M_PI * frequency_hz * t + phase);
}

ScenarioScript pulse_scenario(double torque, double start, double length) {
  ScenarioScript s;
  s.disturbances.push_back({0, start, start + length, torque});
  return s;
}

std::vector<TickRow> run_scenario(const ScenarioScript& script) {
  const auto& plant = script.plant;
  plant.validate();
  for (const auto& d : script.disturbances) {
    if (d.joint < 0 || d.joint >= plant.joints) {
      throw ValidationError("scenario: disturbance joint out of range");
    }
  }
  const double dt = plant.dt();
  const auto ticks = static_cast<long long>(std::llround(script.duration / dt));
  Arm arm(plant, script.gains, Eigen::VectorXd::Constant(plant.joints, script.reference.at(0)));
  std::vector<TickRow> rows;
  rows.reserve(static_cast<std::size_t>(ticks * plant.joints));
  for (long long k = 0; k < ticks; ++k) {
    const double t = k * dt;
    const Eigen::VectorXd net = Eigen::VectorXd::Constant(plant.joints, script.reference.at(t));
    Eigen::VectorXd inj = Eigen::VectorXd::Zero(plant.joints);
    for (const auto& d : script.disturbances) {
      if (t >= d.t_start && t < d.t_end) inj(d.joint) += d.torque;
    }
    const auto tick = arm.step(net, inj);
    for (int j = 0; j < plant.joints; ++j) {
      TickRow r;
      r.tick = k;
      r.t = t;
      r.joint = j;
      r.theta_hat = tick.measured.theta_hat(j);
      r.theta_net = net(j);
      r.tau_hat = tick.measured.tau_hat(j);
      r.tau_ext = arm.joints()[j].tau_ext;
      r.command = tick.command(j);
      r.mode = tick.modes[j];
      rows.push_back(r);
    }
  }
  return rows;
}

ScenarioScript scenario_from_json(const std::string& text) {
  ScenarioScript s;
  try {
    const Json j = Json::parse(text);
    if (j.contains("plant")) {
      const auto& pj = j.at("plant");
      const int joints = pj.value("joints", 1);
      s.plant = PlantModel::reference(joints);
      from_json(pj, s.plant);
    }
    read_optional(j, "gains", s.gains);
    read_optional(j, "duration", s.duration);
    if (j.contains("reference")) {
      const auto& r = j.at("reference");
      read_optional(r, "amplitude", s.reference.amplitude);
      read_optional(r, "frequency_hz", s.reference.frequency_hz);
      read_optional(r, "offset", s.reference.offset);
      read_optional(r, "phase", s.reference.phase);
    }
    if (j.contains("disturbances")) {
      for (const auto& d : j.at("disturbances")) {
        s.disturbances.push_back({d.at("joint").get<int>(), d.at("t_start").get<double>(),
                                  d.at("t_end").get<double>(), d.at("torque").get<double>()});
      }
    }
  } catch (const Json::exception& e) {
    throw FormatError(std::string("scenario json: ") + e.what());
  }
  s.plant.validate();
  s.gains.validate();
  return s;
}

std::string scenario_to_json(const ScenarioScript& s) {
  Json j = Json::object();
  j["plant"] = s.plant;
  j["gains"] = s.gains;
  j["duration"] = s.duration;
  j["reference"] = Json{{"amplitude", s.reference.amplitude},
                        {"frequency_hz", s.reference.frequency_hz},
                        {"offset", s.reference.offset},
                        {"phase", s.reference.phase}};
  Json dist = Json::array();
  for (const auto& d : s.disturbances) {
    dist.push_back(Json{{"joint", d.joint}, {"t_start", d.t_start}, {"t_end", d.t_end},
                        {"torque", d.torque}});
  }
  j["disturbances"] = std::move(dist);
  return j.dump(2);
}

std::string tick_log_csv(const std::vector<TickRow>& rows) {
  std::ostringstream out;
  out << "tick,t,joint,theta_hat,theta_net,tau_hat,tau_ext,command,mode\n";
  for (const auto& r : rows) {
    out << r.tick << ',' << io::format_double(r.t) << ',' << r.joint << ','
        << io::format_double(r.theta_hat) << ',' << io::format_double(r.theta_net) << ','
        << io::format_double(r.tau_hat) << ',' << io::format_double(r.tau_ext) << ','
        << io::format_double(r.command) << ',' << mode_name(r.mode) << '\n';
  }
  return out.str();
}

}  // namespace pvhri
