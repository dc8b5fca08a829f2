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
#include <deque>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pvhri/encoding.hpp"

namespace pvhri {

enum class Mode { kActive, kCompliant };

const char* mode_name(Mode m);

struct ControllerGains {
  double tau_th = 0.8;       // Nm, entry threshold on |external torque|
  double eta_a_min = 0.1;    // active gain at large error
  double eta_a_max = 0.9;    // active gain at zero error
  double e_max = 0.5;        // rad, error at which the gain bottoms out
  double eta_p = 0.05;       // rad/Nm
  double eta_i = 0.01;       // rad/(Nm tick)
  double eta_n = 0.3;        // soft impedance toward the network target
  double s_max = 0.05;       // rad, saturation of the impedance term
  double delta_max = 0.1;    // rad per tick, bound on every commanded change
  double integral_bound = 5; // Nm tick, bound on the integral accumulator
  double exit_ratio = 0.5;   // leave compliance below exit_ratio * tau_th ...
  int hold_ticks = 8;        // ... for this many consecutive ticks

  void validate() const;
  bool operator==(const ControllerGains&) const = default;
};

struct JointState {
  double theta_hat = 0;  // measured position
  double theta_net = 0;  // network target
  double tau_hat = 0;    // measured torque
  double tau_act = 0;    // inverse-dynamics torque
  double tau_ext = 0;    // estimated external torque
  Mode mode = Mode::kActive;
  double integral = 0;   // accumulated external torque while compliant
  int exit_count = 0;    // consecutive ticks below the exit level
  double command = 0;    // last commanded target
};

/// tau_hat - tau_act.
inline double estimate_external(double tau_hat, double tau_act) { return tau_hat - tau_act; }

/// Threshold switching with exit hysteresis. Updates the exit counter and zeroes the
/// integral accumulator when compliance ends.
Mode select_mode(JointState& joint, const ControllerGains& gains);

/// Cosine-scheduled gain for a tracking error.
double active_gain(double error, const ControllerGains& gains);

/// theta_hat plus the saturated proportional correction toward theta_net.
double active_target(double theta_net, double theta_hat, const ControllerGains& gains);

/// PI yielding to the external torque plus the soft pull toward theta_net; uses the
/// joint's current integral accumulator.
double compliant_target(const JointState& joint, const ControllerGains& gains);

/// Adds tau_ext to the accumulator, clamped to the windup bound.
void accumulate_integral(JointState& joint, const ControllerGains& gains);

/// One controller tick for one joint: mode selection, target law, and the clamps
/// (change from the previous command within delta_max, joint range).
double controller_tick(JointState& joint, const ControllerGains& gains, const JointRange& range);

struct PlantModel {
  int joints = 12;
  double rate_hz = 50.0;
  double servo_time_constant = 0.02;  // s
  std::vector<double> inertia;        // kg m^2
  std::vector<double> friction;       // Nm s/rad
  std::vector<double> gravity;        // Nm, torque amplitude of G sin(theta)
  std::vector<double> stiffness;      // Nm/rad, passive yielding to external torque
  std::vector<JointRange> limits;
  double noise_std = 0.0;             // Nm, measured-torque noise (0 = deterministic)
  std::uint64_t noise_seed = 0;

  static PlantModel reference(int joints = 12);
  double dt() const { return 1.0 / rate_hz; }
  void validate() const;
};

struct PlantState {
  Eigen::VectorXd theta;
  std::deque<Eigen::VectorXd> history;  // most recent last, at most 3 samples
  std::mt19937_64 rng;
  long long tick = 0;
  int limit_hits = 0;
};

PlantState make_plant_state(const PlantModel& plant, const Eigen::VectorXd& initial);

struct Measurement {
  Eigen::VectorXd theta_hat;
  Eigen::VectorXd tau_hat;
  std::vector<bool> at_limit;
};

/// First-order servo toward the (range-clamped) commands, passive deflection by the
/// injected torque, measured torque = servo + gravity + injected (+ noise).
Measurement plant_step(const PlantModel& plant, PlantState& state, const Eigen::VectorXd& commands,
                       const Eigen::VectorXd& injected);

/// Gravity + inertial + friction torque from the position history (>= 2 samples).
Eigen::VectorXd inverse_dynamics(const PlantModel& plant,
                                 const std::deque<Eigen::VectorXd>& history);

struct SurrogateOptions {
  double gain = 1.5;   // Nm/rad (engagement)
  double bound = 3.0;  // Nm per joint

  bool operator==(const SurrogateOptions&) const = default;
};

/// clamp(gain * (script - theta_hat), +-bound) per joint.
Eigen::VectorXd human_surrogate(const Eigen::VectorXd& script_posture,
                                const Eigen::VectorXd& theta_hat, const SurrogateOptions& opt);

/// Script posture at a fractional network step, looping and linearly interpolated.
Eigen::VectorXd script_posture(const Trajectory& script, double network_step);

/// Closed loop of controller and plant over all joints.
class Arm {
 public:
  Arm(PlantModel plant, ControllerGains gains, const Eigen::VectorXd& initial);

  struct Tick {
    Eigen::VectorXd command;
    std::vector<Mode> modes;  // modes used for this tick's commands
    Measurement measured;
    int switches = 0;
  };

  /// Commands from the latest measurement and theta_net, plant step with the injected
  /// torques, then inverse dynamics and the external-torque estimate.
  Tick step(const Eigen::VectorXd& theta_net, const Eigen::VectorXd& injected);

  const std::vector<JointState>& joints() const { return joints_; }
  Eigen::VectorXd theta_hat() const;
  Eigen::VectorXd tau_ext() const;
  const PlantModel& plant() const { return plant_; }
  const ControllerGains& gains() const { return gains_; }

 private:
  PlantModel plant_;
  ControllerGains gains_;
  PlantState state_;
  std::vector<JointState> joints_;
};

struct Disturbance {
  int joint = 0;
  double t_start = 0;  // s
  double t_end = 0;    // s
  double torque = 0;   // Nm
};

struct SinusoidReference {
  double amplitude = 0.3;
  double frequency_hz = 0.2;
  double offset = 0.0;
  double phase = 0.0;

  double at(double t) const;
};

struct ScenarioScript {
  PlantModel plant = PlantModel::reference(1);
  ControllerGains gains;
  std::vector<Disturbance> disturbances;
  SinusoidReference reference;
  double duration = 15.0;  // s
};

struct TickRow {
  long long tick = 0;
  double t = 0;
  int joint = 0;
  double theta_hat = 0, theta_net = 0, tau_hat = 0, tau_ext = 0, command = 0;
  Mode mode = Mode::kActive;
};

/// One joint tracking the default sinusoid for 15 s with a `torque` Nm pulse on
/// [start, start + length).
ScenarioScript pulse_scenario(double torque = 2.0, double start = 5.0, double length = 3.0);

/// Runs a scripted controller/plant session; one row per fast tick and joint.
std::vector<TickRow> run_scenario(const ScenarioScript& script);

ScenarioScript scenario_from_json(const std::string& text);
std::string scenario_to_json(const ScenarioScript& script);
std::string tick_log_csv(const std::vector<TickRow>& rows);

/// Latest-value exchange between execution contexts; readers always see one
/// complete published value.
template <typename T>
class Snapshot {
 public:
  void publish(T value) {
    std::lock_guard<std::mutex> lock(mutex_);
    value_ = std::move(value);
    ++version_;
  }
  T read() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return value_;
  }
  long long version() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return version_;
  }

 private:
  mutable std::mutex mutex_;
  T value_{};
  long long version_ = 0;
};

}  // namespace pvhri
