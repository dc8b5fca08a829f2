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
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pvhri/analysis.hpp"
#include "pvhri/control.hpp"
#include "pvhri/json.hpp"
#include "pvhri/regression.hpp"
#include "pvhri/trainer.hpp"

namespace pvhri {

struct TrialSpec {
  std::string robot_intent = "B";
  std::string human_intent = "A";
  std::string profile = "moderate";
  int steps = 300;  // network ticks
  std::uint64_t seed = 1;
  int trial = 1;    // repeat index within a matrix

  bool congruent() const { return robot_intent == human_intent; }
  std::string pair() const { return robot_intent + human_intent; }
  void validate(int window_length) const;
  bool operator==(const TrialSpec&) const = default;
};

struct SessionOptions {
  double network_hz = 4.0;
  double control_hz = 50.0;
  RegressionOptions regression;  // w_interact is taken from the profile
  ControllerGains gains;
  PlantModel plant = PlantModel::reference(12);
  SurrogateOptions surrogate;

  void validate() const;
};

/// Fast ticks that belong to network tick n: [fast_tick_begin(n), fast_tick_begin(n+1)).
long long fast_tick_begin(long long n, double network_hz, double control_hz);

struct NetworkTickRecord {
  long long t = 0;
  Eigen::VectorXd posture;    // measured posture used as evidence
  Eigen::VectorXd theta_net;  // prediction published for the next interval
  int intent_label = -1;      // observer label of theta_net
  int behavior_label = -1;    // observer label of the measured posture
  Eigen::VectorXd intent_scores, behavior_scores;
  double tau_ext_sum = 0;     // Σ_j |τ_ext| at the tick boundary
};

struct FastTickRecord {
  long long tick = 0;
  long long network_tick = 0;
  Eigen::VectorXd theta_hat, theta_net, tau_ext, tau_injected;
  std::vector<Mode> modes;
  double tau_ext_sum = 0;
};

struct TrialRecord {
  TrialSpec spec;
  std::vector<NetworkTickRecord> network;
  std::vector<FastTickRecord> fast;
  std::vector<LatentSnapshot> latents;
};

/// Source of human torque for each fast tick; the scripted surrogate or a live client.
class HumanSource {
 public:
  virtual ~HumanSource() = default;
  virtual Eigen::VectorXd torque(long long fast_tick, double network_step,
                                 const Eigen::VectorXd& theta_hat) = 0;
};

class ScriptedHuman : public HumanSource {
 public:
  ScriptedHuman(Trajectory script, SurrogateOptions options)
      : script_(std::move(script)), options_(options) {}
  Eigen::VectorXd torque(long long fast_tick, double network_step,
                         const Eigen::VectorXd& theta_hat) override;

 private:
  Trajectory script_;
  SurrogateOptions options_;
};

/// Network, controller and plant advancing together on a simulated clock.
class Session {
 public:
  Session(const TrainerState& checkpoint, const ObserverNet& observer, TrialSpec spec,
          SessionOptions options);

  /// One network tick followed by its fast ticks. Returns the network record.
  const NetworkTickRecord& step(HumanSource& human);
  /// Restarts the regression window seeded with another primitive's opening.
  void set_intent(const std::string& primitive);

  bool done() const { return static_cast<int>(record_.network.size()) >= record_.spec.steps; }
  const TrialRecord& record() const { return record_; }
  TrialRecord take_record() { return std::move(record_); }
  const Arm& arm() const { return arm_; }
  const TrainerState& checkpoint() const { return checkpoint_; }
  long long network_tick() const { return static_cast<long long>(record_.network.size()); }
  const SessionOptions& options() const { return options_; }
  const std::string& intent() const { return intent_; }
  long long fast_tick() const { return fast_tick_; }

  /// Called once per network tick after the regression step, before its fast ticks.
  std::function<void(const NetworkTickRecord&, const LatentSnapshot&)> on_network_tick;
  /// Called after every fast tick (used by the live gateway).
  std::function<void(const FastTickRecord&, const Arm&)> on_fast_tick;
  /// Called before every fast tick to drain queued commands; may replace the torque.
  std::function<void(long long fast_tick, Eigen::VectorXd& torque)> before_fast_tick;

 private:
  const TrainerState& checkpoint_;
  const ObserverNet& observer_;
  SessionOptions options_;
  RegressionWindow window_;
  Arm arm_;
  TrialRecord record_;
  Eigen::VectorXd theta_net_;
  std::string intent_;
  long long fast_tick_ = 0;
};

/// Runs one scripted trial. Throws ValidationError when the checkpoint profile does
/// not match the spec.
TrialRecord run_trial(const TrialSpec& spec, const TrainerState& checkpoint,
                      const ObserverNet& observer, const SessionOptions& options);

struct MatrixResult {
  std::vector<TrialRecord> records;
  std::vector<std::string> failures;  // one message per failed spec
};

/// Ordered pairs (robot, human) with robot != human: AB, AC, BA, BC, CA, CB.
std::vector<std::pair<std::string, std::string>> incongruent_pairs();
std::vector<std::pair<std::string, std::string>> congruent_pairs();

/// Seeds follow base_seed, profile, pair and repeat so every spec is distinct.
std::vector<TrialSpec> matrix_specs(const std::vector<std::string>& profiles,
                                    const std::vector<std::pair<std::string, std::string>>& pairs,
                                    int repeats, int steps, std::uint64_t base_seed);

MatrixResult run_matrix(const std::vector<TrialSpec>& specs,
                        const std::map<std::string, TrainerState>& checkpoints,
                        const ObserverNet& observer, const SessionOptions& options);

/// Directory layout: spec.json, network_ticks.csv, controller_ticks.csv, latents.jsonl.
void save_record(const TrialRecord& record, const std::string& dir);
TrialRecord load_record(const std::string& dir);
std::string record_dir_name(const TrialSpec& spec);

void to_json(Json& j, const TrialSpec& s);
void from_json(const Json& j, TrialSpec& s);
Json latent_to_json(const LatentSnapshot& s);
LatentSnapshot latent_from_json(const Json& j);

}  // namespace pvhri
