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

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pvhri/adam.hpp"
#include "pvhri/encoding.hpp"
#include "pvhri/pvrnn.hpp"

namespace pvhri {

inline constexpr std::array<const char*, 3> kProfileNames = {"rigid", "moderate", "flexible"};

struct CognitiveProfile {
  std::string name;
  double train_w = 0.001;
  double interact_w = 1e-5;

  static CognitiveProfile rigid() { return {"rigid", 0.01, 1e-5}; }
  static CognitiveProfile moderate() { return {"moderate", 0.001, 1e-5}; }
  static CognitiveProfile flexible() { return {"flexible", 0.0001, 1e-5}; }
  static std::vector<CognitiveProfile> reference() { return {rigid(), moderate(), flexible()}; }
  /// Throws ValidationError for names other than rigid, moderate and flexible.
  static CognitiveProfile by_name(const std::string& name);

  bool operator==(const CognitiveProfile&) const = default;
};

enum class Optimizer { kAdam, kPlain };

struct TrainOptions {
  int epochs = 5000;
  Optimizer param_optimizer = Optimizer::kAdam;
  AdamSettings param_adam;
  double param_lr_plain = 1e-3;
  Optimizer adaptive_optimizer = Optimizer::kPlain;
  double adaptive_alpha = 0.1;  // learning rate of the adaptive values

  void validate() const;
  bool operator==(const TrainOptions&) const = default;
};

struct EpochLog {
  int epoch = 0;
  double reconstruction = 0;  // Σ target · log x over the dataset
  double regulation = 0;      // Σ KL over the dataset (unweighted)
  double deficit = 0;         // max reconstruction - reconstruction, >= 0

  bool operator==(const EpochLog&) const = default;
};

/// Everything needed to resume training exactly.
struct TrainerState {
  NetworkConfig config;
  SoftmaxCoding coding;
  CognitiveProfile profile;
  TrainOptions options;
  std::vector<Trajectory> dataset;
  NetworkParams<double> params;
  std::vector<AdaptiveSequence<double>> adaptive;  // one per training sequence
  AdamState<NetworkParams<double>> param_moments;
  std::vector<AdamState<AdaptiveSequence<double>>> adaptive_moments;
  std::mt19937_64 rng;
  int epoch = 0;
  std::vector<EpochLog> log;

  bool operator==(const TrainerState& other) const;
};

/// Fresh state: random parameters from config.seed, zero adaptive values.
TrainerState init_trainer(const std::vector<Trajectory>& dataset, const NetworkConfig& config,
                          const SoftmaxCoding& coding, const CognitiveProfile& profile,
                          const TrainOptions& options);

class Trainer {
 public:
  explicit Trainer(TrainerState state);

  /// One full-batch epoch: a posterior rollout per sequence, gradients, one update.
  /// Throws DivergenceError if the objective becomes non-finite.
  const EpochLog& step();
  void run(int epochs);

  const TrainerState& state() const { return state_; }
  TrainerState& state() { return state_; }
  const std::vector<Eigen::MatrixXd>& targets() const { return targets_; }

 private:
  TrainerState state_;
  std::vector<Eigen::MatrixXd> targets_;
};

/// Trains from scratch for `epochs` epochs (>= 1) with the given seed.
TrainerState train(const std::vector<Trajectory>& dataset, NetworkConfig config,
                   const SoftmaxCoding& coding, const CognitiveProfile& profile,
                   TrainOptions options, int epochs, std::uint64_t seed);

/// a += alpha * grad (plain ascent on the ELBO).
void update_adaptive(AdaptiveSequence<double>& a, const AdaptiveSequence<double>& grad,
                     double alpha);

/// Coding used for a dataset: the configured bins/sharpness over each joint's limits.
SoftmaxCoding coding_for(const std::vector<Trajectory>& dataset, int bins, double sharpness);

/// Steps of a primitive's trained adaptive values used to set an intention, both for
/// generation and for the regression window.
inline constexpr int kOpeningWindow = 20;

/// Generates `steps` steps of training sequence `sequence`. The first `seed_steps` steps
/// draw z from the posterior with that sequence's trained adaptive values (the only
/// thing that tells primitives apart from the shared zero initial state); the rest run
/// on the prior.
Rollout<double> generate_sequence(const TrainerState& state, int sequence, int steps,
                                  GenerationMode mode, std::mt19937_64& rng,
                                  int seed_steps = kOpeningWindow);

/// Decoded joint angles (steps x dims) of a rollout's outputs.
Trajectory decode_rollout(const Rollout<double>& r, const TrainerState& state);

void write_curves_csv(const std::vector<EpochLog>& log, const std::string& path);

}  // namespace pvhri
