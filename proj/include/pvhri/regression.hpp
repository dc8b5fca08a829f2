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
#include <optional>
#include <random>
#include <vector>

#include "pvhri/adam.hpp"
#include "pvhri/encoding.hpp"
#include "pvhri/pvrnn.hpp"
#include "pvhri/trainer.hpp"

namespace pvhri {

struct RegressionOptions {
  int length = kOpeningWindow;
  int inner_epochs = 28;
  double w_interact = 1e-5;
  double alpha = 0.1;
  Optimizer optimizer = Optimizer::kPlain;

  void validate() const;
  bool operator==(const RegressionOptions&) const = default;
};

/// Per-layer latent record of one step.
struct LatentSnapshot {
  long long t = 0;
  std::vector<Eigen::VectorXd> d, mu_p, sigma_p, mu_q, sigma_q;
};

/// Sliding window of the most recent evidence and its adaptive values. The anchor is
/// the deterministic state just before the oldest buffered step.
struct RegressionWindow {
  RegressionOptions options;
  NetworkState<double> anchor;
  std::vector<Eigen::VectorXd> evidence;  // encoded postures, oldest first
  AdaptiveSequence<double> a;             // one column per buffered step
  long long t = 0;                        // steps appended so far
  long long first = 0;                    // absolute index of the oldest buffered step

  /// Optional intention: trained adaptive values of one primitive, used for the
  /// columns of steps that fall in [seed_from, seed_from + length).
  std::optional<AdaptiveSequence<double>> seed;
  long long seed_from = 0;
  long long seed_phase = 0;  // column of `seed` used for absolute step seed_from

  std::mt19937_64 rng;

  int size() const { return static_cast<int>(evidence.size()); }
  bool full() const { return size() >= options.length; }
};

struct RegressionResult {
  Eigen::VectorXd prediction;        // decoded joint targets for the next step
  Eigen::VectorXd prediction_probs;  // stacked output probabilities
  LatentSnapshot latent;             // at the newest evidence step
  double a_update_norm = 0;          // L2 norm of the total change of a this step
};

RegressionWindow make_window(const NetworkConfig& config, const RegressionOptions& options,
                             std::uint64_t seed);

/// Seeds the window with an intention: the trained adaptive values of one primitive,
/// starting at column `phase` for the next appended step. Already buffered steps are
/// re-seeded as well (phase-aligned backwards).
void set_intention(RegressionWindow& window, const AdaptiveSequence<double>& trained,
                   long long phase);

/// Drops the oldest step and advances the anchor through it with the ε = 0 posterior.
/// A window below capacity is left unchanged.
void slide_window(RegressionWindow& window, const NetworkParams<double>& params,
                  const NetworkConfig& config);

/// Appends one encoded posture, updates only the adaptive values for inner_epochs
/// iterations and predicts the next posture.
RegressionResult regression_step(RegressionWindow& window, const Eigen::VectorXd& evidence,
                                 const NetworkParams<double>& params, const NetworkConfig& config,
                                 const SoftmaxCoding& coding);

}  // namespace pvhri
