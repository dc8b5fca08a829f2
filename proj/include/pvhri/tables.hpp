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

#include <string>
#include <vector>

#include "pvhri/session.hpp"

namespace pvhri {

/// Per-tick frequencies of the intention channel (label of theta_net) and the behavior
/// channel (label of the measured posture) naming the human's intended primitive.
struct IntentBehavior {
  std::string profile;
  int trial = 0;  // 0 pools every repeat
  double p_intent = 0;
  double p_behavior = 0;
  long long ticks = 0;
};

/// One row per profile for the pooled records and one per (profile, repeat).
/// Throws ValidationError on an empty record set.
std::vector<IntentBehavior> intent_behavior_probs(const std::vector<TrialRecord>& records);

/// Mean and population standard deviation of sum_j |tau_ext| over the fast ticks of
/// every record sharing (profile, pair, trial).
struct TorqueStat {
  std::string profile;
  std::string pair;
  int trial = 1;
  double mean = 0;
  double std = 0;
  long long ticks = 0;
};

std::vector<TorqueStat> torque_stats(const std::vector<TrialRecord>& records);

/// Rows "all", "trial 1", ...; columns <profile>_p_intent, <profile>_p_behavior for
/// rigid, moderate, flexible. Missing cells are left empty.
std::string intent_behavior_csv(const std::vector<IntentBehavior>& rows);

/// A "mean" and a "std" section, one row per pair, columns <profile>_T<k>.
std::string torque_table_csv(const std::vector<TorqueStat>& stats);

}  // namespace pvhri
