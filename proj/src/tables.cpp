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

#include "pvhri/tables.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

#include "pvhri/error.hpp"
#include "pvhri/io.hpp"
#include "pvhri/primitives.hpp"

namespace pvhri {

std::vector<IntentBehavior> intent_behavior_probs(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw ValidationError("intent_behavior_probs: no records");
  struct Count {
    long long intent = 0, behavior = 0, ticks = 0;
  };
  std::map<std::pair<std::string, int>, Count> counts;
  for (const auto& r : records) {
    const int human = primitive_index(r.spec.human_intent);
    for (const int trial : {0, r.spec.trial}) {
      auto& c = counts[{r.spec.profile, trial}];
      for (const auto& t : r.network) {
        c.intent += t.intent_label == human;
        c.behavior += t.behavior_label == human;
        ++c.ticks;
      }
    }
  }
  std::vector<IntentBehavior> out;
  for (const auto& [key, c] : counts) {
    IntentBehavior row;
    row.profile = key.first;
    row.trial = key.second;
    row.ticks = c.ticks;
    if (c.ticks > 0) {
      row.p_intent = static_cast<double>(c.intent) / static_cast<double>(c.ticks);
      row.p_behavior = static_cast<double>(c.behavior) / static_cast<double>(c.ticks);
    }
    out.push_back(row);
  }
  return out;
}

std::vector<TorqueStat> torque_stats(const std::vector<TrialRecord>& records) {
  std::map<std::tuple<std::string, std::string, int>, std::vector<double>> samples;
  for (const auto& r : records) {
    auto& s = samples[{r.spec.profile, r.spec.pair(), r.spec.trial}];
    for (const auto& f : r.fast) s.push_back(f.tau_ext_sum);
  }
  std::vector<TorqueStat> out;
  for (const auto& [key, s] : samples) {
    TorqueStat st;
    std::tie(st.profile, st.pair, st.trial) = key;
    st.ticks = static_cast<long long>(s.size());
    if (!s.empty()) {
      const Eigen::Map<const Eigen::VectorXd> v(s.data(), static_cast<Eigen::Index>(s.size()));
      st.mean = v.mean();
      st.std = std::sqrt((v.array() - st.mean).square().mean());
    }
    out.push_back(st);
  }
  return out;
}

std::string intent_behavior_csv(const std::vector<IntentBehavior>& rows) {
  int trials = 0;
  for (const auto& r : rows) trials = std::max(trials, r.trial);
  std::ostringstream os;
  os << "data";
  for (const char* p : kProfileNames) os << ',' << p << "_p_intent," << p << "_p_behavior";
  os << '\n';
  for (int t = 0; t <= trials; ++t) {
    os << (t == 0 ? std::string("all") : "trial " + std::to_string(t));
    for (const std::string p : kProfileNames) {
      const auto it = std::find_if(rows.begin(), rows.end(),
                                   [&](const IntentBehavior& r) { return r.profile == p && r.trial == t; });
      if (it == rows.end()) {
        os << ",,";
      } else {
        os << ',' << io::format_double(it->p_intent) << ',' << io::format_double(it->p_behavior);
      }
    }
    os << '\n';
  }
  return os.str();
}

std::string torque_table_csv(const std::vector<TorqueStat>& stats) {
  int trials = 0;
  std::vector<std::string> pairs;
  for (const auto& s : stats) {
    trials = std::max(trials, s.trial);
    if (std::find(pairs.begin(), pairs.end(), s.pair) == pairs.end()) pairs.push_back(s.pair);
  }
  std::sort(pairs.begin(), pairs.end());
  std::ostringstream os;
  os << "section,case";
  for (const char* p : kProfileNames) {
    for (int t = 1; t <= trials; ++t) os << ',' << p << "_T" << t;
  }
  os << '\n';
  for (const bool mean : {true, false}) {
    for (const auto& pair : pairs) {
      os << (mean ? "mean" : "std") << ',' << pair;
      for (const std::string p : kProfileNames) {
        for (int t = 1; t <= trials; ++t) {
          const auto it = std::find_if(stats.begin(), stats.end(), [&](const TorqueStat& s) {
            return s.profile == p && s.pair == pair && s.trial == t;
          });
          os << ',';
          if (it != stats.end()) os << io::format_double(mean ? it->mean : it->std);
        }
      }
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace pvhri
