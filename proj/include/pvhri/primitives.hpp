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
#include <string>
#include <vector>

#include "pvhri/encoding.hpp"

namespace pvhri {

inline constexpr std::array<const char*, 3> kPrimitiveNames = {"A", "B", "C"};

/// Index 0..2 for "A".."C"; throws ValidationError otherwise.
int primitive_index(const std::string& name);

struct PrimitiveShape {
  double offset = 0.35;     // mean lift of the primitive's own joint group (rad)
  double amplitude = 0.25;  // oscillation of the own group around the offset
  double background = 0.05; // oscillation of the remaining joints around neutral
  double limit = 1.0;       // symmetric joint limit (rad)
};

/// Three loopable periodic trajectories A, B, C. Joints are split into three groups
/// by pairs ({0,1,6,7}, {2,3,8,9}, {4,5,10,11} for 12 joints); each primitive lifts its
/// own group and oscillates it (A: 2 cycles, B: 3 cycles, C: 1 cycle per sequence).
/// The opening postures are permutations of each other near the all-zero neutral
/// posture, which is therefore equidistant from all three.
std::vector<Trajectory> make_primitives(int dims = 12, int steps = 90, double rate_hz = 4.0,
                                        const PrimitiveShape& shape = {});

Eigen::VectorXd neutral_posture(int dims);

}  // namespace pvhri
