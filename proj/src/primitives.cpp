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

#include "pvhri/primitives.hpp"

#include <cmath>

namespace pvhri {

int primitive_index(const std::string& name) {
  for (int i = 0; i < 3; ++i) {
    if (name == kPrimitiveNames[i]) return i;
  }
  throw ValidationError("unknown primitive '" + name + "' (expected A, B or C)");
}

std::vector<Trajectory> make_primitives(int dims, int steps, double rate_hz,
                                        const PrimitiveShape& shape) {
  if (dims < 2) throw ValidationError("make_primitives: dims must be >= 2");
  if (steps < 2) throw ValidationError("make_primitives: steps must be >= 2");
  if (!(rate_hz > 0)) throw ValidationError("make_primitives: rate must be positive");
  const double top = shape.offset + shape.amplitude;
  if (top > shape.limit || shape.background > shape.limit) {
    throw ValidationError("make_primitives: shape exceeds joint limits");
  }
  const std::array<int, 3> cycles = {2, 3, 1};
  const int half = dims / 2;
  std::vector<Trajectory> out;
  for (int p = 0; p < 3; ++p) {
    Trajectory traj;
    traj.rate_hz = rate_hz;
    traj.limits.assign(dims, JointRange{-shape.limit, shape.limit});
    for (int j = 0; j < dims; ++j) traj.joint_names.push_back("j" + std::to_string(j));
    traj.values.resize(steps, dims);
    for (int t = 0; t < steps; ++t) {
      const double phi = 2.0 * M_PI * cycles[p] * t / steps;
      for (int j = 0; j < dims; ++j) {
        // Group index relative to the primitive, so that at t = 0 the three
        // postures are permutations of each other.
        const int rel = ((j / 2) % 3 - p + 3) % 3;
        const double sign = j >= half ? -1.0 : 1.0;
        if (rel == 0) {
          // Starts at the trough (offset - amplitude); joints in a pair lag slightly.
          const double lag = 0.25 * (j % 2);
          traj.values(t, j) = shape.offset - shape.amplitude * std::cos(phi - lag);
        } else {
          traj.values(t, j) = sign * shape.background * std::sin(phi + 0.5 * rel);
        }
      }
    }
    out.push_back(std::move(traj));
  }
  return out;
}

Eigen::VectorXd neutral_posture(int dims) { return Eigen::VectorXd::Zero(dims); }

}  // namespace pvhri
