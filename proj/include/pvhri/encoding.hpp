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

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pvhri/error.hpp"

namespace pvhri {

struct JointRange {
  double lo = -1.0;
  double hi = 1.0;

  double width() const { return hi - lo; }
  bool contains(double angle) const { return angle >= lo && angle <= hi; }
  bool operator==(const JointRange&) const = default;
};

/// Sparse probability coding of joint angles against a per-dimension softmax.
///
/// Each dimension owns `bins_per_dim` reference angles spaced evenly over its
/// range (endpoints included). An angle maps to p_k ∝ exp(-sharpness (a - c_k)^2).
struct SoftmaxCoding {
  int bins_per_dim = 11;
  double sharpness = 25.0;
  std::vector<JointRange> ranges;

  SoftmaxCoding() = default;
  SoftmaxCoding(int bins, double sharp, std::vector<JointRange> joint_ranges);

  int dims() const { return static_cast<int>(ranges.size()); }
  int output_size() const { return dims() * bins_per_dim; }
  double bin_width(int dim) const;
  Eigen::VectorXd centers(int dim) const;
  void validate() const;
};

/// Probability vector for one angle of dimension `dim`; throws RangeError outside the range.
Eigen::VectorXd encode_angle(double angle, const SoftmaxCoding& coding, int dim = 0);

/// Expected angle Σ p_k c_k. Throws ValidationError for malformed vectors.
template <typename Derived>
double decode_probs(const Eigen::MatrixBase<Derived>& probs, const SoftmaxCoding& coding,
                    int dim = 0) {
  if (probs.size() != coding.bins_per_dim) {
    throw ValidationError("decode_probs: expected " + std::to_string(coding.bins_per_dim) +
                          " bins, got " + std::to_string(probs.size()));
  }
  const double total = static_cast<double>(probs.sum());
  if (!(std::abs(total - 1.0) <= 1e-6) || (probs.array() < 0).any()) {
    throw ValidationError("decode_probs: vector is not a probability distribution");
  }
  return coding.centers(dim).dot(probs.template cast<double>());
}

struct Trajectory {
  double rate_hz = 4.0;
  std::vector<std::string> joint_names;
  std::vector<JointRange> limits;
  Eigen::MatrixXd values;  // steps x dims

  int steps() const { return static_cast<int>(values.rows()); }
  int dims() const { return static_cast<int>(values.cols()); }
  void validate() const;
  bool operator==(const Trajectory& other) const;
};

/// (dims * bins) x steps; column t stacks the per-dimension vectors of step t.
Eigen::MatrixXd encode_trajectory(const Trajectory& traj, const SoftmaxCoding& coding);

/// Inverse of encode_trajectory by expectation; returns steps x dims.
Eigen::MatrixXd decode_sequence(const Eigen::MatrixXd& probs, const SoftmaxCoding& coding);

/// Decodes a single stacked column.
Eigen::VectorXd decode_posture(const Eigen::VectorXd& probs, const SoftmaxCoding& coding);

Eigen::VectorXd encode_posture(const Eigen::VectorXd& posture, const SoftmaxCoding& coding);

// Trajectory files: JSON {rate_hz, dims, joint_names, limits, values} or CSV with a
// header line of joint names.
std::string trajectory_to_json(const Trajectory& traj);
Trajectory trajectory_from_json(const std::string& text);
void write_trajectory(const Trajectory& traj, const std::string& path);
Trajectory read_trajectory(const std::string& path, double csv_rate_hz = 4.0,
                           JointRange csv_limits = {});
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

}  // namespace pvhri
