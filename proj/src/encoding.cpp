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

#include "pvhri/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>


#include "pvhri/io.hpp"
#include "pvhri/json.hpp"

namespace pvhri {

using nlohmann::json;

SoftmaxCoding::SoftmaxCoding(int bins, double sharp, std::vector<JointRange> joint_ranges)
    : bins_per_dim(bins), sharpness(sharp), ranges(std::move(joint_ranges)) {
  validate();
}

double SoftmaxCoding::bin_width(int dim) const {
  return ranges.at(dim).width() / (bins_per_dim - 1);
}

Eigen::VectorXd SoftmaxCoding::centers(int dim) const {
  const auto& r = ranges.at(dim);
  return Eigen::VectorXd::LinSpaced(bins_per_dim, r.lo, r.hi);
}

void SoftmaxCoding::validate() const {
  if (bins_per_dim < 2) throw ValidationError("SoftmaxCoding: bins_per_dim must be >= 2");
  if (!(sharpness > 0)) throw ValidationError("SoftmaxCoding: sharpness must be positive");
  if (ranges.empty()) throw ValidationError("SoftmaxCoding: no dimensions");
  for (const auto& r : ranges) {
    if (!(r.hi > r.lo)) throw ValidationError("SoftmaxCoding: empty joint range");
  }
}

Eigen::VectorXd encode_angle(double angle, const SoftmaxCoding& coding, int dim) {
  const auto& r = coding.ranges.at(dim);
  if (!r.contains(angle)) {
    std::ostringstream msg;
    msg << "encode_angle: " << angle << " outside [" << r.lo << ", " << r.hi << "]";
    throw RangeError(msg.str());
  }
  const Eigen::ArrayXd offset = coding.centers(dim).array() - angle;
  Eigen::ArrayXd logits = -coding.sharpness * offset.square();
  logits -= logits.maxCoeff();
  Eigen::VectorXd p = logits.exp().matrix();
  return p / p.sum();
}

void Trajectory::validate() const {
  if (steps() < 1 || dims() < 1) throw ValidationError("Trajectory: empty");
  if (static_cast<int>(limits.size()) != dims()) {
    throw ValidationError("Trajectory: limits do not match dims");
  }
  if (!joint_names.empty() && static_cast<int>(joint_names.size()) != dims()) {
    throw ValidationError("Trajectory: joint_names do not match dims");
  }
  if (!(rate_hz > 0)) throw ValidationError("Trajectory: rate_hz must be positive");
  for (int t = 0; t < steps(); ++t) {
    for (int j = 0; j < dims(); ++j) {
      if (!std::isfinite(values(t, j)) || !limits[j].contains(values(t, j))) {
        throw RangeError("Trajectory: value at step " + std::to_string(t) + ", dim " +
                         std::to_string(j) + " outside joint limits");
      }
    }
  }
}

bool Trajectory::operator==(const Trajectory& other) const {
  return rate_hz == other.rate_hz && joint_names == other.joint_names &&
         limits == other.limits && values.rows() == other.values.rows() &&
         values.cols() == other.values.cols() && values == other.values;
}

Eigen::MatrixXd encode_trajectory(const Trajectory& traj, const SoftmaxCoding& coding) {
  if (traj.dims() != coding.dims()) {
    throw ShapeError("encode_trajectory: trajectory has " + std::to_string(traj.dims()) +
                     " dims, coding has " + std::to_string(coding.dims()));
  }
  const int bins = coding.bins_per_dim;
  Eigen::MatrixXd out(coding.output_size(), traj.steps());
  for (int t = 0; t < traj.steps(); ++t) {
    for (int j = 0; j < traj.dims(); ++j) {
      try {
        out.col(t).segment(j * bins, bins) = encode_angle(traj.values(t, j), coding, j);
      } catch (const RangeError& e) {
        throw RangeError("step " + std::to_string(t) + ", dim " + std::to_string(j) + ": " +
                         e.what());
      }
    }
  }
  return out;
}

Eigen::VectorXd encode_posture(const Eigen::VectorXd& posture, const SoftmaxCoding& coding) {
  if (posture.size() != coding.dims()) throw ShapeError("encode_posture: dimension mismatch");
  const int bins = coding.bins_per_dim;
  Eigen::VectorXd out(coding.output_size());
  for (int j = 0; j < coding.dims(); ++j) {
    const auto& r = coding.ranges[j];
    out.segment(j * bins, bins) = encode_angle(std::clamp(posture(j), r.lo, r.hi), coding, j);
  }
  return out;
}

Eigen::VectorXd decode_posture(const Eigen::VectorXd& probs, const SoftmaxCoding& coding) {
  if (probs.size() != coding.output_size()) throw ShapeError("decode_posture: size mismatch");
  const int bins = coding.bins_per_dim;
  Eigen::VectorXd out(coding.dims());
  for (int j = 0; j < coding.dims(); ++j) {
    out(j) = decode_probs(probs.segment(j * bins, bins), coding, j);
  }
  return out;
}

Eigen::MatrixXd decode_sequence(const Eigen::MatrixXd& probs, const SoftmaxCoding& coding) {
  Eigen::MatrixXd out(probs.cols(), coding.dims());
  for (int t = 0; t < probs.cols(); ++t) {
    out.row(t) = decode_posture(probs.col(t), coding).transpose();
  }
  return out;
}

std::string trajectory_to_json(const Trajectory& traj) { return json(traj).dump(1); }

Trajectory trajectory_from_json(const std::string& text) {
  Trajectory traj;
  try {
    traj = json::parse(text).get<Trajectory>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("trajectory json: ") + e.what());
  }
  traj.validate();
  return traj;
}

void write_trajectory(const Trajectory& traj, const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") {
    write_trajectory_csv(traj, path);
  } else {
    io::write_file(path, trajectory_to_json(traj));
  }
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ostringstream out;
  for (int d = 0; d < traj.dims(); ++d) {
    if (d) out << ',';
    out << (traj.joint_names.empty() ? "j" + std::to_string(d) : traj.joint_names[d]);
  }
  out << '\n';
  for (int t = 0; t < traj.steps(); ++t) {
    for (int d = 0; d < traj.dims(); ++d) {
      if (d) out << ',';
      out << io::format_double(traj.values(t, d));
    }
    out << '\n';
  }
  io::write_file(path, out.str());
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  return out;
}

Trajectory read_csv(const std::string& text, double rate_hz, JointRange limits) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("trajectory csv: missing header");
  Trajectory traj;
  traj.rate_hz = rate_hz;
  traj.joint_names = split(line, ',');
  const int dims = static_cast<int>(traj.joint_names.size());
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split(line, ',');
    if (static_cast<int>(fields.size()) != dims) {
      throw FormatError("trajectory csv: row " + std::to_string(rows.size()) +
                        " has wrong field count");
    }
    std::vector<double> row;
    for (const auto& f : fields) row.push_back(std::stod(f));
    rows.push_back(std::move(row));
  }
  traj.values.resize(static_cast<Eigen::Index>(rows.size()), dims);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (int d = 0; d < dims; ++d) traj.values(t, d) = rows[t][d];
  }
  traj.limits.assign(dims, limits);
  traj.validate();
  return traj;
}

}  // namespace

Trajectory read_trajectory(const std::string& path, double csv_rate_hz, JointRange csv_limits) {
  const std::string text = io::read_file(path);
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") {
    return read_csv(text, csv_rate_hz, csv_limits);
  }
  return trajectory_from_json(text);
}

}  // namespace pvhri
