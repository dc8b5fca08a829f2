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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "pvhri/encoding.hpp"
#include "pvhri/io.hpp"

using namespace pvhri;

namespace {

SoftmaxCoding unit_coding(int bins = 11, double sharpness = 25.0, int dims = 1) {
  return SoftmaxCoding(bins, sharpness, std::vector<JointRange>(dims, JointRange{-1.0, 1.0}));
}

// Oracle: roundtrip error by direct summation, written without the library's
// vector helpers.
double roundtrip_error_direct(double angle, int bins, double sharpness, double lo, double hi) {
  double num = 0, den = 0;
  for (int k = 0; k < bins; ++k) {
    const double c = lo + (hi - lo) * k / (bins - 1);
    const double w = std::exp(-sharpness * (angle - c) * (angle - c));
    num += w * c;
    den += w;
  }
  return std::abs(num / den - angle);
}

}  // namespace

TEST_CASE("encode_angle concentrates on the nearest center") {
  const auto coding = unit_coding(11, 400.0);
  const auto p = encode_angle(0.4, coding);
  CHECK(p.size() == 11);
  CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
  Eigen::Index k;
  p.maxCoeff(&k);
  CHECK(k == 7);
  CHECK(p(7) > 0.99);
}

TEST_CASE("midpoint between centers splits mass evenly") {
  const auto coding = unit_coding();
  const auto p = encode_angle(0.5, coding);  // centers 0.4 and 0.6
  CHECK(p(7) == doctest::Approx(p(8)).epsilon(1e-12));
}

TEST_CASE("encode_angle rejects angles outside the range") {
  const auto coding = unit_coding();
  CHECK_THROWS_AS(encode_angle(1.2, coding), RangeError);
  CHECK_THROWS_AS(encode_angle(-1.0001, coding), RangeError);
}

TEST_CASE("roundtrip of 0.37 rad is well inside a tenth of a bin") {
  const auto coding = unit_coding();
  const double oracle = roundtrip_error_direct(0.37, 11, 25.0, -1.0, 1.0);
  const double err = std::abs(decode_probs(encode_angle(0.37, coding), coding) - 0.37);
  CHECK(err == doctest::Approx(oracle).epsilon(1e-9));
  CHECK(err < coding.bin_width(0) / 10);
}

TEST_CASE("decode_probs arithmetic") {
  SoftmaxCoding two(2, 25.0, {{-1.0, 1.0}});
  Eigen::Vector2d p(0.25, 0.75);
  CHECK(decode_probs(p, two) == doctest::Approx(0.5));

  const auto coding = unit_coding();
  Eigen::VectorXd one_hot = Eigen::VectorXd::Zero(11);
  one_hot(3) = 1.0;
  CHECK(decode_probs(one_hot, coding) == doctest::Approx(-0.4));
  CHECK(decode_probs(Eigen::VectorXd::Constant(11, 1.0 / 11), coding) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("decode_probs validates its input") {
  const auto coding = unit_coding();
  CHECK_THROWS_AS(decode_probs(Eigen::VectorXd::Constant(10, 0.1), coding), ValidationError);
  CHECK_THROWS_AS(decode_probs(Eigen::VectorXd::Constant(11, 0.1), coding), ValidationError);
  Eigen::VectorXd neg = Eigen::VectorXd::Zero(11);
  neg(0) = -0.5;
  neg(1) = 1.5;
  CHECK_THROWS_AS(decode_probs(neg, coding), ValidationError);
}

TEST_CASE("roundtrip and monotonicity hold across the range") {
  const auto coding = unit_coding();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double a = dist(rng), b = dist(rng);
    const double da = decode_probs(encode_angle(a, coding), coding);
    const double db = decode_probs(encode_angle(b, coding), coding);
    CHECK(std::abs(da - a) < coding.bin_width(0));
    if (a < b) CHECK(da <= db);
  }
}

TEST_CASE("encode_trajectory matches encode_angle elementwise") {
  const auto coding = unit_coding(11, 25.0, 2);
  Trajectory traj;
  traj.limits = coding.ranges;
  traj.values.resize(1, 2);
  traj.values << 0.1, -0.3;
  const auto enc = encode_trajectory(traj, coding);
  CHECK(enc.rows() == 22);
  CHECK(enc.cols() == 1);
  CHECK(enc.col(0).head(11) == encode_angle(0.1, coding, 0));
  CHECK(enc.col(0).tail(11) == encode_angle(-0.3, coding, 1));

  traj.values = Eigen::MatrixXd::Constant(5, 2, 0.2);
  const auto constant = encode_trajectory(traj, coding);
  for (int t = 1; t < 5; ++t) CHECK(constant.col(t) == constant.col(0));
  for (int t = 0; t < 5; ++t) {
    CHECK(constant.col(t).head(11).sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(constant.col(t).tail(11).sum() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("sinusoid roundtrip mean error stays under a tenth of a bin") {
  const auto coding = unit_coding();
  Trajectory traj;
  traj.limits = coding.ranges;
  traj.values.resize(90, 1);
  double oracle_mean = 0;
  for (int t = 0; t < 90; ++t) {
    traj.values(t, 0) = 0.8 * std::sin(2 * M_PI * t / 45.0);
    oracle_mean += roundtrip_error_direct(traj.values(t, 0), 11, 25.0, -1, 1) / 90;
  }
  const auto decoded = decode_sequence(encode_trajectory(traj, coding), coding);
  const double mean_err = (decoded - traj.values).cwiseAbs().mean();
  CHECK(mean_err == doctest::Approx(oracle_mean).epsilon(1e-9));
  CHECK(mean_err < coding.bin_width(0) / 10);
}

TEST_CASE("encode_trajectory reports the offending step and dim") {
  const auto coding = unit_coding(11, 25.0, 2);
  Trajectory traj;
  traj.limits = {{-2, 2}, {-2, 2}};
  traj.values = Eigen::MatrixXd::Zero(3, 2);
  traj.values(2, 1) = 1.5;
  try {
    encode_trajectory(traj, coding);
    FAIL("expected RangeError");
  } catch (const RangeError& e) {
    CHECK(std::string(e.what()).find("step 2, dim 1") != std::string::npos);
  }
}

TEST_CASE("trajectory JSON roundtrip is bit-exact") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-0.9, 0.9);
  Trajectory traj;
  traj.rate_hz = 4.0;
  traj.joint_names = {"a", "b", "c"};
  traj.limits = {{-1, 1}, {-1.5, 1.5}, {-1, 1}};
  traj.values.resize(17, 3);
  for (int t = 0; t < 17; ++t)
    for (int j = 0; j < 3; ++j) traj.values(t, j) = dist(rng);
  const auto back = trajectory_from_json(trajectory_to_json(traj));
  CHECK(back == traj);
}

TEST_CASE("trajectory CSV read") {
  const std::string path = (std::filesystem::temp_directory_path() / "test_encoding_traj.csv").string();
  io::write_file(path, "x,y\n0.1,0.2\n-0.3,0.4\n");
  const auto traj = read_trajectory(path, 4.0, {-1, 1});
  CHECK(traj.steps() == 2);
  CHECK(traj.dims() == 2);
  CHECK(traj.values(1, 0) == -0.3);
  io::write_file(path, "x,y\n0.1\n");
  CHECK_THROWS_AS(read_trajectory(path), FormatError);
  std::filesystem::remove(path);
}

TEST_CASE("trajectory validation") {
  Trajectory traj;
  traj.limits = {{-1, 1}};
  traj.values = Eigen::MatrixXd::Constant(2, 1, 1.5);
  CHECK_THROWS_AS(traj.validate(), RangeError);
  traj.values.resize(0, 1);
  CHECK_THROWS_AS(traj.validate(), ValidationError);
}
