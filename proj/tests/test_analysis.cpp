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
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "pvhri/tables.hpp"

using namespace pvhri;
using namespace pvhri::testing;

namespace {

Eigen::MatrixXd gaussian_cloud(int n, const Eigen::VectorXd& scales, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(n, scales.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < scales.size(); ++j) m(i, j) = scales(j) * normal(rng);
  }
  return m;
}

TrialRecord fake_record(const std::string& profile, const std::string& robot,
                        const std::string& human, int trial, const std::vector<int>& intent,
                        const std::vector<int>& behavior, const std::vector<double>& torque) {
  TrialRecord r;
  r.spec.profile = profile;
  r.spec.robot_intent = robot;
  r.spec.human_intent = human;
  r.spec.trial = trial;
  for (std::size_t i = 0; i < intent.size(); ++i) {
    NetworkTickRecord n;
    n.t = static_cast<long long>(i);
    n.intent_label = intent[i];
    n.behavior_label = behavior[i];
    r.network.push_back(n);
  }
  for (std::size_t i = 0; i < torque.size(); ++i) {
    FastTickRecord f;
    f.tick = static_cast<long long>(i);
    f.tau_ext_sum = torque[i];
    r.fast.push_back(f);
  }
  return r;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("PCA of points on a line") {
  Eigen::MatrixXd m(50, 4);
  const Eigen::RowVector4d dir(1, 2, -1, 0.5);
  for (int i = 0; i < 50; ++i) m.row(i) = 0.1 * i * dir + Eigen::RowVector4d(1, 1, 1, 1);
  const auto p = pca2(m);
  CHECK_FALSE(p.degenerate);
  CHECK(p.explained(0) == doctest::Approx(1.0));
  CHECK(p.explained(1) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(std::abs(p.axes.col(0).dot(dir.transpose().normalized())) == doctest::Approx(1.0));
  CHECK(pca_reconstruction_error(p, m, 1) < 1e-20);
}

TEST_CASE("PCA properties on random clouds") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto iso = pca2(gaussian_cloud(4000, Eigen::Vector2d(1, 1), seed));
    CHECK(iso.explained(0) == doctest::Approx(0.5).epsilon(0.1));
    CHECK(iso.explained.sum() == doctest::Approx(1.0));

    Eigen::VectorXd scales(5);
    scales << 3, 2, 1, 0.5, 0.2;
    const auto m = gaussian_cloud(500, scales, seed);
    const auto p = pca2(m);
    CHECK(p.explained(0) >= p.explained(1));
    CHECK(p.explained.sum() <= 1.0 + 1e-12);
    CHECK((p.axes.transpose() * p.axes - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(pca_reconstruction_error(p, m, 2) <= pca_reconstruction_error(p, m, 1));
    CHECK(p.projected.isApprox(pca_project(p, m)));
    // projected variance matches the explained fraction
    const double total = (m.rowwise() - m.colwise().mean()).squaredNorm();
    CHECK(p.projected.col(0).squaredNorm() / total == doctest::Approx(p.explained(0)));
  }
}

TEST_CASE("PCA edge cases") {
  const auto flat = pca2(Eigen::MatrixXd::Constant(10, 3, 0.4));
  CHECK(flat.degenerate);
  CHECK(flat.explained.isZero());
  CHECK(flat.projected.isZero());
  CHECK_THROWS_AS(pca2(Eigen::MatrixXd::Zero(2, 3)), ValidationError);
  CHECK_THROWS_AS(pca2(Eigen::MatrixXd::Zero(10, 1)), ValidationError);
  CHECK_THROWS_AS(pca_project(flat, Eigen::MatrixXd::Zero(2, 4)), ShapeError);
  CHECK_THROWS_AS(pca_reconstruction_error(flat, Eigen::MatrixXd::Zero(2, 3), 3), ValidationError);
}

TEST_CASE("trajectory MSE") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 2), b(3, 2);
  b << 1, 1, 0, 2, 0, 0;
  const auto e = trajectory_mse(a, b);
  CHECK(e(0) == doctest::Approx(1.0));
  CHECK(e(1) == doctest::Approx(2.0));
  CHECK(e(2) == 0);
  CHECK_THROWS_AS(trajectory_mse(a, Eigen::MatrixXd::Zero(2, 2)), ShapeError);
}

TEST_CASE("observer split and accuracy") {
  const auto& prims = small_primitives();
  const auto split = split_postures(prims, 5);
  CHECK(split.test.rows() == 3 * 12);
  CHECK(split.train.rows() == 3 * 48);
  CHECK(split.train_labels.size() == 144);
  CHECK_THROWS_AS(split_postures(prims, 1), ValidationError);
  CHECK_THROWS_AS(split_postures({}, 5), ValidationError);

  const auto& net = small_observer();
  CHECK(net.input_dims() == 6);
  CHECK(net.classes() == 3);
  CHECK(observer_accuracy(net, split.train, split.train_labels) == 1.0);
  CHECK(observer_accuracy(net, split.test, split.test_labels) == 1.0);
  const auto c = classify_posture(net, prims[2].values.row(10).transpose());
  CHECK(c.label == 2);
  CHECK(c.scores.size() == 3);
  CHECK(c.scores.minCoeff() >= 0);
  CHECK(c.scores.maxCoeff() <= 1);
}

TEST_CASE("generation latents stack every primitive") {
  const auto& s = small_agent("rigid");
  const auto top = generation_latents(s, 1);
  CHECK(top.rows() == 3 * 61);
  CHECK(top.cols() == 6);
  CHECK(top.cwiseAbs().maxCoeff() <= 1.0);
  CHECK(generation_latents(s, 0).cols() == 20);
  CHECK_THROWS_AS(generation_latents(s, 2), ValidationError);

  std::vector<LatentSnapshot> snaps(4);
  for (int i = 0; i < 4; ++i) {
    snaps[i].d = {Eigen::VectorXd::Constant(2, i), Eigen::VectorXd::Constant(3, -i)};
  }
  const auto series = latent_series(snaps, 1);
  CHECK(series.rows() == 4);
  CHECK(series(3, 2) == -3);
  CHECK(latent_series({}, 0).size() == 0);
  CHECK_THROWS_AS(latent_series(snaps, 2), ValidationError);
}

TEST_CASE("intent and behavior frequencies") {
  // human intent A (label 0)
  const auto r1 = fake_record("rigid", "B", "A", 1, {0, 0, 1, 1}, {0, 1, 1, 1}, {});
  const auto r2 = fake_record("rigid", "B", "A", 2, {1, 1, 1, 1}, {0, 0, 0, 0}, {});
  const auto r3 = fake_record("flexible", "C", "B", 1, {1, 1}, {2, 1}, {});
  const auto rows = intent_behavior_probs({r1, r2, r3});
  auto find = [&](const std::string& p, int trial) {
    for (const auto& r : rows) {
      if (r.profile == p && r.trial == trial) return r;
    }
    FAIL("missing row");
    return IntentBehavior{};
  };
  CHECK(find("rigid", 1).p_intent == doctest::Approx(0.5));
  CHECK(find("rigid", 1).p_behavior == doctest::Approx(0.25));
  CHECK(find("rigid", 2).p_intent == 0);
  CHECK(find("rigid", 0).p_intent == doctest::Approx(0.25));
  CHECK(find("rigid", 0).p_behavior == doctest::Approx(5.0 / 8));
  CHECK(find("rigid", 0).ticks == 8);
  CHECK(find("flexible", 0).p_intent == 1.0);
  CHECK(find("flexible", 0).p_behavior == 0.5);
  for (const auto& r : rows) {
    CHECK(r.p_intent >= 0);
    CHECK(r.p_intent <= 1);
    CHECK(r.p_behavior >= 0);
    CHECK(r.p_behavior <= 1);
  }
  CHECK_THROWS_AS(intent_behavior_probs({}), ValidationError);

  const auto csv = lines(intent_behavior_csv(rows));
  REQUIRE(csv.size() == 4);
  CHECK(csv[0] ==
        "data,rigid_p_intent,rigid_p_behavior,moderate_p_intent,moderate_p_behavior,"
        "flexible_p_intent,flexible_p_behavior");
  CHECK(csv[1].rfind("all,0.25,0.625,,,1,0.5", 0) == 0);
  CHECK(csv[3].rfind("trial 2,0,1,,,", 0) == 0);
}

TEST_CASE("torque statistics") {
  const auto zero = torque_stats({fake_record("moderate", "A", "B", 1, {}, {}, {0, 0, 0})});
  REQUIRE(zero.size() == 1);
  CHECK(zero[0].mean == 0);
  CHECK(zero[0].std == 0);
  CHECK(zero[0].pair == "AB");

  const auto flat = torque_stats({fake_record("moderate", "A", "B", 1, {}, {}, {1.5, 1.5})});
  CHECK(flat[0].mean == doctest::Approx(1.5));
  CHECK(flat[0].std == doctest::Approx(0.0));

  const auto stats = torque_stats({fake_record("rigid", "B", "A", 1, {}, {}, {1, 3}),
                                   fake_record("rigid", "B", "A", 2, {}, {}, {2, 2, 2, 6}),
                                   fake_record("flexible", "A", "C", 1, {}, {}, {4})});
  REQUIRE(stats.size() == 3);
  for (const auto& s : stats) {
    if (s.profile == "rigid" && s.trial == 1) {
      CHECK(s.mean == doctest::Approx(2.0));
      CHECK(s.std == doctest::Approx(1.0));
    }
    if (s.profile == "rigid" && s.trial == 2) {
      CHECK(s.mean == doctest::Approx(3.0));
      CHECK(s.std == doctest::Approx(std::sqrt(3.0)));
      CHECK(s.ticks == 4);
    }
  }
  const auto csv = lines(torque_table_csv(stats));
  REQUIRE(csv.size() == 5);
  CHECK(csv[0] ==
        "section,case,rigid_T1,rigid_T2,moderate_T1,moderate_T2,flexible_T1,flexible_T2");
  CHECK(csv[1] == "mean,AC,,,,,4,");
  CHECK(csv[2] == "mean,BA,2,3,,,,");
  CHECK(csv[3].rfind("std,AC,", 0) == 0);
  CHECK(csv[4].rfind("std,BA,1,1.73", 0) == 0);
}
