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
#include <fstream>
#include <limits>

#include "fixtures.hpp"
#include "pvhri/checkpoint.hpp"
#include "pvhri/io.hpp"
#include "pvhri/json.hpp"

using namespace pvhri;
using namespace pvhri::testing;

namespace {

TrainerState fresh(const std::string& profile = "moderate") {
  const auto& data = small_primitives();
  auto config = small_config();
  config.seed = 5;
  return init_trainer(data, config, coding_for(data, 9, 25.0), CognitiveProfile::by_name(profile),
                      TrainOptions{});
}

std::string temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "pvhri_test_trainer";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

}  // namespace

TEST_CASE("profiles") {
  CHECK(CognitiveProfile::by_name("rigid").train_w == 0.01);
  CHECK(CognitiveProfile::by_name("moderate").train_w == 0.001);
  CHECK(CognitiveProfile::by_name("flexible").train_w == 0.0001);
  for (const auto& p : CognitiveProfile::reference()) CHECK(p.interact_w == 1e-5);
  CHECK_THROWS_AS(CognitiveProfile::by_name("stubborn"), ValidationError);
}

TEST_CASE("plain adaptive update is a += alpha g") {
  NetworkConfig c = small_config();
  auto a = AdaptiveSequence<double>::zeros(c, 3);
  a.mu[0](1, 2) = 0.5;
  auto g = AdaptiveSequence<double>::zeros(c, 3);
  g.mu[0](1, 2) = 2.0;
  g.sigma[1](0, 0) = -1.0;
  update_adaptive(a, g, 0.1);
  CHECK(a.mu[0](1, 2) == doctest::Approx(0.7));
  CHECK(a.sigma[1](0, 0) == doctest::Approx(-0.1));
  CHECK(a.mu[1].isZero());
  CHECK_THROWS_AS(update_adaptive(a, AdaptiveSequence<double>::zeros(c, 2), 0.1), ShapeError);
}

TEST_CASE("first Adam step moves each entry by lr in the gradient direction") {
  NetworkConfig c = small_config();
  auto x = AdaptiveSequence<double>::zeros(c, 2);
  auto g = AdaptiveSequence<double>::zeros(c, 2);
  g.mu[0](0, 0) = 3.0;
  g.mu[0](1, 1) = -0.02;
  auto st = AdamState<AdaptiveSequence<double>>::like(AdaptiveSequence<double>::zeros(c, 2));
  AdamSettings s;
  s.lr = 0.01;
  adam_ascend(x, g, st, s);
  CHECK(st.t == 1);
  CHECK(x.mu[0](0, 0) == doctest::Approx(0.01).epsilon(1e-6));
  CHECK(x.mu[0](1, 1) == doctest::Approx(-0.01).epsilon(1e-5));
  CHECK(x.sigma[0].isZero());
  // second step with the same gradient: m and v corrected identically, same move
  adam_ascend(x, g, st, s);
  CHECK(x.mu[0](0, 0) == doctest::Approx(0.02).epsilon(1e-6));
}

TEST_CASE("training raises the objective") {
  Trainer t(fresh());
  const auto first = t.step();
  t.run(199);
  const auto& last = t.state().log.back();
  CHECK(t.state().epoch == 200);
  CHECK(t.state().log.size() == 200);
  CHECK(last.reconstruction > first.reconstruction);
  CHECK(last.deficit < 0.5 * first.deficit);
  for (const auto& e : t.state().log) {
    CHECK(e.deficit >= 0);
    CHECK(e.regulation >= 0);
  }
}

TEST_CASE("interrupted training resumes bit-identically") {
  Trainer straight(fresh());
  straight.run(20);

  Trainer first(fresh());
  first.run(10);
  const auto text = checkpoint_to_string(first.state());
  Trainer second(checkpoint_from_string(text));
  second.run(10);
  CHECK(second.state() == straight.state());
  CHECK(second.state().log.back().reconstruction == straight.state().log.back().reconstruction);
}

TEST_CASE("checkpoint roundtrip") {
  Trainer t(fresh("flexible"));
  t.run(3);
  const auto path = temp_path("flexible.json");
  save_checkpoint(t.state(), path);
  const auto back = load_checkpoint(path);
  CHECK(back == t.state());
  CHECK(checkpoint_to_string(back) == checkpoint_to_string(t.state()));
  CHECK(checkpoint_path("ck", "rigid") == (std::filesystem::path("ck") / "rigid.json").string());
}

TEST_CASE("checkpoint format errors") {
  Trainer t(fresh());
  t.run(1);
  auto j = nlohmann::json::parse(checkpoint_to_string(t.state()));

  CHECK_THROWS_AS(checkpoint_from_string("{not json"), FormatError);
  CHECK_THROWS_AS(checkpoint_from_string("{\"format\": \"other\"}"), FormatError);

  auto wrong_version = j;
  wrong_version["version"] = kCheckpointVersion + 1;
  CHECK_THROWS_AS(checkpoint_from_string(wrong_version.dump()), FormatError);

  auto missing = j;
  missing.erase("params");
  CHECK_THROWS_AS(checkpoint_from_string(missing.dump()), FormatError);

  auto shape = j;
  shape["config"]["layers"][0]["d_units"] = 21;
  CHECK_THROWS_AS(checkpoint_from_string(shape.dump()), FormatError);

  auto short_adaptive = j;
  short_adaptive["adaptive"].erase(0);
  CHECK_THROWS_AS(checkpoint_from_string(short_adaptive.dump()), FormatError);

  CHECK_THROWS_AS(load_checkpoint(temp_path("absent.json")), Error);
}

TEST_CASE("non-finite objective raises DivergenceError") {
  auto s = fresh();
  s.params.layers[0].w_rec(0, 0) = std::numeric_limits<double>::quiet_NaN();
  Trainer t(std::move(s));
  CHECK_THROWS_AS(t.step(), DivergenceError);
}

TEST_CASE("init validation") {
  const auto& data = small_primitives();
  auto c = small_config();
  c.output_dims = 5;
  CHECK_THROWS_AS(init_trainer(data, c, coding_for(data, 9, 25.0), CognitiveProfile::rigid(), {}),
                  ValidationError);
  CHECK_THROWS_AS(init_trainer({}, small_config(), coding_for(data, 9, 25.0),
                               CognitiveProfile::rigid(), {}),
                  ValidationError);
  TrainOptions bad;
  bad.param_adam.beta1 = 1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CHECK_THROWS_AS(train(data, small_config(), coding_for(data, 9, 25.0),
                        CognitiveProfile::rigid(), {}, 0, 1),
                  ValidationError);
}

TEST_CASE("curves CSV") {
  Trainer t(fresh());
  t.run(4);
  const auto path = temp_path("curves.csv");
  write_curves_csv(t.state().log, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "epoch,reconstruction,regulation,deficit");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 4);
}

TEST_CASE("generation from a trained agent") {
  const auto& s = small_agent("moderate");
  std::mt19937_64 rng(3);
  const auto r = generate_sequence(s, 1, 40, GenerationMode::kMean, rng);
  CHECK(r.steps() == 40);
  const auto traj = decode_rollout(r, s);
  CHECK(traj.values.rows() == 40);
  CHECK(traj.values.cols() == 6);
  for (int j = 0; j < 6; ++j) {
    CHECK(traj.values.col(j).minCoeff() >= s.coding.ranges[j].lo);
    CHECK(traj.values.col(j).maxCoeff() <= s.coding.ranges[j].hi);
  }
  CHECK_THROWS_AS(generate_sequence(s, 3, 40, GenerationMode::kMean, rng), ValidationError);
  CHECK_THROWS_AS(generate_sequence(s, 0, 40, GenerationMode::kMean, rng, 61), ValidationError);
  CHECK_THROWS_AS(generate_sequence(s, 0, 10, GenerationMode::kMean, rng, 11), ValidationError);

  // mean mode ignores the rng
  std::mt19937_64 r1(1), r2(2);
  CHECK(generate_sequence(s, 2, 30, GenerationMode::kMean, r1).x ==
        generate_sequence(s, 2, 30, GenerationMode::kMean, r2).x);
}

TEST_CASE("trained primitives are reproduced and distinguishable") {
  const auto& s = small_agent("moderate");
  const auto mse = generation_mse(s, GenerationMode::kMean, 1, 1);
  REQUIRE(mse.cols() == 3);
  CHECK(mse.rows() == 60);
  CHECK(mse.allFinite());
  CHECK(mse.minCoeff() >= 0);
  std::mt19937_64 rng(1);
  std::vector<Eigen::MatrixXd> gen;
  for (int p = 0; p < 3; ++p) {
    gen.push_back(decode_rollout(generate_sequence(s, p, 60, GenerationMode::kMean, rng), s).values);
  }
  for (int p = 0; p < 3; ++p) {
    const double own = (gen[p] - s.dataset[p].values).squaredNorm();
    for (int q = 0; q < 3; ++q) {
      if (q != p) CHECK(own < (gen[p] - s.dataset[q].values).squaredNorm());
    }
  }
}
