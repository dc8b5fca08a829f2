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

#include <cstdlib>
#include <filesystem>

#include "fixtures.hpp"
#include "pvhri/config.hpp"
#include "pvhri/io.hpp"

using namespace pvhri;

namespace {

std::string temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "pvhri_test_config";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

const std::string kSource = PVHRI_SOURCE_DIR;

}  // namespace

TEST_CASE("defaults") {
  const Config c;
  c.validate();
  CHECK(c.network.layers.size() == 2);
  CHECK(c.network.output_dims == 12);
  CHECK(c.session.plant.joints == 12);
  CHECK(c.profiles.size() == 3);
  CHECK(c.profile("flexible").train_w == 0.0001);
  CHECK_THROWS_AS(c.profile("other"), ValidationError);
  CHECK(c.session.network_hz == 4.0);
  CHECK(c.session.control_hz == 50.0);
  CHECK(c.live.port == 8765);
}

TEST_CASE("JSON roundtrip of the defaults") {
  const Json j = config_to_json(Config{});
  CHECK(config_to_json(config_from_json(j)) == j);
  CHECK(config_to_json(config_from_json(Json::object())) == j);
}

TEST_CASE("shipped default config equals the built-in defaults") {
  const auto loaded = load_config(kSource + "/configs/default.json");
  CHECK(config_to_json(loaded) == config_to_json(Config{}));
  const auto quick = load_config(kSource + "/configs/quick.json");
  CHECK(quick.seed == 3);
  CHECK(quick.train.epochs == 300);
  CHECK(quick.repeats == 1);
  CHECK(quick.trial_steps == 60);
}

TEST_CASE("partial configs override only what they name") {
  const auto c = config_from_json(Json::parse(R"({"data": {"dims": 6}, "session": {"surrogate": {"gain": 0.5, "bound": 2}}})"));
  CHECK(c.data.dims == 6);
  CHECK(c.network.output_dims == 6);
  CHECK(c.session.plant.joints == 6);
  CHECK(c.session.surrogate.gain == 0.5);
  CHECK(c.session.gains == ControllerGains{});
  CHECK(c.trial_steps == 300);
}

TEST_CASE("invalid configs are rejected") {
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"sede": 1})")), ValidationError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"train": {"epoch": 3}})")), ValidationError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"live": {"prot": 1}})")), ValidationError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"seed": "one"})")), ValidationError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"repeats": 0})")), ValidationError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"trial_steps": 5})")), ValidationError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"network": {"output_dims": 5}})")),
                  ValidationError);
  CHECK_THROWS_AS(config_from_json(Json::parse(R"({"session": {"control_hz": 100}})")),
                  ValidationError);
  CHECK_THROWS_AS(config_from_json(Json::parse("[1, 2]")), ValidationError);
}

TEST_CASE("config path resolution") {
  const auto path = temp_path("env.json");
  io::write_file(path, R"({"seed": 42})");
  ::unsetenv(kConfigEnv);
  CHECK(resolve_config_path("") == "");
  CHECK(load_config_or_defaults("").seed == 1);
  ::setenv(kConfigEnv, path.c_str(), 1);
  CHECK(resolve_config_path("") == path);
  CHECK(load_config_or_defaults("").seed == 42);
  CHECK(resolve_config_path("other.json") == "other.json");
  ::unsetenv(kConfigEnv);
  CHECK_THROWS_AS(load_config(temp_path("missing.json")), Error);
  io::write_file(temp_path("broken.json"), "{");
  CHECK_THROWS_AS(load_config(temp_path("broken.json")), Error);
}

TEST_CASE("observer files") {
  const auto& net = testing::small_observer();
  const auto path = temp_path("observer.json");
  save_observer(net, path);
  CHECK(load_observer(path) == net);
  io::write_file(path, R"({"format": "pvhri-observer"})");
  CHECK_THROWS_AS(load_observer(path), FormatError);
}

TEST_CASE("regression options JSON") {
  RegressionOptions o;
  o.length = 12;
  o.optimizer = Optimizer::kAdam;
  const Json j = o;
  CHECK(j.at("optimizer") == "adam");
  CHECK(j.get<RegressionOptions>() == o);
}
