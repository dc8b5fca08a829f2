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

#include <algorithm>

#include "pvhri/primitives.hpp"

using namespace pvhri;

TEST_CASE("primitive names") {
  CHECK(primitive_index("A") == 0);
  CHECK(primitive_index("C") == 2);
  CHECK_THROWS_AS(primitive_index("D"), ValidationError);
  CHECK_THROWS_AS(primitive_index("a"), ValidationError);
}

TEST_CASE("shapes and limits") {
  for (int dims : {2, 6, 12}) {
    const auto prims = make_primitives(dims, 90);
    REQUIRE(prims.size() == 3);
    for (const auto& p : prims) {
      p.validate();
      CHECK(p.steps() == 90);
      CHECK(p.dims() == dims);
      CHECK(p.rate_hz == 4.0);
      CHECK(p.joint_names.size() == static_cast<std::size_t>(dims));
      for (int j = 0; j < dims; ++j) {
        CHECK(p.values.col(j).minCoeff() >= p.limits[j].lo);
        CHECK(p.values.col(j).maxCoeff() <= p.limits[j].hi);
      }
    }
  }
  CHECK_THROWS_AS(make_primitives(1), ValidationError);
  CHECK_THROWS_AS(make_primitives(12, 1), ValidationError);
  CHECK_THROWS_AS(make_primitives(12, 90, 0.0), ValidationError);
  PrimitiveShape tall;
  tall.amplitude = 0.8;
  CHECK_THROWS_AS(make_primitives(12, 90, 4.0, tall), ValidationError);
}

TEST_CASE("primitives are far apart compared with their own step changes") {
  const auto prims = make_primitives(12, 90);
  double step_change = 0;
  for (const auto& p : prims) {
    for (int t = 1; t < p.steps(); ++t) {
      step_change = std::max(step_change, (p.values.row(t) - p.values.row(t - 1)).norm());
    }
  }
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      const double d = (prims[a].values - prims[b].values).rowwise().norm().mean();
      CAPTURE(a);
      CAPTURE(b);
      CHECK(d > 5 * step_change);
    }
  }
}

TEST_CASE("opening postures are permutations of each other") {
  const auto prims = make_primitives(12, 90);
  auto sorted = [](Eigen::VectorXd v) {
    std::sort(v.data(), v.data() + v.size());
    return v;
  };
  const Eigen::VectorXd first = sorted(prims[0].values.row(0).transpose());
  for (int p = 1; p < 3; ++p) {
    CHECK((sorted(prims[p].values.row(0).transpose()) - first).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK(neutral_posture(4).isZero());
}

TEST_CASE("primitives are periodic over the sequence") {
  const auto prims = make_primitives(6, 60);
  for (const auto& p : prims) {
    // one more step would close the loop: the jump back to the start is a normal step
    const double wrap = (p.values.row(0) - p.values.row(59)).norm();
    double largest = 0;
    for (int t = 1; t < 60; ++t) largest = std::max(largest, (p.values.row(t) - p.values.row(t - 1)).norm());
    CHECK(wrap <= largest + 1e-12);
  }
}
