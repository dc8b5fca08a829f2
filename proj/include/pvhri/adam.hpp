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
#include <type_traits>

namespace pvhri {

struct AdamSettings {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  bool operator==(const AdamSettings&) const = default;
};

/// First and second moment estimates for any structure T exposing a static
/// `visit(f, self, others...)` over its tensors.
template <typename T>
struct AdamState {
  T m;
  T v;
  long long t = 0;

  static AdamState like(const T& zeros) { return {zeros, zeros, 0}; }

  bool operator==(const AdamState&) const = default;
};

/// One adaptive-moment ascent step x += lr * m_hat / (sqrt(v_hat) + eps).
template <typename T>
void adam_ascend(T& x, const T& grad, AdamState<T>& state, const AdamSettings& s) {
  ++state.t;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(state.t));
  T::visit(
      [&](auto& xv, const auto& gv, auto& mv, auto& vv) {
        using S = typename std::decay_t<decltype(xv)>::Scalar;
        mv = S(s.beta1) * mv + S(1 - s.beta1) * gv;
        vv = S(s.beta2) * vv + S(1 - s.beta2) * gv.cwiseAbs2();
        xv.array() += S(s.lr) * (mv.array() / S(c1)) /
                      ((vv.array() / S(c2)).sqrt() + S(s.eps));
      },
      x, grad, state.m, state.v);
}

/// Plain gradient ascent x += lr * grad.
template <typename T>
void gradient_ascend(T& x, const T& grad, double lr) {
  T::visit(
      [lr](auto& xv, const auto& gv) {
        using S = typename std::decay_t<decltype(xv)>::Scalar;
        xv += S(lr) * gv;
      },
      x, grad);
}

}  // namespace pvhri
