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

#include "pvhri/regression.hpp"

namespace pvhri {

void RegressionOptions::validate() const {
  if (length < 1) throw ValidationError("regression window length must be >= 1");
  if (inner_epochs < 1) throw ValidationError("inner_epochs must be >= 1");
  if (!(w_interact >= 0)) throw ValidationError("w_interact must be >= 0");
  if (!(alpha >= 0)) throw ValidationError("regression alpha must be >= 0");
}

RegressionWindow make_window(const NetworkConfig& config, const RegressionOptions& options,
                             std::uint64_t seed) {
  options.validate();
  RegressionWindow w;
  w.options = options;
  w.anchor = NetworkState<double>::zeros(config);
  w.a = AdaptiveSequence<double>::zeros(config, 0);
  w.rng.seed(seed);
  return w;
}

namespace {

// Adaptive column for absolute step `step`: the intention seed inside its opening
// window, zeros otherwise.
void fill_column(const RegressionWindow& w, long long step, int col, AdaptiveSequence<double>& a) {
  const bool seeded = w.seed && step >= w.seed_from && step < w.seed_from + w.options.length;
  for (std::size_t k = 0; k < a.mu.size(); ++k) {
    if (seeded) {
      const int n = w.seed->steps();
      const int src = static_cast<int>(((w.seed_phase + step - w.seed_from) % n + n) % n);
      a.mu[k].col(col) = w.seed->mu[k].col(src);
      a.sigma[k].col(col) = w.seed->sigma[k].col(src);
    } else {
      a.mu[k].col(col).setZero();
      a.sigma[k].col(col).setZero();
    }
  }
}

Eigen::MatrixXd stack(const std::vector<Eigen::VectorXd>& cols) {
  Eigen::MatrixXd m(cols.front().size(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = cols[i];
  return m;
}

}  // namespace

void set_intention(RegressionWindow& window, const AdaptiveSequence<double>& trained,
                   long long phase) {
  bool match = trained.mu.size() == window.a.mu.size() && trained.steps() >= 1;
  for (std::size_t k = 0; match && k < trained.mu.size(); ++k) {
    match = trained.mu[k].rows() == window.a.mu[k].rows() &&
            trained.sigma[k].rows() == window.a.sigma[k].rows() &&
            trained.sigma[k].cols() == trained.mu[k].cols();
  }
  if (!match) throw ShapeError("set_intention: adaptive values do not match the network");
  window.seed = trained;
  window.seed_from = window.first;
  // Phase of the oldest buffered step so that step t (the next one) gets column `phase`.
  window.seed_phase = phase - (window.t - window.first);
  for (int c = 0; c < window.size(); ++c) fill_column(window, window.first + c, c, window.a);
}

void slide_window(RegressionWindow& window, const NetworkParams<double>& params,
                  const NetworkConfig& config) {
  if (!window.full()) return;
  const auto first = head(window.a, 1);
  const auto r = rollout(params, config, window.anchor, 1, first, zero_noise<double>(config, 1));
  window.anchor = r.state_at(1);
  window.evidence.erase(window.evidence.begin());
  for (std::size_t k = 0; k < window.a.mu.size(); ++k) {
    const Eigen::Index n = window.a.mu[k].cols() - 1;
    window.a.mu[k] = window.a.mu[k].rightCols(n).eval();
    window.a.sigma[k] = window.a.sigma[k].rightCols(n).eval();
  }
  ++window.first;
}

RegressionResult regression_step(RegressionWindow& window, const Eigen::VectorXd& evidence,
                                 const NetworkParams<double>& params, const NetworkConfig& config,
                                 const SoftmaxCoding& coding) {
  if (evidence.size() != config.output_size()) {
    throw ShapeError("regression_step: evidence has " + std::to_string(evidence.size()) +
                     " entries, expected " + std::to_string(config.output_size()));
  }
  const auto& opt = window.options;
  slide_window(window, params, config);
  window.evidence.push_back(evidence);
  for (std::size_t k = 0; k < window.a.mu.size(); ++k) {
    window.a.mu[k].conservativeResize(Eigen::NoChange, window.a.mu[k].cols() + 1);
    window.a.sigma[k].conservativeResize(Eigen::NoChange, window.a.sigma[k].cols() + 1);
  }
  const int len = window.size();
  fill_column(window, window.t, len - 1, window.a);
  ++window.t;

  const Eigen::MatrixXd targets = stack(window.evidence);
  const AdaptiveSequence<double> before = window.a;
  auto moments = AdamState<AdaptiveSequence<double>>::like(
      AdaptiveSequence<double>::zeros(config, len));
  AdamSettings adam;
  adam.lr = opt.alpha;
  for (int e = 0; e < opt.inner_epochs; ++e) {
    const auto noise = draw_noise<double>(config, len, window.rng);
    const auto r = rollout(params, config, window.anchor, len, window.a, noise);
    const auto g = bptt_grads(r, targets, opt.w_interact, params, config, false);
    if (opt.optimizer == Optimizer::kAdam) {
      adam_ascend(window.a, g.adaptive, moments, adam);
    } else {
      update_adaptive(window.a, g.adaptive, opt.alpha);
    }
  }

  RegressionResult out;
  double sq = 0;
  AdaptiveSequence<double>::visit(
      [&sq](const auto& now, const auto& old) { sq += (now - old).squaredNorm(); }, window.a,
      before);
  out.a_update_norm = std::sqrt(sq);

  const auto r = rollout(params, config, window.anchor, len + 1, window.a,
                         zero_noise<double>(config, len + 1));
  out.prediction_probs = r.x.col(len);
  out.prediction = decode_posture(out.prediction_probs, coding);
  out.latent.t = window.t - 1;
  for (const auto& tr : r.layers) {
    out.latent.d.push_back(tr.d.col(len));
    out.latent.mu_p.push_back(tr.mu_p.col(len - 1));
    out.latent.sigma_p.push_back(tr.sigma_p.col(len - 1));
    out.latent.mu_q.push_back(tr.mu_q.col(len - 1));
    out.latent.sigma_q.push_back(tr.sigma_q.col(len - 1));
  }
  return out;
}

}  // namespace pvhri
