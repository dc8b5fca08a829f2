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
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pvhri/error.hpp"

namespace pvhri {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// log(sigma) is clamped to this interval before exponentiation; gradients are zero
// outside it. exp(-10) keeps every sigma above the 1e-6 floor.
inline constexpr double kLogSigmaMin = -10.0;
inline constexpr double kLogSigmaMax = 4.0;

struct LayerConfig {
  int d_units = 0;
  int z_units = 0;
  double timescale = 1.0;

  bool operator==(const LayerConfig&) const = default;
};

/// Layer sizes are ordered from the lowest (output-facing) layer upward.
struct NetworkConfig {
  std::vector<LayerConfig> layers;
  int output_dims = 12;
  int bins_per_dim = 11;
  double meta_w = 0.001;
  std::uint64_t seed = 1;

  int num_layers() const { return static_cast<int>(layers.size()); }
  int output_size() const { return output_dims * bins_per_dim; }

  void validate() const {
    if (layers.empty()) throw ValidationError("NetworkConfig: no layers");
    for (std::size_t k = 0; k < layers.size(); ++k) {
      const auto& l = layers[k];
      if (l.d_units < 1 || l.z_units < 1) throw ValidationError("NetworkConfig: empty layer");
      if (!(l.timescale >= 1.0)) throw ValidationError("NetworkConfig: timescale must be >= 1");
      if (k > 0 && l.timescale < layers[k - 1].timescale) {
        throw ValidationError("NetworkConfig: timescales must be non-decreasing upward");
      }
    }
    if (output_dims < 1 || bins_per_dim < 2) throw ValidationError("NetworkConfig: bad output");
    if (!(meta_w >= 0)) throw ValidationError("NetworkConfig: meta_w must be >= 0");
  }

  /// Low {40 d, 4 z, timescale 2}, High {10 d, 1 z, timescale 10}.
  static NetworkConfig reference() {
    NetworkConfig c;
    c.layers = {{40, 4, 2.0}, {10, 1, 10.0}};
    return c;
  }

  bool operator==(const NetworkConfig&) const = default;
};

template <typename Scalar>
struct LayerParams {
  MatrixX<Scalar> w_rec;    // d^k_{t-1} -> u^k
  MatrixX<Scalar> w_below;  // d^{k-1}_{t-1} -> u^k (0 columns for the lowest layer)
  MatrixX<Scalar> w_above;  // d^{k+1}_{t-1} -> u^k (0 columns for the top layer)
  MatrixX<Scalar> w_zd;     // z^k_t -> u^k
  MatrixX<Scalar> w_mu;     // d^k_{t-1} -> mu (shared by prior and posterior)
  MatrixX<Scalar> w_sigma;  // d^k_{t-1} -> log sigma (shared)
  VectorX<Scalar> b_mu_prior, b_sigma_prior, b_mu_post, b_sigma_post;

  template <typename F, typename Self, typename... Others>
  static void visit(F&& f, Self& self, Others&... others) {
    f(self.w_rec, others.w_rec...);
    f(self.w_below, others.w_below...);
    f(self.w_above, others.w_above...);
    f(self.w_zd, others.w_zd...);
    f(self.w_mu, others.w_mu...);
    f(self.w_sigma, others.w_sigma...);
    f(self.b_mu_prior, others.b_mu_prior...);
    f(self.b_sigma_prior, others.b_sigma_prior...);
    f(self.b_mu_post, others.b_mu_post...);
    f(self.b_sigma_post, others.b_sigma_post...);
  }
};

template <typename Scalar>
struct NetworkParams {
  std::vector<LayerParams<Scalar>> layers;
  MatrixX<Scalar> w_out;  // (dims * bins) x d^0; row block i is W_dx_i
  VectorX<Scalar> b_out;

  /// Applies f to corresponding tensors of self and others (all with identical shapes).
  template <typename F, typename Self, typename... Others>
  static void visit(F&& f, Self& self, Others&... others) {
    for (std::size_t k = 0; k < self.layers.size(); ++k) {
      LayerParams<Scalar>::visit(f, self.layers[k], others.layers[k]...);
    }
    f(self.w_out, others.w_out...);
    f(self.b_out, others.b_out...);
  }

  static NetworkParams zeros(const NetworkConfig& config) {
    config.validate();
    NetworkParams p;
    const int n = config.num_layers();
    for (int k = 0; k < n; ++k) {
      const auto& l = config.layers[k];
      LayerParams<Scalar> lp;
      lp.w_rec = MatrixX<Scalar>::Zero(l.d_units, l.d_units);
      lp.w_below = MatrixX<Scalar>::Zero(l.d_units, k > 0 ? config.layers[k - 1].d_units : 0);
      lp.w_above = MatrixX<Scalar>::Zero(l.d_units, k + 1 < n ? config.layers[k + 1].d_units : 0);
      lp.w_zd = MatrixX<Scalar>::Zero(l.d_units, l.z_units);
      lp.w_mu = MatrixX<Scalar>::Zero(l.z_units, l.d_units);
      lp.w_sigma = MatrixX<Scalar>::Zero(l.z_units, l.d_units);
      lp.b_mu_prior = lp.b_sigma_prior = lp.b_mu_post = lp.b_sigma_post =
          VectorX<Scalar>::Zero(l.z_units);
      p.layers.push_back(std::move(lp));
    }
    p.w_out = MatrixX<Scalar>::Zero(config.output_size(), config.layers[0].d_units);
    p.b_out = VectorX<Scalar>::Zero(config.output_size());
    return p;
  }

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
  template <typename Rng>
  static NetworkParams random(const NetworkConfig& config, Rng& rng) {
    NetworkParams p = zeros(config);
    auto fill = [&rng](MatrixX<Scalar>& m) {
      if (m.cols() == 0) return;
      const double bound = 1.0 / std::sqrt(static_cast<double>(m.cols()));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = static_cast<Scalar>(dist(rng));
      }
    };
    for (auto& l : p.layers) {
      fill(l.w_rec);
      fill(l.w_below);
      fill(l.w_above);
      fill(l.w_zd);
      fill(l.w_mu);
      fill(l.w_sigma);
    }
    fill(p.w_out);
    return p;
  }

  bool all_finite() const {
    bool ok = true;
    visit([&ok](const auto& t) { ok = ok && t.allFinite(); }, *this);
    return ok;
  }

  bool operator==(const NetworkParams& other) const {
    bool same = layers.size() == other.layers.size();
    if (!same) return false;
    visit(
        [&same](const auto& a, const auto& b) {
          same = same && a.rows() == b.rows() && a.cols() == b.cols() && a == b;
        },
        *this, other);
    return same;
  }
};

/// Per-layer adaptive values; column t holds a_mu / a_sigma for step t.
template <typename Scalar>
struct AdaptiveSequence {
  std::vector<MatrixX<Scalar>> mu;
  std::vector<MatrixX<Scalar>> sigma;

  int steps() const { return mu.empty() ? 0 : static_cast<int>(mu[0].cols()); }

  template <typename F, typename Self, typename... Others>
  static void visit(F&& f, Self& self, Others&... others) {
    for (std::size_t k = 0; k < self.mu.size(); ++k) {
      f(self.mu[k], others.mu[k]...);
      f(self.sigma[k], others.sigma[k]...);
    }
  }

  static AdaptiveSequence zeros(const NetworkConfig& config, int steps) {
    AdaptiveSequence a;
    for (const auto& l : config.layers) {
      a.mu.push_back(MatrixX<Scalar>::Zero(l.z_units, steps));
      a.sigma.push_back(MatrixX<Scalar>::Zero(l.z_units, steps));
    }
    return a;
  }

  bool operator==(const AdaptiveSequence& other) const {
    if (mu.size() != other.mu.size()) return false;
    bool same = true;
    visit(
        [&same](const auto& a, const auto& b) {
          same = same && a.rows() == b.rows() && a.cols() == b.cols() && a == b;
        },
        *this, other);
    return same;
  }
};

/// Deterministic state (h, d) of every layer at one instant.
template <typename Scalar>
struct NetworkState {
  std::vector<VectorX<Scalar>> h;
  std::vector<VectorX<Scalar>> d;

  static NetworkState zeros(const NetworkConfig& config) {
    NetworkState s;
    for (const auto& l : config.layers) {
      s.h.push_back(VectorX<Scalar>::Zero(l.d_units));
      s.d.push_back(VectorX<Scalar>::Zero(l.d_units));
    }
    return s;
  }
};

template <typename Scalar>
struct Gaussian {
  VectorX<Scalar> mu;
  VectorX<Scalar> sigma;
};

template <typename Scalar>
struct LayerStep {
  VectorX<Scalar> u, h, d;
};

// --- elementary operations -------------------------------------------------

template <typename Derived>
typename Derived::PlainObject clamp_log_sigma(const Eigen::MatrixBase<Derived>& raw) {
  using S = typename Derived::Scalar;
  return raw.cwiseMax(S(kLogSigmaMin)).cwiseMin(S(kLogSigmaMax));
}

/// mu^p = tanh(W_mu d + b_mu^p), sigma^p = exp(W_sigma d + b_sigma^p).
template <typename Scalar, typename Derived>
Gaussian<Scalar> prior_params(const Eigen::MatrixBase<Derived>& d_prev,
                              const LayerParams<Scalar>& lp) {
  if (d_prev.size() != lp.w_mu.cols()) throw ShapeError("prior_params: state size mismatch");
  Gaussian<Scalar> g;
  g.mu = (lp.w_mu * d_prev + lp.b_mu_prior).array().tanh().matrix();
  g.sigma = clamp_log_sigma(lp.w_sigma * d_prev + lp.b_sigma_prior).array().exp().matrix();
  return g;
}

/// Posterior heads: the prior's weights plus the adaptive offsets and posterior biases.
template <typename Scalar, typename DerivedD, typename DerivedM, typename DerivedS>
Gaussian<Scalar> posterior_params(const Eigen::MatrixBase<DerivedD>& d_prev,
                                  const Eigen::MatrixBase<DerivedM>& a_mu,
                                  const Eigen::MatrixBase<DerivedS>& a_sigma,
                                  const LayerParams<Scalar>& lp) {
  if (d_prev.size() != lp.w_mu.cols()) throw ShapeError("posterior_params: state size mismatch");
  if (a_mu.size() != lp.w_mu.rows() || a_sigma.size() != lp.w_mu.rows()) {
    throw ShapeError("posterior_params: adaptive term missing or mis-sized");
  }
  Gaussian<Scalar> g;
  g.mu = (lp.w_mu * d_prev + a_mu + lp.b_mu_post).array().tanh().matrix();
  g.sigma =
      clamp_log_sigma(lp.w_sigma * d_prev + a_sigma + lp.b_sigma_post).array().exp().matrix();
  return g;
}

/// Reparameterized draw z = mu + sigma * eps.
template <typename DM, typename DS, typename DE>
auto sample_z(const Eigen::MatrixBase<DM>& mu, const Eigen::MatrixBase<DS>& sigma,
              const Eigen::MatrixBase<DE>& eps) {
  return (mu + sigma.cwiseProduct(eps)).eval();
}

/// Leaky integration h = (1 - 1/iota) h_prev + u / iota.
template <typename DH, typename DU>
auto leaky_integrate(const Eigen::MatrixBase<DH>& h_prev, const Eigen::MatrixBase<DU>& u,
                     double timescale) {
  using S = typename DH::Scalar;
  const S keep = S(1) - S(1) / S(timescale);
  return (keep * h_prev + u / S(timescale)).eval();
}

/// One deterministic MTRNN update of every layer given this step's samples.
template <typename Scalar>
std::vector<LayerStep<Scalar>> mtrnn_step(const NetworkState<Scalar>& prev,
                                          const std::vector<VectorX<Scalar>>& z,
                                          const NetworkParams<Scalar>& params,
                                          const NetworkConfig& config) {
  const int n = config.num_layers();
  if (static_cast<int>(prev.d.size()) != n || static_cast<int>(z.size()) != n ||
      static_cast<int>(params.layers.size()) != n) {
    throw ShapeError("mtrnn_step: layer count mismatch");
  }
  std::vector<LayerStep<Scalar>> out(n);
  for (int k = 0; k < n; ++k) {
    const auto& lp = params.layers[k];
    if (prev.d[k].size() != lp.w_rec.cols() || z[k].size() != lp.w_zd.cols()) {
      throw ShapeError("mtrnn_step: state or sample size mismatch at layer " + std::to_string(k));
    }
    VectorX<Scalar> u = lp.w_rec * prev.d[k] + lp.w_zd * z[k];
    if (k > 0) u.noalias() += lp.w_below * prev.d[k - 1];
    if (k + 1 < n) u.noalias() += lp.w_above * prev.d[k + 1];
    out[k].h = leaky_integrate(prev.h[k], u, config.layers[k].timescale);
    out[k].d = out[k].h.array().tanh().matrix();
    out[k].u = std::move(u);
  }
  return out;
}

/// Softmax over consecutive blocks of `bins` entries.
template <typename Derived>
VectorX<typename Derived::Scalar> softmax_blocks(const Eigen::MatrixBase<Derived>& logits,
                                                 int bins) {
  using S = typename Derived::Scalar;
  VectorX<S> out(logits.size());
  for (Eigen::Index i = 0; i < logits.size(); i += bins) {
    const auto block = logits.segment(i, bins);
    const auto e = (block.array() - block.maxCoeff()).exp();
    out.segment(i, bins) = (e / e.sum()).matrix();
  }
  return out;
}

/// x_{i,t} = softmax(W_dx_i d^0_t + b_x_i) for every output dimension i.
template <typename Scalar, typename Derived>
VectorX<Scalar> output_step(const Eigen::MatrixBase<Derived>& d_low,
                            const NetworkParams<Scalar>& params, const NetworkConfig& config) {
  return softmax_blocks(VectorX<Scalar>(params.w_out * d_low + params.b_out),
                        config.bins_per_dim);
}

/// Closed-form KL[q || p] between diagonal Gaussians, summed over units.
template <typename D1, typename D2, typename D3, typename D4>
typename D1::Scalar kl_term(const Eigen::MatrixBase<D1>& mu_p, const Eigen::MatrixBase<D2>& sigma_p,
                            const Eigen::MatrixBase<D3>& mu_q,
                            const Eigen::MatrixBase<D4>& sigma_q) {
  using S = typename D1::Scalar;
  if ((sigma_p.array() <= S(0)).any() || (sigma_q.array() <= S(0)).any()) {
    throw DomainError("kl_term: sigma must be positive");
  }
  const auto sp = sigma_p.array();
  const auto sq = sigma_q.array();
  return ((sp / sq).log() + ((mu_p.array() - mu_q.array()).square() + sq.square()) /
                                (S(2) * sp.square()) -
          S(0.5))
      .sum();
}

// --- rollouts ----------------------------------------------------------------

/// Full per-step record of one layer; `h`/`d` have T+1 columns (column 0 is the
/// initial state), every other matrix has T columns.
template <typename Scalar>
struct LayerTrace {
  MatrixX<Scalar> h, d;
  MatrixX<Scalar> mu_p, sigma_p, mu_q, sigma_q, z, eps;
  MatrixX<Scalar> log_sigma_p_raw, log_sigma_q_raw;
};

template <typename Scalar>
struct Rollout {
  std::vector<LayerTrace<Scalar>> layers;
  MatrixX<Scalar> x;  // output probabilities, (dims * bins) x T
  int posterior_steps = 0;

  int steps() const { return static_cast<int>(x.cols()); }

  NetworkState<Scalar> state_at(int column) const {
    NetworkState<Scalar> s;
    for (const auto& l : layers) {
      s.h.push_back(l.h.col(column));
      s.d.push_back(l.d.col(column));
    }
    return s;
  }
};

/// Standard-normal noise, one z-sized column per step and layer.
template <typename Scalar, typename Rng>
std::vector<MatrixX<Scalar>> draw_noise(const NetworkConfig& config, int steps, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<MatrixX<Scalar>> eps;
  for (const auto& l : config.layers) {
    MatrixX<Scalar> e(l.z_units, steps);
    for (int t = 0; t < steps; ++t) {
      for (int i = 0; i < l.z_units; ++i) e(i, t) = static_cast<Scalar>(normal(rng));
    }
    eps.push_back(std::move(e));
  }
  return eps;
}

template <typename Scalar>
std::vector<MatrixX<Scalar>> zero_noise(const NetworkConfig& config, int steps) {
  std::vector<MatrixX<Scalar>> eps;
  for (const auto& l : config.layers) eps.push_back(MatrixX<Scalar>::Zero(l.z_units, steps));
  return eps;
}

/// Runs `steps` steps from `initial`. The first `adaptive.steps()` steps sample z from
/// the posterior (using the adaptive values); the rest sample from the prior.
template <typename Scalar>
Rollout<Scalar> rollout(const NetworkParams<Scalar>& params, const NetworkConfig& config,
                        const NetworkState<Scalar>& initial, int steps,
                        const AdaptiveSequence<Scalar>& adaptive,
                        const std::vector<MatrixX<Scalar>>& noise) {
  const int n = config.num_layers();
  const int post = adaptive.mu.empty() ? 0 : adaptive.steps();
  if (steps < 1) throw ValidationError("rollout: steps must be >= 1");
  if (post > steps) throw ShapeError("rollout: more adaptive steps than rollout steps");
  if (static_cast<int>(noise.size()) != n) throw ShapeError("rollout: noise layer mismatch");
  if (static_cast<int>(initial.d.size()) != n) throw ShapeError("rollout: state layer mismatch");

  Rollout<Scalar> r;
  r.posterior_steps = post;
  r.layers.resize(n);
  for (int k = 0; k < n; ++k) {
    const auto& l = config.layers[k];
    if (noise[k].cols() < steps || noise[k].rows() != l.z_units) {
      throw ShapeError("rollout: noise too short");
    }
    auto& tr = r.layers[k];
    tr.h.resize(l.d_units, steps + 1);
    tr.d.resize(l.d_units, steps + 1);
    tr.h.col(0) = initial.h[k];
    tr.d.col(0) = initial.d[k];
    for (auto* m : {&tr.mu_p, &tr.sigma_p, &tr.mu_q, &tr.sigma_q, &tr.z, &tr.log_sigma_p_raw,
                    &tr.log_sigma_q_raw}) {
      m->resize(l.z_units, steps);
    }
    tr.eps = noise[k].leftCols(steps);
  }
  r.x.resize(config.output_size(), steps);

  VectorX<Scalar> pre_mu, pre_ls, u;
  for (int t = 0; t < steps; ++t) {
    const bool posterior = t < post;
    for (int k = 0; k < n; ++k) {
      const auto& lp = params.layers[k];
      auto& tr = r.layers[k];
      const auto d_prev = tr.d.col(t);
      pre_mu.noalias() = lp.w_mu * d_prev;
      pre_ls.noalias() = lp.w_sigma * d_prev;
      tr.mu_p.col(t) = (pre_mu + lp.b_mu_prior).array().tanh().matrix();
      tr.log_sigma_p_raw.col(t) = pre_ls + lp.b_sigma_prior;
      tr.sigma_p.col(t) = clamp_log_sigma(tr.log_sigma_p_raw.col(t)).array().exp().matrix();
      if (posterior) {
        tr.mu_q.col(t) = (pre_mu + adaptive.mu[k].col(t) + lp.b_mu_post).array().tanh().matrix();
        tr.log_sigma_q_raw.col(t) = pre_ls + adaptive.sigma[k].col(t) + lp.b_sigma_post;
        tr.sigma_q.col(t) = clamp_log_sigma(tr.log_sigma_q_raw.col(t)).array().exp().matrix();
      } else {
        tr.mu_q.col(t) = tr.mu_p.col(t);
        tr.log_sigma_q_raw.col(t) = tr.log_sigma_p_raw.col(t);
        tr.sigma_q.col(t) = tr.sigma_p.col(t);
      }
      tr.z.col(t) = sample_z(tr.mu_q.col(t), tr.sigma_q.col(t), tr.eps.col(t));
    }
    for (int k = 0; k < n; ++k) {
      const auto& lp = params.layers[k];
      auto& tr = r.layers[k];
      u.noalias() = lp.w_rec * tr.d.col(t);
      u.noalias() += lp.w_zd * tr.z.col(t);
      if (k > 0) u.noalias() += lp.w_below * r.layers[k - 1].d.col(t);
      if (k + 1 < n) u.noalias() += lp.w_above * r.layers[k + 1].d.col(t);
      tr.h.col(t + 1) = leaky_integrate(tr.h.col(t), u, config.layers[k].timescale);
      tr.d.col(t + 1) = tr.h.col(t + 1).array().tanh().matrix();
    }
    r.x.col(t) = output_step(r.layers[0].d.col(t + 1), params, config);
  }
  return r;
}

template <typename Scalar>
struct ElboTerms {
  Scalar reconstruction = 0;  // Σ target · log x
  Scalar regulation = 0;      // Σ KL over posterior steps
  Scalar total = 0;           // reconstruction - w · regulation
};

/// Sum of per-step KL over the posterior part of a rollout.
template <typename Scalar>
Scalar rollout_kl(const Rollout<Scalar>& r) {
  Scalar kl = 0;
  for (const auto& tr : r.layers) {
    for (int t = 0; t < r.posterior_steps; ++t) {
      kl += kl_term(tr.mu_p.col(t), tr.sigma_p.col(t), tr.mu_q.col(t), tr.sigma_q.col(t));
    }
  }
  return kl;
}

template <typename Scalar>
ElboTerms<Scalar> elbo(const Rollout<Scalar>& r, const MatrixX<Scalar>& targets, double w) {
  if (targets.cols() != r.steps() || targets.rows() != r.x.rows()) {
    throw ShapeError("elbo: targets do not match rollout length/size");
  }
  ElboTerms<Scalar> e;
  e.reconstruction = (targets.array() * r.x.array().log()).sum();
  e.regulation = rollout_kl(r);
  e.total = e.reconstruction - static_cast<Scalar>(w) * e.regulation;
  return e;
}

/// Σ target · log target: the largest attainable reconstruction for these targets.
template <typename Scalar>
Scalar max_reconstruction(const MatrixX<Scalar>& targets) {
  return (targets.array() * targets.array().max(Scalar(1e-300)).log()).sum();
}

// --- gradients -----------------------------------------------------------------

template <typename Scalar>
struct Gradients {
  NetworkParams<Scalar> params;
  AdaptiveSequence<Scalar> adaptive;  // only the posterior steps
};

/// Exact gradient of the ELBO (reconstruction - w KL) of a retained rollout with respect
/// to every parameter and every adaptive value, by backpropagation through time.
/// With `with_params` false only the adaptive gradients are filled.
template <typename Scalar>
Gradients<Scalar> bptt_grads(const Rollout<Scalar>& r, const MatrixX<Scalar>& targets, double w,
                             const NetworkParams<Scalar>& params, const NetworkConfig& config,
                             bool with_params = true) {
  const int n = config.num_layers();
  const int steps = r.steps();
  if (static_cast<int>(r.layers.size()) != n || steps == 0) {
    throw ValidationError("bptt_grads: rollout state missing");
  }
  if (targets.cols() != steps || targets.rows() != r.x.rows()) {
    throw ShapeError("bptt_grads: targets do not match rollout");
  }
  const Scalar ww = static_cast<Scalar>(w);
  const int bins = config.bins_per_dim;

  // d(Σ y log softmax)/d logits = y - x · Σ_block y
  MatrixX<Scalar> g_out = targets;
  for (int i = 0; i < targets.rows(); i += bins) {
    const auto block_sum = targets.middleRows(i, bins).colwise().sum();
    g_out.middleRows(i, bins) -= (r.x.middleRows(i, bins).array().rowwise() * block_sum.array())
                                     .matrix();
  }
  const MatrixX<Scalar> g_d_out = params.w_out.transpose() * g_out;

  std::vector<MatrixX<Scalar>> g_u(n), g_mu_q(n), g_ls_q(n), g_mu_p(n), g_ls_p(n);
  std::vector<VectorX<Scalar>> carry(n), g_h_next(n), next_carry(n);
  for (int k = 0; k < n; ++k) {
    const auto& l = config.layers[k];
    g_u[k].resize(l.d_units, steps);
    for (auto* m : {&g_mu_q[k], &g_ls_q[k], &g_mu_p[k], &g_ls_p[k]}) m->resize(l.z_units, steps);
    carry[k] = VectorX<Scalar>::Zero(l.d_units);
    g_h_next[k] = VectorX<Scalar>::Zero(l.d_units);
  }

  const auto in_clamp = [](Scalar raw) {
    return raw >= Scalar(kLogSigmaMin) && raw <= Scalar(kLogSigmaMax) ? Scalar(1) : Scalar(0);
  };

  for (int t = steps - 1; t >= 0; --t) {
    for (int k = 0; k < n; ++k) {
      const auto& tr = r.layers[k];
      VectorX<Scalar> g_d = carry[k];
      if (k == 0) g_d += g_d_out.col(t);
      const Scalar keep = Scalar(1) - Scalar(1) / Scalar(config.layers[k].timescale);
      VectorX<Scalar> g_h =
          g_d.cwiseProduct((Scalar(1) - tr.d.col(t + 1).array().square()).matrix()) +
          keep * g_h_next[k];
      g_u[k].col(t) = g_h / Scalar(config.layers[k].timescale);
      g_h_next[k] = std::move(g_h);
    }
    for (int k = 0; k < n; ++k) next_carry[k].setZero(config.layers[k].d_units);
    for (int k = 0; k < n; ++k) {
      const auto& lp = params.layers[k];
      const auto& tr = r.layers[k];
      const auto gu = g_u[k].col(t);
      next_carry[k].noalias() += lp.w_rec.transpose() * gu;
      if (k > 0) next_carry[k - 1].noalias() += lp.w_below.transpose() * gu;
      if (k + 1 < n) next_carry[k + 1].noalias() += lp.w_above.transpose() * gu;
      const VectorX<Scalar> g_z = lp.w_zd.transpose() * gu;

      for (int i = 0; i < config.layers[k].z_units; ++i) {
        const Scalar eps = tr.eps(i, t);
        if (t < r.posterior_steps) {
          const Scalar mp = tr.mu_p(i, t), mq = tr.mu_q(i, t);
          const Scalar sp = tr.sigma_p(i, t), sq = tr.sigma_q(i, t);
          const Scalar inv_vp = Scalar(1) / (sp * sp);
          const Scalar diff = mq - mp;
          const Scalar gmq = g_z(i) - ww * diff * inv_vp;
          const Scalar gmp = ww * diff * inv_vp;
          const Scalar glq = (g_z(i) * eps * sq - ww * (sq * sq * inv_vp - Scalar(1))) *
                             in_clamp(tr.log_sigma_q_raw(i, t));
          const Scalar glp = -ww * (Scalar(1) - (diff * diff + sq * sq) * inv_vp) *
                             in_clamp(tr.log_sigma_p_raw(i, t));
          g_mu_q[k](i, t) = gmq * (Scalar(1) - mq * mq);
          g_ls_q[k](i, t) = glq;
          g_mu_p[k](i, t) = gmp * (Scalar(1) - mp * mp);
          g_ls_p[k](i, t) = glp;
        } else {
          // prior step: z = mu_p + sigma_p eps, no KL
          const Scalar mp = tr.mu_p(i, t), sp = tr.sigma_p(i, t);
          g_mu_q[k](i, t) = 0;
          g_ls_q[k](i, t) = 0;
          g_mu_p[k](i, t) = g_z(i) * (Scalar(1) - mp * mp);
          g_ls_p[k](i, t) = g_z(i) * eps * sp * in_clamp(tr.log_sigma_p_raw(i, t));
        }
      }
      next_carry[k].noalias() +=
          lp.w_mu.transpose() * (g_mu_q[k].col(t) + g_mu_p[k].col(t));
      next_carry[k].noalias() +=
          lp.w_sigma.transpose() * (g_ls_q[k].col(t) + g_ls_p[k].col(t));
    }
    std::swap(carry, next_carry);
  }

  Gradients<Scalar> g;
  const int post = r.posterior_steps;
  g.adaptive.mu.resize(n);
  g.adaptive.sigma.resize(n);
  for (int k = 0; k < n; ++k) {
    g.adaptive.mu[k] = g_mu_q[k].leftCols(post);
    g.adaptive.sigma[k] = g_ls_q[k].leftCols(post);
  }
  if (!with_params) return g;

  g.params = NetworkParams<Scalar>::zeros(config);
  for (int k = 0; k < n; ++k) {
    auto& gp = g.params.layers[k];
    const auto& tr = r.layers[k];
    const auto d_prev = tr.d.leftCols(steps);
    gp.w_rec.noalias() = g_u[k] * d_prev.transpose();
    if (k > 0) gp.w_below.noalias() = g_u[k] * r.layers[k - 1].d.leftCols(steps).transpose();
    if (k + 1 < n) gp.w_above.noalias() = g_u[k] * r.layers[k + 1].d.leftCols(steps).transpose();
    gp.w_zd.noalias() = g_u[k] * tr.z.transpose();
    gp.w_mu.noalias() = (g_mu_q[k] + g_mu_p[k]) * d_prev.transpose();
    gp.w_sigma.noalias() = (g_ls_q[k] + g_ls_p[k]) * d_prev.transpose();
    gp.b_mu_post = g_mu_q[k].rowwise().sum();
    gp.b_sigma_post = g_ls_q[k].rowwise().sum();
    gp.b_mu_prior = g_mu_p[k].rowwise().sum();
    gp.b_sigma_prior = g_ls_p[k].rowwise().sum();
  }
  g.params.w_out.noalias() = g_out * r.layers[0].d.rightCols(steps).transpose();
  g.params.b_out = g_out.rowwise().sum();
  return g;
}

// --- generation ----------------------------------------------------------------

enum class GenerationMode { kMean, kSampled };

/// Prior-driven rollout of `steps` steps. Steps covered by `seed` (possibly none) draw z
/// from the posterior with those adaptive values, which selects the pattern to generate.
template <typename Scalar, typename Rng>
Rollout<Scalar> generate(const NetworkParams<Scalar>& params, const NetworkConfig& config,
                         const NetworkState<Scalar>& initial, int steps, GenerationMode mode,
                         Rng& rng, const AdaptiveSequence<Scalar>& seed = {}) {
  if (steps < 1) throw ValidationError("generate: steps must be >= 1");
  const auto noise = mode == GenerationMode::kMean ? zero_noise<Scalar>(config, steps)
                                                   : draw_noise<Scalar>(config, steps, rng);
  return rollout(params, config, initial, steps, seed, noise);
}

/// First `steps` columns of an adaptive sequence.
template <typename Scalar>
AdaptiveSequence<Scalar> head(const AdaptiveSequence<Scalar>& a, int steps) {
  AdaptiveSequence<Scalar> out;
  for (std::size_t k = 0; k < a.mu.size(); ++k) {
    out.mu.push_back(a.mu[k].leftCols(steps));
    out.sigma.push_back(a.sigma[k].leftCols(steps));
  }
  return out;
}

}  // namespace pvhri
