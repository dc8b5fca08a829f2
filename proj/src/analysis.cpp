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

#include "pvhri/analysis.hpp"

#include <cmath>
#include <random>

namespace pvhri {

ObserverNet ObserverNet::zeros(int dims, int hidden1, int hidden2, int classes) {
  ObserverNet n;
  n.w1 = Eigen::MatrixXd::Zero(hidden1, dims);
  n.b1 = Eigen::VectorXd::Zero(hidden1);
  n.w2 = Eigen::MatrixXd::Zero(hidden2, hidden1);
  n.b2 = Eigen::VectorXd::Zero(hidden2);
  n.w3 = Eigen::MatrixXd::Zero(classes, hidden2);
  n.b3 = Eigen::VectorXd::Zero(classes);
  return n;
}

bool ObserverNet::operator==(const ObserverNet& o) const {
  bool same = true;
  visit(
      [&same](const auto& a, const auto& b) {
        same = same && a.rows() == b.rows() && a.cols() == b.cols() && a == b;
      },
      *this, o);
  return same;
}

Eigen::VectorXd observer_logits(const ObserverNet& net, const Eigen::VectorXd& posture) {
  if (posture.size() != net.input_dims()) {
    throw ShapeError("observer: posture has " + std::to_string(posture.size()) +
                     " joints, expected " + std::to_string(net.input_dims()));
  }
  const Eigen::VectorXd h1 = (net.w1 * posture + net.b1).array().tanh().matrix();
  const Eigen::VectorXd h2 = (net.w2 * h1 + net.b2).array().tanh().matrix();
  return net.w3 * h2 + net.b3;
}

Classification classify_posture(const ObserverNet& net, const Eigen::VectorXd& posture) {
  const auto logits = observer_logits(net, posture);
  Classification c;
  c.scores = (1.0 / (1.0 + (-logits.array()).exp())).matrix();
  Eigen::Index k;
  logits.maxCoeff(&k);
  c.label = static_cast<int>(k);
  return c;
}

ObserverNet train_observer(const Eigen::MatrixXd& postures, const std::vector<int>& labels,
                           const ObserverOptions& options, int classes) {
  const auto n = postures.rows();
  if (n == 0 || static_cast<Eigen::Index>(labels.size()) != n) {
    throw ValidationError("train_observer: postures and labels differ in count");
  }
  std::vector<int> seen(classes, 0);
  for (int l : labels) {
    if (l < 0 || l >= classes) throw ValidationError("train_observer: label out of range");
    ++seen[l];
  }
  for (int c = 0; c < classes; ++c) {
    if (seen[c] == 0) {
      throw ValidationError("train_observer: class " + std::to_string(c) + " missing");
    }
  }
  std::mt19937_64 rng(options.seed);
  auto net = ObserverNet::zeros(static_cast<int>(postures.cols()), options.hidden1,
                                options.hidden2, classes);
  ObserverNet::visit(
      [&rng](auto& t) {
        if (t.cols() == 1) return;
        std::uniform_real_distribution<double> dist(-1.0 / std::sqrt(double(t.cols())),
                                                    1.0 / std::sqrt(double(t.cols())));
        for (Eigen::Index j = 0; j < t.cols(); ++j)
          for (Eigen::Index i = 0; i < t.rows(); ++i) t(i, j) = dist(rng);
      },
      net);

  const Eigen::MatrixXd x = postures.transpose();  // dims x n
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(classes, n);
  for (Eigen::Index i = 0; i < n; ++i) y(labels[i], i) = 1.0;

  auto moments = AdamState<ObserverNet>::like(ObserverNet::zeros(
      static_cast<int>(postures.cols()), options.hidden1, options.hidden2, classes));
  AdamSettings adam;
  adam.lr = options.lr;
  for (int e = 0; e < options.epochs; ++e) {
    const Eigen::MatrixXd h1 = ((net.w1 * x).colwise() + net.b1).array().tanh().matrix();
    const Eigen::MatrixXd h2 = ((net.w2 * h1).colwise() + net.b2).array().tanh().matrix();
    const Eigen::MatrixXd out =
        (1.0 / (1.0 + (-((net.w3 * h2).colwise() + net.b3).array()).exp())).matrix();
    // Ascent direction of the negative mean binary cross-entropy.
    const Eigen::MatrixXd g3 = (y - out) / static_cast<double>(n);
    const Eigen::MatrixXd g2 =
        ((net.w3.transpose() * g3).array() * (1.0 - h2.array().square())).matrix();
    const Eigen::MatrixXd g1 =
        ((net.w2.transpose() * g2).array() * (1.0 - h1.array().square())).matrix();
    ObserverNet grad;
    grad.w3 = g3 * h2.transpose();
    grad.b3 = g3.rowwise().sum();
    grad.w2 = g2 * h1.transpose();
    grad.b2 = g2.rowwise().sum();
    grad.w1 = g1 * x.transpose();
    grad.b1 = g1.rowwise().sum();
    if (options.weight_decay > 0) {
      grad.w1 -= options.weight_decay * net.w1;
      grad.w2 -= options.weight_decay * net.w2;
      grad.w3 -= options.weight_decay * net.w3;
    }
    adam_ascend(net, grad, moments, adam);
  }
  return net;
}

double observer_accuracy(const ObserverNet& net, const Eigen::MatrixXd& postures,
                         const std::vector<int>& labels) {
  if (postures.rows() == 0) return 0.0;
  int correct = 0;
  for (Eigen::Index i = 0; i < postures.rows(); ++i) {
    correct += classify_posture(net, postures.row(i).transpose()).label == labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(postures.rows());
}

LabeledPostures split_postures(const std::vector<Trajectory>& primitives, int holdout_every) {
  if (primitives.empty()) throw ValidationError("split_postures: no primitives");
  if (holdout_every < 2) throw ValidationError("split_postures: holdout_every must be >= 2");
  const int dims = primitives.front().dims();
  std::vector<Eigen::VectorXd> train, test;
  LabeledPostures out;
  for (std::size_t p = 0; p < primitives.size(); ++p) {
    const auto& v = primitives[p].values;
    for (int t = 0; t < v.rows(); ++t) {
      if (t % holdout_every == holdout_every - 1) {
        test.push_back(v.row(t).transpose());
        out.test_labels.push_back(static_cast<int>(p));
      } else {
        train.push_back(v.row(t).transpose());
        out.train_labels.push_back(static_cast<int>(p));
      }
    }
  }
  out.train.resize(static_cast<Eigen::Index>(train.size()), dims);
  out.test.resize(static_cast<Eigen::Index>(test.size()), dims);
  for (std::size_t i = 0; i < train.size(); ++i) out.train.row(i) = train[i].transpose();
  for (std::size_t i = 0; i < test.size(); ++i) out.test.row(i) = test[i].transpose();
  return out;
}

ObserverFit fit_observer(const std::vector<Trajectory>& primitives,
                         const ObserverOptions& options) {
  const auto split = split_postures(primitives, options.holdout_every);
  ObserverFit fit;
  fit.net = train_observer(split.train, split.train_labels, options,
                           static_cast<int>(primitives.size()));
  fit.train_accuracy = observer_accuracy(fit.net, split.train, split.train_labels);
  fit.test_accuracy = observer_accuracy(fit.net, split.test, split.test_labels);
  return fit;
}

Pca2Result pca2(const Eigen::MatrixXd& series) {
  if (series.rows() < 3) throw ValidationError("pca2: need at least 3 samples");
  if (series.cols() < 2) throw ValidationError("pca2: need at least 2 dimensions");
  Pca2Result r;
  r.mean = series.colwise().mean().transpose();
  const Eigen::MatrixXd centered = series.rowwise() - r.mean.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * centered / double(series.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const auto& values = eig.eigenvalues();  // ascending
  const Eigen::Index d = values.size();
  const double total = values.cwiseMax(0.0).sum();
  r.degenerate = !(total > 1e-12 * std::max(1.0, cov.cwiseAbs().maxCoeff()));
  if (r.degenerate) {
    r.axes = Eigen::MatrixXd::Identity(series.cols(), 2);
    r.explained.setZero();
  } else {
    r.axes.resize(series.cols(), 2);
    r.axes.col(0) = eig.eigenvectors().col(d - 1);
    r.axes.col(1) = eig.eigenvectors().col(d - 2);
    r.explained << std::max(values(d - 1), 0.0) / total, std::max(values(d - 2), 0.0) / total;
  }
  r.projected = centered * r.axes;
  return r;
}

Eigen::MatrixXd pca_project(const Pca2Result& pca, const Eigen::MatrixXd& series) {
  if (series.cols() != pca.mean.size()) throw ShapeError("pca_project: dimension mismatch");
  return (series.rowwise() - pca.mean.transpose()) * pca.axes;
}

double pca_reconstruction_error(const Pca2Result& pca, const Eigen::MatrixXd& series, int k) {
  if (k < 1 || k > 2) throw ValidationError("pca_reconstruction_error: k must be 1 or 2");
  const Eigen::MatrixXd centered = series.rowwise() - pca.mean.transpose();
  const auto axes = pca.axes.leftCols(k);
  const Eigen::MatrixXd residual = centered - centered * axes * axes.transpose();
  return residual.squaredNorm() / static_cast<double>(series.rows());
}

Eigen::VectorXd trajectory_mse(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("trajectory_mse: trajectories differ in shape");
  }
  return (a - b).array().square().rowwise().mean().matrix();
}

Eigen::MatrixXd generation_mse(const TrainerState& state, GenerationMode mode, int samples,
                               std::uint64_t seed, int seed_steps) {
  const int n = static_cast<int>(state.dataset.size());
  const int steps = state.dataset.front().steps();
  for (const auto& t : state.dataset) {
    if (t.steps() != steps) throw ShapeError("generation_mse: sequences differ in length");
  }
  const int draws = mode == GenerationMode::kMean ? 1 : samples;
  if (draws < 1) throw ValidationError("generation_mse: samples must be >= 1");
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(steps, n);
  for (int p = 0; p < n; ++p) {
    for (int s = 0; s < draws; ++s) {
      const auto gen =
          decode_rollout(generate_sequence(state, p, steps, mode, rng, seed_steps), state);
      out.col(p) += trajectory_mse(gen.values, state.dataset[p].values) / draws;
    }
  }
  return out;
}

Eigen::MatrixXd generation_latents(const TrainerState& state, int layer, int seed_steps) {
  if (layer < 0 || layer >= static_cast<int>(state.config.layers.size())) {
    throw ValidationError("generation_latents: no layer " + std::to_string(layer));
  }
  std::vector<Eigen::MatrixXd> parts;
  Eigen::Index rows = 0;
  std::mt19937_64 rng(0);  // unused in mean mode
  for (int p = 0; p < static_cast<int>(state.dataset.size()); ++p) {
    const auto r = generate_sequence(state, p, state.dataset[p].steps(), GenerationMode::kMean, rng,
                                     seed_steps);
    parts.push_back(r.layers[layer].d.transpose());
    rows += parts.back().rows();
  }
  Eigen::MatrixXd out(rows, parts.front().cols());
  Eigen::Index at = 0;
  for (const auto& m : parts) {
    out.middleRows(at, m.rows()) = m;
    at += m.rows();
  }
  return out;
}

Eigen::MatrixXd latent_series(const std::vector<LatentSnapshot>& snapshots, int layer) {
  if (snapshots.empty()) return {};
  if (layer < 0 || layer >= static_cast<int>(snapshots.front().d.size())) {
    throw ValidationError("latent_series: no layer " + std::to_string(layer));
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(snapshots.size()), snapshots.front().d[layer].size());
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = snapshots[i].d[layer].transpose();
  }
  return out;
}

}  // namespace pvhri
