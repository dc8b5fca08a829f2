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

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pvhri/adam.hpp"
#include "pvhri/encoding.hpp"
#include "pvhri/regression.hpp"
#include "pvhri/trainer.hpp"

namespace pvhri {

/// Feed-forward primitive classifier: dims -> 150 -> 15 -> 3, tanh / tanh / sigmoid.
struct ObserverNet {
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;

  int input_dims() const { return static_cast<int>(w1.cols()); }
  int classes() const { return static_cast<int>(w3.rows()); }

  template <typename F, typename Self, typename... Others>
  static void visit(F&& f, Self& self, Others&... others) {
    f(self.w1, others.w1...);
    f(self.b1, others.b1...);
    f(self.w2, others.w2...);
    f(self.b2, others.b2...);
    f(self.w3, others.w3...);
    f(self.b3, others.b3...);
  }

  static ObserverNet zeros(int dims, int hidden1 = 150, int hidden2 = 15, int classes = 3);
  bool operator==(const ObserverNet& o) const;
};

struct ObserverOptions {
  int epochs = 3000;
  double lr = 0.01;
  int hidden1 = 150;
  int hidden2 = 15;
  double weight_decay = 1e-3;  // L2 penalty on weights (not biases)
  int holdout_every = 5;  // every n-th time step goes to the test split
  std::uint64_t seed = 7;
};

struct Classification {
  int label = -1;
  Eigen::VectorXd scores;  // sigmoid outputs, one per class
};

/// Pre-sigmoid outputs for one posture.
Eigen::VectorXd observer_logits(const ObserverNet& net, const Eigen::VectorXd& posture);

/// Throws ShapeError if the posture has the wrong dimension.
Classification classify_posture(const ObserverNet& net, const Eigen::VectorXd& posture);

/// Binary cross-entropy training on postures (rows) with integer labels, full batch.
/// Throws ValidationError unless every class 0..classes-1 is present.
ObserverNet train_observer(const Eigen::MatrixXd& postures, const std::vector<int>& labels,
                           const ObserverOptions& options, int classes = 3);

double observer_accuracy(const ObserverNet& net, const Eigen::MatrixXd& postures,
                         const std::vector<int>& labels);

struct LabeledPostures {
  Eigen::MatrixXd train, test;
  std::vector<int> train_labels, test_labels;
};

/// Split of the primitives' postures by time step: step t is held out when
/// t % holdout_every == holdout_every - 1. Sequence i gets label i.
LabeledPostures split_postures(const std::vector<Trajectory>& primitives, int holdout_every);

struct ObserverFit {
  ObserverNet net;
  double train_accuracy = 0;
  double test_accuracy = 0;
};

ObserverFit fit_observer(const std::vector<Trajectory>& primitives,
                         const ObserverOptions& options = {});

struct Pca2Result {
  Eigen::VectorXd mean;
  Eigen::MatrixXd axes;       // dim x 2, orthonormal columns
  Eigen::Vector2d explained;  // variance fractions, non-increasing
  Eigen::MatrixXd projected;  // n x 2
  bool degenerate = false;    // zero total variance; axes are then arbitrary
};

/// Principal components of the rows of `series` (n >= 3 samples, dim >= 2).
Pca2Result pca2(const Eigen::MatrixXd& series);

/// Projects rows of `series` onto a fitted PCA (n x 2).
Eigen::MatrixXd pca_project(const Pca2Result& pca, const Eigen::MatrixXd& series);

/// Mean squared reconstruction error of `series` from its first k (1 or 2) components.
double pca_reconstruction_error(const Pca2Result& pca, const Eigen::MatrixXd& series, int k);

/// Per-step MSE (averaged over joints) between generated and training sequences;
/// steps x sequences. Sampled mode averages over `samples` draws.
Eigen::MatrixXd generation_mse(const TrainerState& state, GenerationMode mode, int samples,
                               std::uint64_t seed, int seed_steps = kOpeningWindow);

/// Deterministic state d of one layer while generating every training sequence in mean
/// mode, stacked (sequences x steps rows). Used to fit the PCA for latent plots.
Eigen::MatrixXd generation_latents(const TrainerState& state, int layer,
                                   int seed_steps = kOpeningWindow);

/// Rows of d for one layer across regression snapshots.
Eigen::MatrixXd latent_series(const std::vector<LatentSnapshot>& snapshots, int layer);

/// Per-step MSE between two equally long trajectories. Throws ShapeError otherwise.
Eigen::VectorXd trajectory_mse(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace pvhri
