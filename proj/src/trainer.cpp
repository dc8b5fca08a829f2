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

#include "pvhri/trainer.hpp"

#include <sstream>

#include "pvhri/io.hpp"

namespace pvhri {

CognitiveProfile CognitiveProfile::by_name(const std::string& name) {
  for (const auto& p : reference()) {
    if (p.name == name) return p;
  }
  throw ValidationError("unknown profile '" + name + "' (expected rigid, moderate or flexible)");
}

void TrainOptions::validate() const {
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (!(param_adam.lr >= 0) || !(adaptive_alpha >= 0) || !(param_lr_plain >= 0)) {
    throw ValidationError("learning rates must be >= 0");
  }
  if (!(param_adam.beta1 >= 0 && param_adam.beta1 < 1) ||
      !(param_adam.beta2 >= 0 && param_adam.beta2 < 1)) {
    throw ValidationError("Adam betas must lie in [0, 1)");
  }
}

bool TrainerState::operator==(const TrainerState& o) const {
  return config == o.config && coding.bins_per_dim == o.coding.bins_per_dim &&
         coding.sharpness == o.coding.sharpness && coding.ranges == o.coding.ranges &&
         profile == o.profile && options == o.options && dataset == o.dataset &&
         params == o.params && adaptive == o.adaptive && param_moments == o.param_moments &&
         adaptive_moments == o.adaptive_moments && rng == o.rng && epoch == o.epoch &&
         log == o.log;
}

SoftmaxCoding coding_for(const std::vector<Trajectory>& dataset, int bins, double sharpness) {
  if (dataset.empty()) throw ValidationError("dataset is empty");
  return SoftmaxCoding(bins, sharpness, dataset.front().limits);
}

TrainerState init_trainer(const std::vector<Trajectory>& dataset, const NetworkConfig& config,
                          const SoftmaxCoding& coding, const CognitiveProfile& profile,
                          const TrainOptions& options) {
  config.validate();
  coding.validate();
  options.validate();
  if (dataset.empty()) throw ValidationError("dataset is empty");
  for (const auto& traj : dataset) {
    traj.validate();
    if (traj.dims() != dataset.front().dims()) {
      throw ValidationError("dataset sequences differ in joint count");
    }
  }
  if (dataset.front().dims() != config.output_dims || coding.dims() != config.output_dims ||
      coding.bins_per_dim != config.bins_per_dim) {
    throw ValidationError("dataset/coding dimensions do not match the network output");
  }
  TrainerState s;
  s.config = config;
  s.coding = coding;
  s.profile = profile;
  s.options = options;
  s.dataset = dataset;
  s.rng.seed(config.seed);
  s.params = NetworkParams<double>::random(config, s.rng);
  s.param_moments = AdamState<NetworkParams<double>>::like(NetworkParams<double>::zeros(config));
  for (const auto& traj : dataset) {
    auto a = AdaptiveSequence<double>::zeros(config, traj.steps());
    s.adaptive_moments.push_back(AdamState<AdaptiveSequence<double>>::like(a));
    s.adaptive.push_back(std::move(a));
  }
  return s;
}

Trainer::Trainer(TrainerState state) : state_(std::move(state)) {
  for (const auto& traj : state_.dataset) targets_.push_back(encode_trajectory(traj, state_.coding));
  if (state_.adaptive.size() != targets_.size() ||
      state_.adaptive_moments.size() != targets_.size()) {
    throw ValidationError("trainer state: adaptive values do not match the dataset");
  }
}

const EpochLog& Trainer::step() {
  auto& s = state_;
  const double w = s.profile.train_w;
  const auto initial = NetworkState<double>::zeros(s.config);
  auto grad_params = NetworkParams<double>::zeros(s.config);
  EpochLog entry;
  entry.epoch = s.epoch + 1;
  std::vector<AdaptiveSequence<double>> grad_adaptive;

  for (std::size_t i = 0; i < targets_.size(); ++i) {
    const auto& y = targets_[i];
    const int steps = static_cast<int>(y.cols());
    const auto noise = draw_noise<double>(s.config, steps, s.rng);
    const auto r = rollout(s.params, s.config, initial, steps, s.adaptive[i], noise);
    const auto terms = elbo(r, y, w);
    entry.reconstruction += terms.reconstruction;
    entry.regulation += terms.regulation;
    entry.deficit += max_reconstruction(y) - terms.reconstruction;
    auto g = bptt_grads(r, y, w, s.params, s.config);
    NetworkParams<double>::visit([](auto& acc, const auto& gi) { acc += gi; }, grad_params,
                                 g.params);
    grad_adaptive.push_back(std::move(g.adaptive));
  }
  if (!std::isfinite(entry.reconstruction) || !std::isfinite(entry.regulation) ||
      !grad_params.all_finite()) {
    throw DivergenceError("training diverged at epoch " + std::to_string(entry.epoch),
                          entry.epoch);
  }

  if (s.options.param_optimizer == Optimizer::kAdam) {
    adam_ascend(s.params, grad_params, s.param_moments, s.options.param_adam);
  } else {
    gradient_ascend(s.params, grad_params, s.options.param_lr_plain);
  }
  for (std::size_t i = 0; i < s.adaptive.size(); ++i) {
    if (s.options.adaptive_optimizer == Optimizer::kAdam) {
      AdamSettings a = s.options.param_adam;
      a.lr = s.options.adaptive_alpha;
      adam_ascend(s.adaptive[i], grad_adaptive[i], s.adaptive_moments[i], a);
    } else {
      update_adaptive(s.adaptive[i], grad_adaptive[i], s.options.adaptive_alpha);
    }
  }
  ++s.epoch;
  s.log.push_back(entry);
  return s.log.back();
}

void Trainer::run(int epochs) {
  for (int e = 0; e < epochs; ++e) step();
}

TrainerState train(const std::vector<Trajectory>& dataset, NetworkConfig config,
                   const SoftmaxCoding& coding, const CognitiveProfile& profile,
                   TrainOptions options, int epochs, std::uint64_t seed) {
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  config.seed = seed;
  config.meta_w = profile.train_w;
  options.epochs = epochs;
  Trainer trainer(init_trainer(dataset, config, coding, profile, options));
  trainer.run(epochs);
  return std::move(trainer.state());
}

void update_adaptive(AdaptiveSequence<double>& a, const AdaptiveSequence<double>& grad,
                     double alpha) {
  if (a.mu.size() != grad.mu.size() || a.steps() != grad.steps()) {
    throw ShapeError("update_adaptive: shape mismatch");
  }
  gradient_ascend(a, grad, alpha);
}

Rollout<double> generate_sequence(const TrainerState& state, int sequence, int steps,
                                  GenerationMode mode, std::mt19937_64& rng, int seed_steps) {
  if (sequence < 0 || sequence >= static_cast<int>(state.adaptive.size())) {
    throw ValidationError("generate: no training sequence " + std::to_string(sequence));
  }
  if (seed_steps < 0 || seed_steps > state.adaptive[sequence].steps() || seed_steps > steps) {
    throw ValidationError("generate: seed_steps out of range");
  }
  return generate(state.params, state.config, NetworkState<double>::zeros(state.config), steps,
                  mode, rng, head(state.adaptive[sequence], seed_steps));
}

Trajectory decode_rollout(const Rollout<double>& r, const TrainerState& state) {
  Trajectory traj;
  traj.rate_hz = state.dataset.front().rate_hz;
  traj.joint_names = state.dataset.front().joint_names;
  traj.limits = state.coding.ranges;
  traj.values = decode_sequence(r.x, state.coding);
  return traj;
}

void write_curves_csv(const std::vector<EpochLog>& log, const std::string& path) {
  std::ostringstream out;
  out << "epoch,reconstruction,regulation,deficit\n";
  for (const auto& e : log) {
    out << e.epoch << ',' << io::format_double(e.reconstruction) << ','
        << io::format_double(e.regulation) << ',' << io::format_double(e.deficit) << '\n';
  }
  io::write_file(path, out.str());
}

}  // namespace pvhri
