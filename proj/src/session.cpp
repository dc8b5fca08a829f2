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

#include "pvhri/session.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pvhri/error.hpp"
#include "pvhri/io.hpp"
#include "pvhri/json.hpp"
#include "pvhri/primitives.hpp"

namespace pvhri {

void TrialSpec::validate(int window_length) const {
  primitive_index(robot_intent);
  primitive_index(human_intent);
  CognitiveProfile::by_name(profile);
  if (steps < window_length) {
    throw ValidationError("trial: steps (" + std::to_string(steps) +
                          ") shorter than the regression window (" +
                          std::to_string(window_length) + ")");
  }
  if (trial < 1) throw ValidationError("trial: repeat index must be >= 1");
}

void SessionOptions::validate() const {
  if (!(network_hz > 0) || !(control_hz > 0)) throw ValidationError("session: rates must be > 0");
  if (control_hz < network_hz) {
    throw ValidationError("session: control rate below network rate");
  }
  regression.validate();
  gains.validate();
  plant.validate();
  if (plant.rate_hz != control_hz) {
    throw ValidationError("session: plant rate differs from control rate");
  }
  if (surrogate.gain < 0 || surrogate.bound < 0) {
    throw ValidationError("session: surrogate gain and bound must be >= 0");
  }
}

long long fast_tick_begin(long long n, double network_hz, double control_hz) {
  return static_cast<long long>(std::floor(static_cast<double>(n) * control_hz / network_hz + 1e-9));
}

Eigen::VectorXd ScriptedHuman::torque(long long, double network_step,
                                      const Eigen::VectorXd& theta_hat) {
  return human_surrogate(script_posture(script_, network_step), theta_hat, options_);
}

namespace {

const TrainerState& checked(const TrainerState& ckpt, const TrialSpec& spec,
                            const SessionOptions& options) {
  if (ckpt.profile.name != spec.profile) {
    throw ValidationError("trial: checkpoint profile '" + ckpt.profile.name +
                          "' does not match spec profile '" + spec.profile + "'");
  }
  spec.validate(options.regression.length);
  options.validate();
  if (ckpt.dataset.size() != kPrimitiveNames.size() || ckpt.adaptive.size() != ckpt.dataset.size()) {
    throw ValidationError("trial: checkpoint was not trained on the three primitives");
  }
  if (options.plant.joints != ckpt.config.output_dims) {
    throw ValidationError("trial: plant joints differ from network output dims");
  }
  return ckpt;
}

SessionOptions with_profile(SessionOptions options, const CognitiveProfile& profile) {
  options.regression.w_interact = profile.interact_w;
  return options;
}

Eigen::VectorXd clamp_to(const Eigen::VectorXd& posture, const SoftmaxCoding& coding) {
  Eigen::VectorXd out = posture;
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    out(j) = std::clamp(out(j), coding.ranges[j].lo, coding.ranges[j].hi);
  }
  return out;
}

double abs_sum(const Eigen::VectorXd& v) { return v.cwiseAbs().sum(); }

}  // namespace

Session::Session(const TrainerState& checkpoint, const ObserverNet& observer, TrialSpec spec,
                 SessionOptions options)
    : checkpoint_(checked(checkpoint, spec, options)),
      observer_(observer),
      options_(with_profile(std::move(options), checkpoint.profile)),
      window_(make_window(checkpoint.config, options_.regression, spec.seed)),
      arm_(options_.plant, options_.gains,
           checkpoint.dataset[primitive_index(spec.robot_intent)].values.row(0).transpose()),
      intent_(spec.robot_intent) {
  record_.spec = std::move(spec);
  set_intention(window_, checkpoint_.adaptive[primitive_index(intent_)], 0);
  theta_net_ = arm_.theta_hat();
}

void Session::set_intent(const std::string& primitive) {
  const int idx = primitive_index(primitive);
  // Start over from the primitive's opening, as at the beginning of a trial; keeping the
  // buffered evidence would pull the window straight back to the old behavior.
  window_ = make_window(checkpoint_.config, options_.regression,
                        record_.spec.seed + static_cast<std::uint64_t>(network_tick()));
  set_intention(window_, checkpoint_.adaptive[idx], 0);
  intent_ = primitive;
}

const NetworkTickRecord& Session::step(HumanSource& human) {
  if (done()) throw ValidationError("session: trial already finished");
  const long long n = network_tick();

  // Network tick on the measured posture, then the fast ticks of this interval.
  NetworkTickRecord rec;
  rec.t = n;
  rec.posture = arm_.theta_hat();
  const auto result = regression_step(window_, encode_posture(clamp_to(rec.posture, checkpoint_.coding),
                                                              checkpoint_.coding),
                                      checkpoint_.params, checkpoint_.config, checkpoint_.coding);
  theta_net_ = result.prediction;
  rec.theta_net = theta_net_;
  const auto intent = classify_posture(observer_, rec.theta_net);
  const auto behavior = classify_posture(observer_, rec.posture);
  rec.intent_label = intent.label;
  rec.intent_scores = intent.scores;
  rec.behavior_label = behavior.label;
  rec.behavior_scores = behavior.scores;
  rec.tau_ext_sum = abs_sum(arm_.tau_ext());
  record_.latents.push_back(result.latent);
  record_.latents.back().t = n;
  record_.network.push_back(std::move(rec));
  if (on_network_tick) on_network_tick(record_.network.back(), record_.latents.back());

  const long long begin = fast_tick_begin(n, options_.network_hz, options_.control_hz);
  const long long end = fast_tick_begin(n + 1, options_.network_hz, options_.control_hz);
  for (long long k = begin; k < end; ++k) {
    const double phase = static_cast<double>(n) +
                         static_cast<double>(k - begin) / static_cast<double>(end - begin);
    Eigen::VectorXd torque = human.torque(k, phase, arm_.theta_hat());
    if (before_fast_tick) before_fast_tick(k, torque);
    const auto tick = arm_.step(theta_net_, torque);
    FastTickRecord f;
    f.tick = k;
    f.network_tick = n;
    f.theta_hat = tick.measured.theta_hat;
    f.theta_net = theta_net_;
    f.tau_ext = arm_.tau_ext();
    f.tau_injected = torque;
    f.modes = tick.modes;
    f.tau_ext_sum = abs_sum(f.tau_ext);
    record_.fast.push_back(std::move(f));
    if (on_fast_tick) on_fast_tick(record_.fast.back(), arm_);
  }
  fast_tick_ = end;
  return record_.network.back();
}

TrialRecord run_trial(const TrialSpec& spec, const TrainerState& checkpoint,
                      const ObserverNet& observer, const SessionOptions& options) {
  Session session(checkpoint, observer, spec, options);
  ScriptedHuman human(checkpoint.dataset[primitive_index(spec.human_intent)], options.surrogate);
  while (!session.done()) session.step(human);
  return session.take_record();
}

std::vector<std::pair<std::string, std::string>> incongruent_pairs() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const std::string r : kPrimitiveNames) {
    for (const std::string h : kPrimitiveNames) {
      if (r != h) out.emplace_back(r, h);
    }
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> congruent_pairs() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& p : kPrimitiveNames) out.emplace_back(p, p);
  return out;
}

std::vector<TrialSpec> matrix_specs(const std::vector<std::string>& profiles,
                                    const std::vector<std::pair<std::string, std::string>>& pairs,
                                    int repeats, int steps, std::uint64_t base_seed) {
  if (repeats < 1) throw ValidationError("matrix: repeats must be >= 1");
  std::vector<TrialSpec> specs;
  for (const auto& profile : profiles) {
    const std::string name = CognitiveProfile::by_name(profile).name;
    std::uint64_t pi = 0;
    while (name != kProfileNames[pi]) ++pi;
    for (const auto& [robot, human] : pairs) {
      const auto pair = static_cast<std::uint64_t>(3 * primitive_index(robot) + primitive_index(human));
      for (int r = 1; r <= repeats; ++r) {
        TrialSpec s;
        s.robot_intent = robot;
        s.human_intent = human;
        s.profile = profile;
        s.steps = steps;
        s.trial = r;
        s.seed = base_seed * 1000 + pi * 100 + pair * 10 + static_cast<std::uint64_t>(r);
        specs.push_back(s);
      }
    }
  }
  return specs;
}

MatrixResult run_matrix(const std::vector<TrialSpec>& specs,
                        const std::map<std::string, TrainerState>& checkpoints,
                        const ObserverNet& observer, const SessionOptions& options) {
  MatrixResult out;
  for (const auto& spec : specs) {
    try {
      const auto it = checkpoints.find(spec.profile);
      if (it == checkpoints.end()) {
        throw ValidationError("no checkpoint for profile '" + spec.profile + "'");
      }
      out.records.push_back(run_trial(spec, it->second, observer, options));
    } catch (const std::exception& e) {
      out.failures.push_back(record_dir_name(spec) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------------------
// Persistence

void to_json(Json& j, const TrialSpec& s) {
  j = Json{{"robot_intent", s.robot_intent}, {"human_intent", s.human_intent},
           {"profile", s.profile},           {"steps", s.steps},
           {"seed", s.seed},                 {"trial", s.trial}};
}

void from_json(const Json& j, TrialSpec& s) {
  j.at("robot_intent").get_to(s.robot_intent);
  j.at("human_intent").get_to(s.human_intent);
  j.at("profile").get_to(s.profile);
  j.at("steps").get_to(s.steps);
  j.at("seed").get_to(s.seed);
  read_optional(j, "trial", s.trial);
}

std::string record_dir_name(const TrialSpec& spec) {
  return spec.profile + "_" + spec.pair() + "_t" + std::to_string(spec.trial);
}

namespace {

void put_vec(std::ostringstream& os, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) os << ',' << io::format_double(v(i));
}

void put_header(std::ostringstream& os, const std::string& name, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) os << ',' << name << '_' << i;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path, std::size_t width) {
  std::istringstream is(io::read_file(path));
  std::string line;
  std::vector<std::vector<std::string>> rows;
  if (!std::getline(is, line)) throw FormatError(path + ": empty file");
  if (split_csv(line).size() != width) throw FormatError(path + ": unexpected header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != width) {
      throw FormatError(path + ": line " + std::to_string(rows.size() + 2) + " has " +
                        std::to_string(cells.size()) + " cells, expected " + std::to_string(width));
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

double num(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw FormatError("bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw FormatError("bad number '" + s + "'");
  }
}

Eigen::VectorXd take(const std::vector<std::string>& cells, std::size_t& at, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = num(cells[at++]);
  return v;
}

Json vectors_to_json(const std::vector<Eigen::VectorXd>& vs) {
  Json out = Json::array();
  for (const auto& v : vs) out.push_back(std::vector<double>(v.data(), v.data() + v.size()));
  return out;
}

std::vector<Eigen::VectorXd> vectors_from_json(const Json& j) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& e : j) {
    const auto v = e.get<std::vector<double>>();
    out.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  return out;
}

Mode parse_mode(const std::string& s) {
  if (s == "active") return Mode::kActive;
  if (s == "compliant") return Mode::kCompliant;
  throw FormatError("unknown mode '" + s + "'");
}

}  // namespace

Json latent_to_json(const LatentSnapshot& s) {
  return Json{{"t", s.t},
              {"d", vectors_to_json(s.d)},
              {"mu_p", vectors_to_json(s.mu_p)},
              {"sigma_p", vectors_to_json(s.sigma_p)},
              {"mu_q", vectors_to_json(s.mu_q)},
              {"sigma_q", vectors_to_json(s.sigma_q)}};
}

LatentSnapshot latent_from_json(const Json& j) {
  LatentSnapshot s;
  j.at("t").get_to(s.t);
  s.d = vectors_from_json(j.at("d"));
  s.mu_p = vectors_from_json(j.at("mu_p"));
  s.sigma_p = vectors_from_json(j.at("sigma_p"));
  s.mu_q = vectors_from_json(j.at("mu_q"));
  s.sigma_q = vectors_from_json(j.at("sigma_q"));
  return s;
}

void save_record(const TrialRecord& record, const std::string& dir) {
  io::ensure_dir(dir);
  io::write_file(io::join(dir, "spec.json"), Json(record.spec).dump(2) + "\n");

  const Eigen::Index dims = record.network.empty() ? 0 : record.network.front().posture.size();
  const Eigen::Index classes =
      record.network.empty() ? 0 : record.network.front().intent_scores.size();
  {
    std::ostringstream os;
    os << "t,intent_label,behavior_label,tau_ext_sum";
    put_header(os, "posture", dims);
    put_header(os, "theta_net", dims);
    put_header(os, "intent_score", classes);
    put_header(os, "behavior_score", classes);
    os << '\n';
    for (const auto& r : record.network) {
      os << r.t << ',' << r.intent_label << ',' << r.behavior_label << ','
         << io::format_double(r.tau_ext_sum);
      put_vec(os, r.posture);
      put_vec(os, r.theta_net);
      put_vec(os, r.intent_scores);
      put_vec(os, r.behavior_scores);
      os << '\n';
    }
    io::write_file(io::join(dir, "network_ticks.csv"), os.str());
  }
  {
    std::ostringstream os;
    os << "tick,network_tick,tau_ext_sum";
    put_header(os, "theta_hat", dims);
    put_header(os, "theta_net", dims);
    put_header(os, "tau_ext", dims);
    put_header(os, "tau_injected", dims);
    put_header(os, "mode", dims);
    os << '\n';
    for (const auto& f : record.fast) {
      os << f.tick << ',' << f.network_tick << ',' << io::format_double(f.tau_ext_sum);
      put_vec(os, f.theta_hat);
      put_vec(os, f.theta_net);
      put_vec(os, f.tau_ext);
      put_vec(os, f.tau_injected);
      for (const auto m : f.modes) os << ',' << mode_name(m);
      os << '\n';
    }
    io::write_file(io::join(dir, "controller_ticks.csv"), os.str());
  }
  {
    std::ostringstream os;
    for (const auto& s : record.latents) os << latent_to_json(s).dump() << '\n';
    io::write_file(io::join(dir, "latents.jsonl"), os.str());
  }
}

TrialRecord load_record(const std::string& dir) {
  TrialRecord record;
  try {
    record.spec = Json::parse(io::read_file(io::join(dir, "spec.json"))).get<TrialSpec>();
  } catch (const Json::exception& e) {
    throw FormatError(dir + "/spec.json: " + e.what());
  }

  // Widths follow from the header lines.
  const auto header_width = [](const std::string& path) {
    std::istringstream is(io::read_file(path));
    std::string line;
    std::getline(is, line);
    return split_csv(line).size();
  };
  const auto net_path = io::join(dir, "network_ticks.csv");
  const auto fast_path = io::join(dir, "controller_ticks.csv");
  const std::size_t fast_width = header_width(fast_path);
  if (fast_width < 3 || (fast_width - 3) % 5 != 0) throw FormatError(fast_path + ": bad header");
  const auto dims = static_cast<Eigen::Index>((fast_width - 3) / 5);
  const std::size_t net_width = header_width(net_path);
  if (net_width < 4 + 2 * static_cast<std::size_t>(dims) ||
      (net_width - 4 - 2 * static_cast<std::size_t>(dims)) % 2 != 0) {
    throw FormatError(net_path + ": bad header");
  }
  const auto classes = static_cast<Eigen::Index>((net_width - 4 - 2 * dims) / 2);

  for (const auto& cells : read_csv(net_path, net_width)) {
    NetworkTickRecord r;
    std::size_t at = 0;
    r.t = static_cast<long long>(num(cells[at++]));
    r.intent_label = static_cast<int>(num(cells[at++]));
    r.behavior_label = static_cast<int>(num(cells[at++]));
    r.tau_ext_sum = num(cells[at++]);
    r.posture = take(cells, at, dims);
    r.theta_net = take(cells, at, dims);
    r.intent_scores = take(cells, at, classes);
    r.behavior_scores = take(cells, at, classes);
    record.network.push_back(std::move(r));
  }
  for (const auto& cells : read_csv(fast_path, fast_width)) {
    FastTickRecord f;
    std::size_t at = 0;
    f.tick = static_cast<long long>(num(cells[at++]));
    f.network_tick = static_cast<long long>(num(cells[at++]));
    f.tau_ext_sum = num(cells[at++]);
    f.theta_hat = take(cells, at, dims);
    f.theta_net = take(cells, at, dims);
    f.tau_ext = take(cells, at, dims);
    f.tau_injected = take(cells, at, dims);
    for (Eigen::Index j = 0; j < dims; ++j) f.modes.push_back(parse_mode(cells[at++]));
    record.fast.push_back(std::move(f));
  }
  std::istringstream is(io::read_file(io::join(dir, "latents.jsonl")));
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    try {
      record.latents.push_back(latent_from_json(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw FormatError(dir + "/latents.jsonl: " + e.what());
    }
  }
  return record;
}

}  // namespace pvhri
