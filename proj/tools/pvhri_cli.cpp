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

// pvhri: batch pipeline and live endpoint.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "pvhri/analysis.hpp"
#include "pvhri/checkpoint.hpp"
#include "pvhri/config.hpp"
#include "pvhri/control.hpp"
#include "pvhri/error.hpp"
#include "pvhri/gateway.hpp"
#include "pvhri/io.hpp"
#include "pvhri/primitives.hpp"
#include "pvhri/regression.hpp"
#include "pvhri/session.hpp"
#include "pvhri/tables.hpp"

using namespace pvhri;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

// Raised for bad arguments that CLI11 cannot check by itself.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(s);
  while (std::getline(is, cell, sep)) {
    if (!cell.empty()) out.push_back(cell);
  }
  return out;
}

void require_file(const std::string& path) {
  if (!io::exists(path)) throw UsageError("missing file: " + path);
}

std::vector<Trajectory> load_dataset(const std::string& dir, const Config& cfg) {
  if (dir.empty()) return make_primitives(cfg.data.dims, cfg.data.steps, cfg.data.rate_hz, cfg.data.shape);
  std::vector<Trajectory> out;
  for (const char* name : kPrimitiveNames) {
    const std::string path = io::join(dir, std::string(name) + ".json");
    require_file(path);
    out.push_back(read_trajectory(path));
  }
  return out;
}

TrainerState load_profile_checkpoint(const std::string& dir, const std::string& profile) {
  const std::string path = checkpoint_path(dir, profile);
  require_file(path);
  return load_checkpoint(path);
}

ObserverNet observer_for(const std::string& path, const std::vector<Trajectory>& dataset,
                         const Config& cfg) {
  if (!path.empty()) {
    require_file(path);
    return load_observer(path);
  }
  return fit_observer(dataset, cfg.observer).net;
}

std::vector<std::string> profile_list(const std::string& arg, const Config& cfg) {
  std::vector<std::string> out;
  if (arg.empty() || arg == "all") {
    for (const auto& p : cfg.profiles) out.push_back(p.name);
  } else {
    out = split(arg, ',');
    for (const auto& name : out) cfg.profile(name);
  }
  return out;
}

GenerationMode parse_mode(const std::string& s) {
  if (s == "mean") return GenerationMode::kMean;
  if (s == "sampled") return GenerationMode::kSampled;
  throw UsageError("unknown mode '" + s + "' (expected mean or sampled)");
}

void write_latents(const std::vector<LatentSnapshot>& latents, const std::string& path) {
  std::ostringstream os;
  for (const auto& s : latents) os << latent_to_json(s).dump() << '\n';
  io::write_file(path, os.str());
}

// ---------------------------------------------------------------------------------------

int cmd_gen_data(const Config& cfg, const std::string& out, bool csv) {
  io::ensure_dir(out);
  const auto data = make_primitives(cfg.data.dims, cfg.data.steps, cfg.data.rate_hz, cfg.data.shape);
  for (std::size_t i = 0; i < data.size(); ++i) {
    write_trajectory(data[i], io::join(out, std::string(kPrimitiveNames[i]) + ".json"));
    if (csv) write_trajectory_csv(data[i], io::join(out, std::string(kPrimitiveNames[i]) + ".csv"));
  }
  const auto fit = fit_observer(data, cfg.observer);
  save_observer(fit.net, io::join(out, "observer.json"));
  io::write_file(io::join(out, "observer_accuracy.json"),
                 Json{{"train", fit.train_accuracy}, {"test", fit.test_accuracy}}.dump(2) + "\n");
  std::cout << "wrote " << data.size() << " primitives and observer to " << out
            << " (held-out accuracy " << fit.test_accuracy << ")\n";
  return kExitOk;
}

int cmd_train(const Config& cfg, const std::string& profiles_arg, const std::string& data_dir,
              const std::string& out, int epochs, std::uint64_t seed, bool resume) {
  io::ensure_dir(out);
  const auto data = load_dataset(data_dir, cfg);
  const auto coding = coding_for(data, cfg.network.bins_per_dim, cfg.sharpness);
  for (const auto& name : profile_list(profiles_arg, cfg)) {
    const std::string path = checkpoint_path(out, name);
    TrainerState state;
    if (resume && io::exists(path)) {
      Trainer t(load_checkpoint(path));
      const int remaining = epochs - t.state().epoch;
      if (remaining > 0) t.run(remaining);
      state = t.state();
    } else {
      state = train(data, cfg.network, coding, cfg.profile(name), cfg.train, epochs, seed);
    }
    save_checkpoint(state, path);
    write_curves_csv(state.log, io::join(out, name + "_curves.csv"));
    const auto& last = state.log.back();
    std::cout << name << ": epoch " << state.epoch << " reconstruction " << last.reconstruction
              << " regulation " << last.regulation << " -> " << path << "\n";
  }
  return kExitOk;
}

int cmd_generate(const std::string& ckpt_path, const std::string& primitive, const std::string& mode,
                 int steps, int seed_steps, std::uint64_t seed, const std::string& out) {
  require_file(ckpt_path);
  const auto state = load_checkpoint(ckpt_path);
  std::mt19937_64 rng(seed);
  const int idx = primitive_index(primitive);
  const int n = steps > 0 ? steps : state.dataset[idx].steps();
  const auto r = generate_sequence(state, idx, n, parse_mode(mode), rng, std::min(seed_steps, n));
  const auto traj = decode_rollout(r, state);
  if (out.size() > 4 && out.substr(out.size() - 4) == ".csv") {
    write_trajectory_csv(traj, out);
  } else {
    write_trajectory(traj, out);
  }
  return kExitOk;
}

int cmd_regress(const Config& cfg, const std::string& ckpt_path, const std::string& evidence_path,
                const std::string& intent, const std::string& observer_path, std::uint64_t seed,
                const std::string& out) {
  require_file(ckpt_path);
  require_file(evidence_path);
  const auto state = load_checkpoint(ckpt_path);
  const auto evidence = read_trajectory(evidence_path, cfg.data.rate_hz);
  if (evidence.dims() != state.config.output_dims) {
    throw ShapeError("evidence has " + std::to_string(evidence.dims()) + " joints, network expects " +
                     std::to_string(state.config.output_dims));
  }
  const auto observer = observer_for(observer_path, state.dataset, cfg);
  RegressionOptions ro = cfg.session.regression;
  ro.w_interact = state.profile.interact_w;
  auto window = make_window(state.config, ro, seed);
  if (!intent.empty()) set_intention(window, state.adaptive[primitive_index(intent)], 0);

  io::ensure_dir(out);
  std::ostringstream os;
  os << "t,evidence_label,prediction_label,a_update_norm";
  for (int j = 0; j < evidence.dims(); ++j) os << ",prediction_" << j;
  os << '\n';
  std::vector<LatentSnapshot> latents;
  for (int t = 0; t < evidence.steps(); ++t) {
    const Eigen::VectorXd y = evidence.values.row(t).transpose();
    const auto res = regression_step(window, encode_posture(y, state.coding), state.params,
                                     state.config, state.coding);
    os << t << ',' << kPrimitiveNames[classify_posture(observer, y).label] << ','
       << kPrimitiveNames[classify_posture(observer, res.prediction).label] << ','
       << io::format_double(res.a_update_norm);
    for (Eigen::Index j = 0; j < res.prediction.size(); ++j) os << ',' << io::format_double(res.prediction(j));
    os << '\n';
    latents.push_back(res.latent);
    latents.back().t = t;
  }
  io::write_file(io::join(out, "predictions.csv"), os.str());
  write_latents(latents, io::join(out, "latents.jsonl"));
  return kExitOk;
}

int cmd_trial(const Config& cfg, const std::string& ckpt_dir, const std::string& observer_path,
              TrialSpec spec, const std::string& out) {
  const auto state = load_profile_checkpoint(ckpt_dir, spec.profile);
  const auto observer = observer_for(observer_path, state.dataset, cfg);
  const auto record = run_trial(spec, state, observer, cfg.session);
  save_record(record, out);
  const auto probs = intent_behavior_probs({record});
  std::cout << record_dir_name(spec) << ": p(I) " << probs.front().p_intent << " p(B) "
            << probs.front().p_behavior << "\n";
  return kExitOk;
}

int cmd_matrix(const Config& cfg, const std::string& ckpt_dir, const std::string& observer_path,
               const std::string& profiles_arg, const std::string& pairs_arg, int repeats, int steps,
               std::uint64_t seed, const std::string& out) {
  const auto profiles = profile_list(profiles_arg, cfg);
  std::map<std::string, TrainerState> checkpoints;
  for (const auto& p : profiles) checkpoints[p] = load_profile_checkpoint(ckpt_dir, p);
  std::vector<std::pair<std::string, std::string>> pairs;
  if (pairs_arg == "incongruent" || pairs_arg == "all") pairs = incongruent_pairs();
  if (pairs_arg == "congruent" || pairs_arg == "all") {
    for (const auto& p : congruent_pairs()) pairs.push_back(p);
  }
  if (pairs.empty()) {
    for (const auto& p : split(pairs_arg, ',')) {
      if (p.size() != 2) throw UsageError("pair '" + p + "' must be two primitive names, e.g. BA");
      pairs.emplace_back(p.substr(0, 1), p.substr(1, 1));
      primitive_index(pairs.back().first);
      primitive_index(pairs.back().second);
    }
  }
  if (pairs.empty()) throw UsageError("no pairs selected");
  const auto observer = observer_for(observer_path, checkpoints.begin()->second.dataset, cfg);
  const auto specs = matrix_specs(profiles, pairs, repeats, steps, seed);

  io::ensure_dir(out);
  MatrixResult result;
  for (const auto& spec : specs) {
    auto one = run_matrix({spec}, checkpoints, observer, cfg.session);
    for (auto& r : one.records) {
      save_record(r, io::join(out, record_dir_name(r.spec)));
      result.records.push_back(std::move(r));
    }
    for (auto& f : one.failures) {
      std::cerr << "trial failed: " << f << "\n";
      result.failures.push_back(std::move(f));
    }
  }
  if (!result.records.empty()) {
    io::write_file(io::join(out, "table2.csv"), intent_behavior_csv(intent_behavior_probs(result.records)));
    io::write_file(io::join(out, "table3.csv"), torque_table_csv(torque_stats(result.records)));
  }
  std::ostringstream failures;
  for (const auto& f : result.failures) failures << f << '\n';
  io::write_file(io::join(out, "failures.txt"), failures.str());
  std::cout << result.records.size() << " trials written to " << out << ", " << result.failures.size()
            << " failed\n";
  return result.failures.empty() ? kExitOk : kExitRuntime;
}

std::vector<TrialRecord> load_records(const std::string& dir) {
  std::vector<TrialRecord> out;
  std::vector<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_directory() && io::exists(io::join(entry.path().string(), "spec.json"))) {
      names.push_back(entry.path().filename().string());
    }
  }
  std::sort(names.begin(), names.end());
  for (const auto& n : names) out.push_back(load_record(io::join(dir, n)));
  return out;
}

int cmd_analyze(const Config& cfg, const std::string& ckpt_dir, const std::string& results_dir,
                const std::string& profiles_arg, int samples, std::uint64_t seed, const std::string& out) {
  io::ensure_dir(out);
  const auto profiles = profile_list(profiles_arg, cfg);
  std::map<std::string, TrainerState> states;
  std::map<std::string, Pca2Result> pcas;
  if (!ckpt_dir.empty()) {
    std::map<std::string, Eigen::MatrixXd> mse;
    for (const auto& p : profiles) {
      states[p] = load_profile_checkpoint(ckpt_dir, p);
      const auto& st = states[p];
      write_curves_csv(st.log, io::join(out, p + "_curves.csv"));
      mse[p + "_mean"] = generation_mse(st, GenerationMode::kMean, 1, seed);
      mse[p + "_sampled"] = generation_mse(st, GenerationMode::kSampled, samples, seed);

      const int top = static_cast<int>(st.config.layers.size()) - 1;
      const Eigen::MatrixXd lat = generation_latents(st, top);
      pcas[p] = pca2(lat);
      const Eigen::MatrixXd proj = pca_project(pcas[p], lat);
      std::ostringstream os;
      os << "primitive,step,pc1,pc2\n";
      const int steps = st.dataset.front().steps();
      for (Eigen::Index r = 0; r < proj.rows(); ++r) {
        os << kPrimitiveNames[r / steps] << ',' << r % steps << ',' << io::format_double(proj(r, 0)) << ','
           << io::format_double(proj(r, 1)) << '\n';
      }
      io::write_file(io::join(out, p + "_pca_generation.csv"), os.str());
    }
    // Per-step MSE averaged over the primitives; columns follow the profile order.
    std::ostringstream os;
    os << "step";
    for (const auto& p : profiles) os << ',' << p << "_mean," << p << "_sampled";
    os << '\n';
    const Eigen::Index steps = mse.begin()->second.rows();
    for (Eigen::Index t = 0; t < steps; ++t) {
      os << t;
      for (const auto& p : profiles) {
        os << ',' << io::format_double(mse[p + "_mean"].row(t).mean()) << ','
           << io::format_double(mse[p + "_sampled"].row(t).mean());
      }
      os << '\n';
    }
    io::write_file(io::join(out, "generation_mse.csv"), os.str());
  }
  if (!results_dir.empty()) {
    if (!std::filesystem::is_directory(results_dir)) throw UsageError("missing directory: " + results_dir);
    const auto records = load_records(results_dir);
    if (records.empty()) throw ValidationError("no trial records under " + results_dir);
    std::vector<TrialRecord> incongruent;
    for (const auto& r : records) {
      if (!r.spec.congruent()) incongruent.push_back(r);
    }
    if (!incongruent.empty()) {
      io::write_file(io::join(out, "table2.csv"), intent_behavior_csv(intent_behavior_probs(incongruent)));
    }
    io::write_file(io::join(out, "table3.csv"), torque_table_csv(torque_stats(records)));
    std::ostringstream os;
    os << "trial,t,pc1,pc2\n";
    for (const auto& r : records) {
      const auto it = pcas.find(r.spec.profile);
      if (it == pcas.end() || r.latents.empty()) continue;
      const int top = static_cast<int>(r.latents.front().d.size()) - 1;
      const Eigen::MatrixXd proj = pca_project(it->second, latent_series(r.latents, top));
      for (Eigen::Index t = 0; t < proj.rows(); ++t) {
        os << record_dir_name(r.spec) << ',' << t << ',' << io::format_double(proj(t, 0)) << ','
           << io::format_double(proj(t, 1)) << '\n';
      }
    }
    io::write_file(io::join(out, "pca_inference.csv"), os.str());
  }
  std::cout << "analysis written to " << out << "\n";
  return kExitOk;
}

int cmd_serve(const Config& cfg, const std::string& ckpt_dir, const std::string& observer_path,
              TrialSpec spec, LiveOptions live, const std::string& record_dir) {
  const auto state = load_profile_checkpoint(ckpt_dir, spec.profile);
  const auto observer = observer_for(observer_path, state.dataset, cfg);
  Gateway gateway(state, observer, spec, cfg.session, live);
  std::cout << "listening on " << live.host << ":" << gateway.port() << std::endl;
  gateway.run();
  if (!record_dir.empty()) save_record(gateway.record(), record_dir);
  return kExitOk;
}

int cmd_scenario(const std::string& script_path, const std::string& out, const std::string& write_script) {
  ScenarioScript script = pulse_scenario();
  if (!script_path.empty()) {
    require_file(script_path);
    script = scenario_from_json(io::read_file(script_path));
  }
  if (!write_script.empty()) io::write_file(write_script, scenario_to_json(script) + "\n");
  const auto rows = run_scenario(script);
  if (out.empty() || out == "-") {
    std::cout << tick_log_csv(rows);
  } else {
    io::write_file(out, tick_log_csv(rows));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PV-RNN agents with hybrid compliance control: data, training, trials, analysis"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path,
                 std::string("JSON config file (default: $") + kConfigEnv + ", else built-in defaults)");

  std::string out, data_dir, profiles = "all", ckpt, ckpt_dir, observer, evidence, intent, mode = "mean",
                              results, pairs = "incongruent", script, write_script, record;
  int epochs = -1, steps = -1, repeats = -1, seed_steps = kOpeningWindow, samples = 10;
  std::int64_t seed = -1;
  bool csv = false, resume = false;
  TrialSpec spec;
  LiveOptions live;
  std::string robot = "B", human = "A", profile = "moderate", host;
  int port = -1, trial = 1;
  double speed = -1, torque_bound = -1;

  auto* gen = app.add_subcommand("gen-data", "Write the synthetic primitives A, B, C and a trained observer");
  gen->add_option("--out", out, "Output directory")->required();
  gen->add_flag("--csv", csv, "Also write CSV copies");

  auto* tr = app.add_subcommand("train", "Train one or more cognitive profiles");
  tr->add_option("--profile", profiles, "Profile name, comma list or 'all'");
  tr->add_option("--data", data_dir, "Directory with A.json, B.json, C.json (default: generate)");
  tr->add_option("--out", out, "Checkpoint directory")->required();
  tr->add_option("--epochs", epochs, "Epochs (default from config)");
  tr->add_option("--seed", seed, "Seed (default from config)");
  tr->add_flag("--resume", resume, "Continue existing checkpoints up to --epochs");

  auto* ge = app.add_subcommand("generate", "Generate a primitive from a checkpoint");
  ge->add_option("--checkpoint", ckpt, "Checkpoint file")->required();
  ge->add_option("--primitive", intent, "A, B or C")->required();
  ge->add_option("--mode", mode, "mean or sampled");
  ge->add_option("--steps", steps, "Steps (default: training length)");
  ge->add_option("--seed-steps", seed_steps, "Opening steps drawn from the trained posterior");
  ge->add_option("--seed", seed, "Seed (default from config)");
  ge->add_option("--out", out, "Output trajectory (.json or .csv)")->required();

  auto* re = app.add_subcommand("regress", "Run error regression over an evidence file");
  re->add_option("--checkpoint", ckpt, "Checkpoint file")->required();
  re->add_option("--evidence", evidence, "Evidence trajectory (.json or .csv)")->required();
  re->add_option("--intent", intent, "Primitive to seed the window with");
  re->add_option("--observer", observer, "Observer file (default: fit on the checkpoint data)");
  re->add_option("--seed", seed, "Seed (default from config)");
  re->add_option("--out", out, "Output directory")->required();

  auto* tl = app.add_subcommand("trial", "Run one scripted trial");
  tl->add_option("--checkpoints", ckpt_dir, "Checkpoint directory")->required();
  tl->add_option("--robot", robot, "Robot intent");
  tl->add_option("--human", human, "Human intent");
  tl->add_option("--profile", profile, "Profile");
  tl->add_option("--steps", steps, "Network ticks (default from config)");
  tl->add_option("--trial", trial, "Repeat index");
  tl->add_option("--observer", observer, "Observer file (default: fit on the checkpoint data)");
  tl->add_option("--seed", seed, "Seed (default from config)");
  tl->add_option("--out", out, "Record directory")->required();

  auto* mx = app.add_subcommand("matrix", "Run the trial matrix and write summary tables");
  mx->add_option("--checkpoints", ckpt_dir, "Checkpoint directory")->required();
  mx->add_option("--profiles", profiles, "Profile names, comma list or 'all'");
  mx->add_option("--pairs", pairs, "incongruent, congruent, all, or a comma list such as BA,BC");
  mx->add_option("--repeats", repeats, "Repeats per pair and profile (default from config)");
  mx->add_option("--steps", steps, "Network ticks per trial (default from config)");
  mx->add_option("--observer", observer, "Observer file (default: fit on the checkpoint data)");
  mx->add_option("--seed", seed, "Base seed (default from config)");
  mx->add_option("--out", out, "Results directory")->required();

  auto* an = app.add_subcommand("analyze", "Training curves, generation MSE, PCA projections, tables");
  an->add_option("--checkpoints", ckpt_dir, "Checkpoint directory");
  an->add_option("--results", results, "Matrix results directory");
  an->add_option("--profiles", profiles, "Profile names, comma list or 'all'");
  an->add_option("--samples", samples, "Sampled-mode generations per primitive");
  an->add_option("--seed", seed, "Seed (default from config)");
  an->add_option("--out", out, "Output directory")->required();

  auto* sv = app.add_subcommand("serve", "Live session endpoint for the browser client");
  sv->add_option("--checkpoints", ckpt_dir, "Checkpoint directory")->required();
  sv->add_option("--profile", profile, "Profile");
  sv->add_option("--intent", robot, "Initial robot intent");
  sv->add_option("--steps", steps, "Network ticks before the session ends");
  sv->add_option("--host", host, "Listen address (default from config)");
  sv->add_option("--port", port, "Port, 0 picks a free one (default from config)");
  sv->add_option("--speed", speed, "Simulated seconds per wall second, 0 unpaced");
  sv->add_option("--torque-bound", torque_bound, "Per-joint torque clamp in Nm");
  sv->add_option("--observer", observer, "Observer file (default: fit on the checkpoint data)");
  sv->add_option("--seed", seed, "Seed (default from config)");
  sv->add_option("--record", record, "Save the session record to this directory");

  auto* sc = app.add_subcommand("scenario", "Controller/plant scenario (default: 2 Nm, 3 s pulse)");
  sc->add_option("--script", script, "Scenario JSON");
  sc->add_option("--write-script", write_script, "Also write the scenario used as JSON");
  sc->add_option("--out", out, "Tick log CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const Config cfg = [&] {
      try {
        return load_config_or_defaults(config_path);
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
    }();
    const std::uint64_t use_seed = seed >= 0 ? static_cast<std::uint64_t>(seed) : cfg.seed;
    if (*gen) return cmd_gen_data(cfg, out, csv);
    if (*tr) return cmd_train(cfg, profiles, data_dir, out, epochs > 0 ? epochs : cfg.train.epochs, use_seed, resume);
    if (*ge) return cmd_generate(ckpt, intent, mode, steps, seed_steps, use_seed, out);
    if (*re) return cmd_regress(cfg, ckpt, evidence, intent, observer, use_seed, out);
    if (*tl || *sv) {
      spec.robot_intent = robot;
      spec.human_intent = *tl ? human : robot;
      spec.profile = profile;
      spec.steps = steps > 0 ? steps : (*sv ? 1200 : cfg.trial_steps);
      spec.seed = use_seed;
      spec.trial = trial;
      if (*tl) return cmd_trial(cfg, ckpt_dir, observer, spec, out);
      live = cfg.live;
      if (!host.empty()) live.host = host;
      if (port >= 0) live.port = port;
      if (speed >= 0) live.speed = speed;
      if (torque_bound > 0) live.torque_bound = torque_bound;
      return cmd_serve(cfg, ckpt_dir, observer, spec, live, record);
    }
    if (*mx) {
      return cmd_matrix(cfg, ckpt_dir, observer, profiles, pairs, repeats > 0 ? repeats : cfg.repeats,
                        steps > 0 ? steps : cfg.trial_steps, use_seed, out);
    }
    if (*an) {
      if (ckpt_dir.empty() && results.empty()) throw UsageError("analyze needs --checkpoints and/or --results");
      return cmd_analyze(cfg, ckpt_dir, results, profiles, samples, use_seed, out);
    }
    if (*sc) return cmd_scenario(script, out, write_script);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
