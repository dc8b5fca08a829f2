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

#include "pvhri/gateway.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include "pvhri/error.hpp"
#include "pvhri/primitives.hpp"

namespace pvhri {

Json make_message(const std::string& type, long long t, Json payload) {
  return Json{{"schema_version", kSchemaVersion}, {"type", type}, {"t", t}, {"payload", std::move(payload)}};
}

namespace {

Json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

double finite_number(const Json& j, const std::string& what) {
  if (!j.is_number()) throw FormatError(what + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw FormatError(what + " must be finite");
  return v;
}

}  // namespace

Command parse_command(const std::string& text, int joints, double torque_bound) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw FormatError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("message must be a JSON object");
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer()) {
    throw FormatError("message lacks an integer schema_version");
  }
  if (j["schema_version"].get<int>() != kSchemaVersion) {
    throw FormatError("schema_version " + j["schema_version"].dump() + " not supported (expected " +
                      std::to_string(kSchemaVersion) + ")");
  }
  if (!j.contains("type") || !j["type"].is_string()) throw FormatError("message lacks a type");
  const std::string type = j["type"].get<std::string>();
  if (type == "hello" || type == "config" || type == "state" || type == "latent" ||
      type == "metrics" || type == "error") {
    throw FormatError("message type '" + type + "' is not accepted from clients");
  }
  if (type != "torque_cmd" && type != "intent_cmd") {
    throw FormatError("unknown message type '" + type + "'");
  }
  if (!j.contains("payload") || !j["payload"].is_object()) throw FormatError(type + " lacks a payload object");
  const Json& p = j["payload"];

  Command c;
  if (type == "intent_cmd") {
    c.kind = Command::Kind::kIntent;
    if (!p.contains("intent") || !p["intent"].is_string()) throw FormatError("intent_cmd lacks intent");
    c.intent = p["intent"].get<std::string>();
    try {
      primitive_index(c.intent);
    } catch (const ValidationError& e) {
      throw FormatError(e.what());
    }
    return c;
  }

  c.kind = Command::Kind::kTorque;
  if (!p.contains("torque")) throw FormatError("torque_cmd lacks torque");
  const auto clamp = [&](double v) {
    const double out = std::clamp(v, -torque_bound, torque_bound);
    c.clamped = c.clamped || out != v;
    return out;
  };
  if (p.contains("joint")) {
    if (!p["joint"].is_number_integer()) throw FormatError("torque_cmd joint must be an integer");
    c.joint = p["joint"].get<int>();
    if (c.joint < 0 || c.joint >= joints) {
      throw FormatError("torque_cmd joint " + std::to_string(c.joint) + " outside 0.." +
                        std::to_string(joints - 1));
    }
    const double v = finite_number(p["torque"], "torque_cmd torque");
    c.requested = Eigen::VectorXd::Constant(1, v);
    c.joint_torque = clamp(v);
    return c;
  }
  if (!p["torque"].is_array() || static_cast<int>(p["torque"].size()) != joints) {
    throw FormatError("torque_cmd torque must be an array of " + std::to_string(joints) +
                      " numbers or a number with a joint index");
  }
  c.requested.resize(joints);
  c.torque.resize(joints);
  for (int i = 0; i < joints; ++i) {
    c.requested(i) = finite_number(p["torque"][i], "torque_cmd torque[" + std::to_string(i) + "]");
    c.torque(i) = clamp(c.requested(i));
  }
  return c;
}

void LiveOptions::validate() const {
  if (port < 0 || port > 65535) throw ValidationError("live: port outside 0..65535");
  if (!(torque_bound > 0)) throw ValidationError("live: torque bound must be > 0");
  if (!(speed >= 0)) throw ValidationError("live: speed must be >= 0");
}

class Gateway::LiveHuman : public HumanSource {
 public:
  explicit LiveHuman(int joints) : held(Eigen::VectorXd::Zero(joints)) {}
  Eigen::VectorXd torque(long long, double, const Eigen::VectorXd&) override { return held; }
  Eigen::VectorXd held;
};

namespace {

int top_layer(const TrainerState& ckpt, int requested) {
  const int n = static_cast<int>(ckpt.config.layers.size());
  const int layer = requested < 0 ? n - 1 : requested;
  if (layer >= n) throw ValidationError("live: latent layer " + std::to_string(layer) + " does not exist");
  return layer;
}

LiveOptions checked(LiveOptions live) {
  live.validate();
  return live;
}

}  // namespace

Gateway::Gateway(const TrainerState& checkpoint, const ObserverNet& observer, TrialSpec spec,
                 SessionOptions options, LiveOptions live)
    : spec_(spec),
      options_(options),
      live_(checked(std::move(live))),
      session_(checkpoint, observer, std::move(spec), std::move(options)),
      server_(live_.port, live_.host),
      human_(std::make_unique<LiveHuman>(checkpoint.config.output_dims)),
      layer_(top_layer(checkpoint, live_.latent_layer)) {
  const Eigen::MatrixXd latents = generation_latents(checkpoint, layer_);
  pca_ = pca2(latents);
  const Eigen::MatrixXd proj = pca_project(pca_, latents);
  const Eigen::Vector2d mn = proj.colwise().minCoeff().transpose();
  const Eigen::Vector2d mx = proj.colwise().maxCoeff().transpose();
  const Eigen::Vector2d pad = ((mx - mn) * 0.5).cwiseMax(1e-3);
  lo_ = mn - pad;
  hi_ = mx + pad;
}

Gateway::~Gateway() = default;

Eigen::Vector2d Gateway::project(const Eigen::VectorXd& d, bool& clipped) const {
  const Eigen::Vector2d p = pca_.axes.transpose() * (d - pca_.mean);
  const Eigen::Vector2d c = p.cwiseMax(lo_).cwiseMin(hi_);
  clipped = c != p;
  return c;
}

Json Gateway::config_payload() const {
  const auto& ckpt = session_.checkpoint();
  Json classes = Json::array();
  for (const char* name : kPrimitiveNames) classes.push_back(name);
  return Json{{"profile", spec_.profile},
              {"robot_intent", session_.intent()},
              {"steps", spec_.steps},
              {"joints", ckpt.config.output_dims},
              {"limits", options_.plant.limits},
              {"torque_bound", live_.torque_bound},
              {"network_hz", options_.network_hz},
              {"control_hz", options_.control_hz},
              {"classes", classes},
              {"gains", options_.gains},
              {"pca",
               {{"layer", layer_},
                {"mean", vec(pca_.mean)},
                {"axes", matrix_to_json(pca_.axes)},
                {"explained", vec(pca_.explained)},
                {"bounds", {{"min", vec(lo_)}, {"max", vec(hi_)}}}}}};
}

void Gateway::send(ws::Connection& conn, const Json& message) { conn.send_text(message.dump()); }

void Gateway::drain(ws::Connection& conn, long long fast_tick) {
  std::deque<std::string> pending;
  {
    std::lock_guard<std::mutex> lock(inbox_mutex_);
    pending.swap(inbox_);
  }
  const int joints = static_cast<int>(human_->held.size());
  for (const auto& text : pending) {
    try {
      const Command c = parse_command(text, joints, live_.torque_bound);
      if (c.kind == Command::Kind::kIntent) {
        session_.set_intent(c.intent);
        send(conn, make_message("intent_cmd", fast_tick,
                                {{"intent", c.intent}, {"network_tick", session_.network_tick()}}));
        continue;
      }
      Json ack{{"clamped", c.clamped}, {"bound", live_.torque_bound}, {"applied_at", fast_tick}};
      if (c.joint >= 0) {
        human_->held(c.joint) = c.joint_torque;
        ack["joint"] = c.joint;
        ack["torque"] = c.joint_torque;
        ack["requested"] = c.requested(0);
      } else {
        human_->held = c.torque;
        ack["torque"] = vec(c.torque);
        ack["requested"] = vec(c.requested);
      }
      send(conn, make_message("torque_cmd", fast_tick, std::move(ack)));
    } catch (const FormatError& e) {
      send(conn, make_message("error", fast_tick, {{"message", e.what()}}));
    }
  }
}

void Gateway::serve(ws::Connection& conn) {
  using clock = std::chrono::steady_clock;
  send(conn, make_message("hello", session_.fast_tick(),
                          {{"server", "pvhri"}, {"schema_version", kSchemaVersion}}));
  send(conn, make_message("config", session_.fast_tick(), config_payload()));

  reader_done_ = false;
  std::thread reader([&] {
    try {
      while (auto text = conn.receive()) {
        std::lock_guard<std::mutex> lock(inbox_mutex_);
        inbox_.push_back(std::move(*text));
      }
    } catch (const IoError&) {
    }
    reader_done_ = true;
  });

  const double tick_seconds = 1.0 / options_.control_hz;
  const auto resume = clock::now();
  const long long resume_tick = session_.fast_tick();

  session_.on_network_tick = [&](const NetworkTickRecord& rec, const LatentSnapshot& latent) {
    network_tick_ = rec.t;
    const auto names = [](int label) { return label >= 0 ? Json(kPrimitiveNames[label]) : Json(); };
    send(conn, make_message("metrics", rec.t,
                            {{"network_tick", rec.t},
                             {"intent", session_.intent()},
                             {"intent_label", names(rec.intent_label)},
                             {"behavior_label", names(rec.behavior_label)},
                             {"intent_scores", vec(rec.intent_scores)},
                             {"behavior_scores", vec(rec.behavior_scores)},
                             {"tau_ext_sum", rec.tau_ext_sum}}));
    bool clipped = false;
    const Eigen::Vector2d p = project(latent.d[layer_], clipped);
    send(conn, make_message("latent", rec.t,
                            {{"network_tick", rec.t},
                             {"layer", layer_},
                             {"d", vec(latent.d[layer_])},
                             {"pca", vec(p)},
                             {"clipped", clipped}}));
  };
  session_.before_fast_tick = [&](long long k, Eigen::VectorXd& torque) {
    drain(conn, k);
    torque = human_->held;
  };
  session_.on_fast_tick = [&](const FastTickRecord& f, const Arm& arm) {
    Json modes = Json::array();
    for (const auto m : f.modes) modes.push_back(mode_name(m));
    send(conn, make_message("state", f.tick,
                            {{"network_tick", f.network_tick},
                             {"theta_hat", vec(f.theta_hat)},
                             {"theta_net", vec(f.theta_net)},
                             {"tau_hat", vec([&] {
                                Eigen::VectorXd v(arm.joints().size());
                                for (std::size_t j = 0; j < arm.joints().size(); ++j) v(j) = arm.joints()[j].tau_hat;
                                return v;
                              }())},
                             {"tau_ext", vec(f.tau_ext)},
                             {"tau_injected", vec(f.tau_injected)},
                             {"tau_ext_sum", f.tau_ext_sum},
                             {"modes", modes}}));
    if (live_.speed > 0) {
      const double sim = static_cast<double>(f.tick + 1 - resume_tick) * tick_seconds / live_.speed;
      std::this_thread::sleep_until(resume + std::chrono::duration_cast<clock::duration>(
                                                 std::chrono::duration<double>(sim)));
    }
  };

  try {
    while (!stop_ && !reader_done_ && !session_.done()) session_.step(*human_);
    if (session_.done()) {
      send(conn, make_message("metrics", session_.network_tick(),
                              {{"network_tick", session_.network_tick()}, {"finished", true}}));
    }
  } catch (const IoError&) {
    // Peer vanished mid-tick; treated as a disconnect.
  }
  session_.on_network_tick = nullptr;
  session_.before_fast_tick = nullptr;
  session_.on_fast_tick = nullptr;
  conn.close();
  reader.join();
  // The human let go: the plant holds its posture until the next client drives it.
  human_->held.setZero();
  std::lock_guard<std::mutex> lock(inbox_mutex_);
  inbox_.clear();
}

void Gateway::run() {
  while (!stop_ && !session_.done()) {
    auto conn = server_.accept(std::chrono::milliseconds(100));
    if (!conn) continue;
    connected_ = true;
    serve(*conn);
    connected_ = false;
  }
}

}  // namespace pvhri
