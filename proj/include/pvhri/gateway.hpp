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

#include <atomic>
#include <deque>
#include <memory>
#include <mutex>
#include <string>

#include "pvhri/analysis.hpp"
#include "pvhri/json.hpp"
#include "pvhri/session.hpp"
#include "pvhri/websocket.hpp"

namespace pvhri {

inline constexpr int kSchemaVersion = 1;

/// {"schema_version", "type", "t", "payload"}.
Json make_message(const std::string& type, long long t, Json payload);

/// A client command after validation. Torque commands are already clamped.
struct Command {
  enum class Kind { kTorque, kIntent } kind = Kind::kTorque;
  Eigen::VectorXd torque;        // full vector form
  int joint = -1;                // single-joint form when >= 0
  double joint_torque = 0;
  Eigen::VectorXd requested;     // before the clamp (full or single element)
  bool clamped = false;
  std::string intent;
};

/// Parses one client message. Unknown fields are ignored; unknown or server-only types,
/// a missing or different schema_version and malformed payloads throw FormatError.
Command parse_command(const std::string& text, int joints, double torque_bound);

struct LiveOptions {
  std::string host = "127.0.0.1";
  int port = 8765;
  double torque_bound = 3.0;  // Nm per joint, announced in the config message
  double speed = 1.0;         // simulated seconds per wall second; 0 runs unpaced
  int latent_layer = -1;      // -1 selects the top layer

  void validate() const;
};

/// Live session endpoint: one client at a time drives the human side with torque_cmd and
/// intent_cmd. The session advances only while a client is connected.
class Gateway {
 public:
  /// Binds immediately; throws IoError when the port is taken.
  Gateway(const TrainerState& checkpoint, const ObserverNet& observer, TrialSpec spec,
          SessionOptions options, LiveOptions live);
  ~Gateway();

  int port() const { return server_.port(); }
  /// Serves until the session has run spec.steps network ticks or stop() is called.
  void run();
  void stop() { stop_ = true; }

  long long network_tick() const { return network_tick_; }
  bool connected() const { return connected_; }
  const TrialRecord& record() const { return session_.record(); }
  Json config_payload() const;

 private:
  class LiveHuman;
  void serve(ws::Connection& conn);
  void drain(ws::Connection& conn, long long fast_tick);
  void send(ws::Connection& conn, const Json& message);
  Eigen::Vector2d project(const Eigen::VectorXd& d, bool& clipped) const;

  TrialSpec spec_;
  SessionOptions options_;
  LiveOptions live_;
  Session session_;
  ws::Server server_;
  std::unique_ptr<LiveHuman> human_;
  Pca2Result pca_;
  int layer_ = 0;
  Eigen::Vector2d lo_, hi_;

  std::mutex inbox_mutex_;
  std::deque<std::string> inbox_;
  std::atomic<bool> reader_done_{false};
  std::atomic<bool> stop_{false};
  std::atomic<bool> connected_{false};
  std::atomic<long long> network_tick_{0};
};

}  // namespace pvhri
