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


#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <fstream>
#include <optional>
#include <set>
#include <thread>

#include "fixtures.hpp"
#include "pvhri/gateway.hpp"
#include "pvhri/io.hpp"

using namespace pvhri;
using namespace pvhri::testing;
using namespace std::chrono_literals;

namespace {

const std::string kSource = PVHRI_SOURCE_DIR;

std::string msg(const std::string& type, const Json& payload) {
  return make_message(type, 0, payload).dump();
}

LiveOptions unpaced() {
  LiveOptions l;
  l.port = 0;
  l.speed = 0;
  return l;
}

// Runs a gateway in the background for the lifetime of the object.
struct Running {
  Gateway gateway;
  std::thread thread;

  Running(const std::string& profile, TrialSpec spec, LiveOptions live)
      : gateway(small_agent(profile), small_observer(), std::move(spec), small_session_options(),
                live),
        thread([this] { gateway.run(); }) {}
  ~Running() {
    gateway.stop();
    thread.join();
  }
};

std::optional<Json> next(ws::Connection& c, std::chrono::milliseconds timeout = 5000ms) {
  bool timed_out = false;
  const auto text = c.receive_for(timeout, timed_out);
  if (!text) return std::nullopt;
  return Json::parse(*text);
}

// Reads until a message satisfies `stop`; returns everything read.
template <typename Pred>
std::vector<Json> read_until(ws::Connection& c, Pred stop) {
  std::vector<Json> out;
  while (auto m = next(c)) {
    out.push_back(*m);
    if (stop(*m)) break;
  }
  return out;
}

bool finished(const Json& m) {
  return m["type"] == "metrics" && m["payload"].value("finished", false);
}

}  // namespace

TEST_CASE("handshake accept key") {
  CHECK(ws::accept_key("dGhlIHNhbXBsZSBub25jZQ==") == "s3pPLMBiTxaQ9kYGzzhZRbK+xOo=");
}

TEST_CASE("command parsing") {
  const auto full = parse_command(msg("torque_cmd", {{"torque", {0.5, -4.0, 0, 0, 0, 1}}}), 6, 3.0);
  CHECK(full.kind == Command::Kind::kTorque);
  CHECK(full.clamped);
  CHECK(full.torque(1) == -3.0);
  CHECK(full.requested(1) == -4.0);
  CHECK(full.torque(0) == 0.5);
  CHECK(full.joint == -1);

  const auto one = parse_command(msg("torque_cmd", {{"joint", 2}, {"torque", 1.25}}), 6, 3.0);
  CHECK(one.joint == 2);
  CHECK(one.joint_torque == 1.25);
  CHECK_FALSE(one.clamped);

  const auto intent = parse_command(msg("intent_cmd", {{"intent", "C"}}), 6, 3.0);
  CHECK(intent.kind == Command::Kind::kIntent);
  CHECK(intent.intent == "C");

  // every torque that comes out is within the bound
  for (double v : {-100.0, -3.0, -2.9, 0.0, 2.99, 3.0, 3.01, 1e9}) {
    const auto c = parse_command(msg("torque_cmd", {{"joint", 0}, {"torque", v}}), 6, 3.0);
    CHECK(std::abs(c.joint_torque) <= 3.0);
    CHECK(c.clamped == (std::abs(v) > 3.0));
  }
}

TEST_CASE("command parsing errors") {
  const std::vector<std::string> bad = {
      "{",
      "[1]",
      R"({"type": "torque_cmd", "payload": {"torque": [0,0,0,0,0,0]}})",
      R"({"schema_version": 2, "type": "torque_cmd", "payload": {"torque": [0,0,0,0,0,0]}})",
      R"({"schema_version": "1", "type": "torque_cmd", "payload": {}})",
      msg("state", Json::object()),
      msg("hello", Json::object()),
      msg("dance", Json::object()),
      make_message("torque_cmd", 0, nullptr).dump(),
      msg("torque_cmd", Json::object()),
      msg("torque_cmd", {{"torque", {1, 2}}}),
      msg("torque_cmd", {{"torque", {1, 2, 3, 4, 5, "x"}}}),
      msg("torque_cmd", {{"torque", "big"}}),
      msg("torque_cmd", {{"joint", 6}, {"torque", 1}}),
      msg("torque_cmd", {{"joint", -1}, {"torque", 1}}),
      msg("torque_cmd", {{"joint", 1.5}, {"torque", 1}}),
      msg("intent_cmd", {{"intent", "D"}}),
      msg("intent_cmd", {{"intent", 1}}),
      msg("intent_cmd", Json::object()),
  };
  for (const auto& text : bad) {
    CAPTURE(text);
    CHECK_THROWS_AS(parse_command(text, 6, 3.0), FormatError);
  }
}

TEST_CASE("live options validation") {
  LiveOptions l;
  l.validate();
  l.port = 70000;
  CHECK_THROWS_AS(l.validate(), ValidationError);
  l = {};
  l.torque_bound = 0;
  CHECK_THROWS_AS(l.validate(), ValidationError);
  l = {};
  l.speed = -1;
  CHECK_THROWS_AS(l.validate(), ValidationError);
}

TEST_CASE("a second gateway on the same port fails to bind") {
  Gateway first(small_agent("rigid"), small_observer(), small_spec("rigid", "B", "A", 30),
                small_session_options(), unpaced());
  LiveOptions same = unpaced();
  same.port = first.port();
  CHECK_THROWS_AS(Gateway(small_agent("rigid"), small_observer(), small_spec("rigid", "B", "A", 30),
                          small_session_options(), same),
                  IoError);
}

TEST_CASE("plain HTTP requests are refused") {
  ws::Server server(0);
  std::string reply;
  std::thread client([&] {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(server.port()));
    ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
    const std::string req = "GET / HTTP/1.1\r\nHost: localhost\r\n\r\n";
    CHECK(::send(fd, req.data(), req.size(), 0) == static_cast<ssize_t>(req.size()));
    char buf[256];
    ssize_t n;
    while ((n = ::recv(fd, buf, sizeof buf, 0)) > 0) reply.append(buf, static_cast<std::size_t>(n));
    ::close(fd);
  });
  CHECK(server.accept(2000ms) == nullptr);
  client.join();
  CHECK(reply.rfind("HTTP/1.1 400", 0) == 0);
}

TEST_CASE("session over the socket") {
  Running live("moderate", small_spec("moderate", "B", "A", 30), unpaced());
  auto conn = ws::connect("127.0.0.1", live.gateway.port());

  const auto hello = next(*conn);
  REQUIRE(hello);
  CHECK((*hello)["type"] == "hello");
  CHECK((*hello)["schema_version"] == kSchemaVersion);
  const auto config = next(*conn);
  REQUIRE(config);
  CHECK((*config)["type"] == "config");
  const auto& cp = (*config)["payload"];
  CHECK(cp["joints"] == 6);
  CHECK(cp["torque_bound"] == 3.0);
  CHECK(cp["robot_intent"] == "B");
  CHECK(cp["pca"]["axes"]["rows"] == 6);
  CHECK(cp["pca"]["layer"] == 1);

  conn->send_text(msg("torque_cmd", {{"torque", {10.0, 0.5, 0, 0, 0, -1}}}));
  conn->send_text("this is not json");
  conn->send_text(msg("torque_cmd", {{"joint", 5}, {"torque", -7.0}}));

  const auto all = read_until(*conn, finished);
  REQUIRE(!all.empty());
  CHECK(finished(all.back()));

  std::vector<Json> acks, errors, states, metrics, latents;
  for (const auto& m : all) {
    CHECK(m["schema_version"] == kSchemaVersion);
    const std::string type = m["type"];
    if (type == "torque_cmd") acks.push_back(m);
    if (type == "error") errors.push_back(m);
    if (type == "state") states.push_back(m);
    if (type == "metrics" && !finished(m)) metrics.push_back(m);
    if (type == "latent") latents.push_back(m);
  }
  REQUIRE(acks.size() == 2);
  REQUIRE(errors.size() == 1);
  CHECK(errors[0]["payload"]["message"].get<std::string>().find("malformed") != std::string::npos);
  CHECK(states.size() == 375);
  CHECK(metrics.size() == 30);
  CHECK(latents.size() == 30);

  // first ack: full vector, clamped to the announced bound, visible in that tick's state
  const auto& a0 = acks[0]["payload"];
  CHECK(a0["clamped"] == true);
  CHECK(a0["bound"] == 3.0);
  CHECK(a0["torque"][0] == 3.0);
  CHECK(a0["requested"][0] == 10.0);
  const long long k0 = a0["applied_at"];
  CHECK(acks[0]["t"] == k0);
  const long long k1 = acks[1]["payload"]["applied_at"];
  const auto& s0 = states.at(k0)["payload"];
  CHECK(states.at(k0)["t"] == k0);
  if (k1 > k0) CHECK(s0["tau_injected"] == a0["torque"]);
  // estimate equals injection on the deterministic plant
  for (int j = 0; j < 6; ++j) {
    CHECK(s0["tau_ext"][j].get<double>() == doctest::Approx(s0["tau_injected"][j].get<double>()));
  }

  const auto& a1 = acks[1]["payload"];
  CHECK(a1["joint"] == 5);
  CHECK(a1["torque"] == -3.0);
  CHECK(k1 >= k0);
  const auto& s1 = states.at(k1)["payload"];
  CHECK(s1["tau_injected"][5] == -3.0);
  CHECK(s1["tau_injected"][0] == 3.0);  // joint form keeps the other joints
  CHECK(states.back()["payload"]["tau_injected"][5] == -3.0);  // held until changed

  for (const auto& l : latents) {
    CHECK(l["payload"]["d"].size() == 6);
    CHECK(l["payload"]["pca"].size() == 2);
  }
  CHECK(metrics[0]["payload"]["intent"] == "B");
  CHECK(live.gateway.record().network.size() == 30);
}

TEST_CASE("intent command switches the published intent") {
  Running live("moderate", small_spec("moderate", "B", "A", 40), unpaced());
  auto conn = ws::connect("127.0.0.1", live.gateway.port());
  const auto first = read_until(*conn, [](const Json& m) {
    return m["type"] == "metrics" && m["payload"]["network_tick"] == 22;
  });
  CHECK(first.back()["payload"]["intent_label"] == "B");
  conn->send_text(msg("intent_cmd", {{"intent", "A"}}));
  const auto rest = read_until(*conn, finished);
  long long switched_at = -1;
  bool next_checked = false;
  for (const auto& m : rest) {
    if (m["type"] == "intent_cmd") {
      CHECK(m["payload"]["intent"] == "A");
      switched_at = m["payload"]["network_tick"];
    }
    if (switched_at >= 0 && !next_checked && m["type"] == "metrics" && !finished(m)) {
      CHECK(m["payload"]["network_tick"] == switched_at);
      CHECK(m["payload"]["intent"] == "A");
      CHECK(m["payload"]["intent_label"] == "A");
      next_checked = true;
    }
  }
  CHECK(switched_at > 22);
  CHECK(next_checked);
}

TEST_CASE("without commands the live session equals a trial with a passive partner") {
  const auto spec = small_spec("rigid", "C", "A", 25);
  Running live("rigid", spec, unpaced());
  {
    auto conn = ws::connect("127.0.0.1", live.gateway.port());
    read_until(*conn, finished);
  }
  auto options = small_session_options();
  options.surrogate.gain = 0;
  const auto offline = run_trial(spec, small_agent("rigid"), small_observer(), options);
  const auto& online = live.gateway.record();
  REQUIRE(online.fast.size() == offline.fast.size());
  for (std::size_t k = 0; k < offline.fast.size(); ++k) {
    CHECK(online.fast[k].theta_hat == offline.fast[k].theta_hat);
  }
  for (std::size_t n = 0; n < offline.network.size(); ++n) {
    CHECK(online.network[n].theta_net == offline.network[n].theta_net);
  }
}

TEST_CASE("disconnect pauses the session and a new client resumes it") {
  LiveOptions paced = unpaced();
  paced.speed = 20;  // 1000 fast ticks per wall second
  Running live("flexible", small_spec("flexible", "A", "B", 40), paced);
  {
    auto conn = ws::connect("127.0.0.1", live.gateway.port());
    conn->send_text(msg("torque_cmd", {{"joint", 0}, {"torque", 2.0}}));
    read_until(*conn, [](const Json& m) {
      return m["type"] == "metrics" && m["payload"]["network_tick"] == 5;
    });
  }
  for (int i = 0; i < 100 && live.gateway.connected(); ++i) std::this_thread::sleep_for(10ms);
  CHECK_FALSE(live.gateway.connected());
  const long long paused = live.gateway.network_tick();
  std::this_thread::sleep_for(300ms);
  CHECK(live.gateway.network_tick() == paused);
  CHECK(paused < 40);

  auto again = ws::connect("127.0.0.1", live.gateway.port());
  const auto rest = read_until(*again, finished);
  REQUIRE(rest.size() > 2);
  CHECK(rest[0]["type"] == "hello");
  CHECK(rest[1]["type"] == "config");
  CHECK(finished(rest.back()));
  for (const auto& m : rest) {
    // the torque held by the first client was released
    if (m["type"] == "state") CHECK(m["payload"]["tau_injected"][0] == 0.0);
  }
  CHECK(live.gateway.record().network.size() == 40);
}

TEST_CASE("messages carry the keys the schema requires") {
  std::ifstream in(kSource + "/schema/session_message.schema.json");
  REQUIRE(in);
  const Json schema = Json::parse(in);
  const auto& defs = schema.at("$defs");
  for (const auto& type : schema.at("properties").at("type").at("enum")) CHECK(defs.contains(type));

  Running live("moderate", small_spec("moderate", "A", "C", 25), unpaced());
  auto conn = ws::connect("127.0.0.1", live.gateway.port());
  conn->send_text(msg("torque_cmd", {{"joint", 1}, {"torque", 0.5}}));
  conn->send_text(msg("intent_cmd", {{"intent", "B"}}));
  conn->send_text(msg("nope", Json::object()));
  const auto all = read_until(*conn, finished);
  std::set<std::string> seen;
  for (const auto& m : all) {
    for (const auto& key : schema.at("required")) CHECK(m.contains(key));
    const std::string type = m["type"];
    seen.insert(type);
    REQUIRE(defs.contains(type));
    const auto& def = defs.at(type);
    if (def.contains("required") && !finished(m)) {
      for (const auto& key : def.at("required")) {
        CAPTURE(type);
        CAPTURE(key);
        CHECK(m["payload"].contains(key));
      }
    }
  }
  CHECK(seen == std::set<std::string>{"hello", "config", "state", "latent", "metrics",
                                      "torque_cmd", "intent_cmd", "error"});
}
