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

// Minimal RFC 6455 endpoint: text frames, ping/pong, close. One thread may call
// receive() while another calls send_text().

#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace pvhri::ws {

/// Sec-WebSocket-Accept value for a client key.
std::string accept_key(const std::string& client_key);

class Connection {
 public:
  Connection(int fd, bool client_side);
  ~Connection();
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;

  /// Throws IoError when the peer is gone.
  void send_text(const std::string& text);
  /// Next complete text message; nullopt after a close frame or EOF. Control frames are
  /// handled internally. Throws IoError on protocol violations.
  std::optional<std::string> receive();
  /// Like receive() but gives up after `timeout` with no bytes; sets timed_out.
  std::optional<std::string> receive_for(std::chrono::milliseconds timeout, bool& timed_out);
  void close();
  bool open() const { return open_; }

 private:
  void send_frame(unsigned char opcode, const std::string& payload);
  bool read_exact(void* buf, std::size_t n);

  int fd_;
  bool client_side_;
  bool open_ = true;
  std::mutex write_mutex_;
};

class Server {
 public:
  /// Binds and listens; port 0 picks a free port. Throws IoError if the address is in use.
  explicit Server(int port, const std::string& host = "127.0.0.1");
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  int port() const { return port_; }
  /// Waits up to `timeout` for a client and completes the upgrade handshake. Returns
  /// nullptr on timeout. A client that fails the handshake gets HTTP 400 and nullptr.
  std::unique_ptr<Connection> accept(std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
  int port_ = 0;
};

/// Client side of the handshake, used by tests and tools.
std::unique_ptr<Connection> connect(const std::string& host, int port, const std::string& path = "/");

}  // namespace pvhri::ws
