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

#include "pvhri/websocket.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <openssl/sha.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <cstring>
#include <random>
#include <sstream>
#include <vector>

#include "pvhri/error.hpp"

namespace pvhri::ws {
namespace {

constexpr const char* kGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
constexpr std::size_t kMaxMessage = 1 << 20;

std::string base64(const unsigned char* data, std::size_t n) {
  static constexpr char kAlphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  for (std::size_t i = 0; i < n; i += 3) {
    const unsigned v = (data[i] << 16) | ((i + 1 < n ? data[i + 1] : 0) << 8) |
                       (i + 2 < n ? data[i + 2] : 0);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += i + 1 < n ? kAlphabet[(v >> 6) & 63] : '=';
    out += i + 2 < n ? kAlphabet[v & 63] : '=';
  }
  return out;
}

std::string errno_text() { return std::strerror(errno); }

void write_all(int fd, const char* data, std::size_t n) {
  while (n > 0) {
    const ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw IoError("socket write failed: " + errno_text());
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
}

bool wait_readable(int fd, std::chrono::milliseconds timeout) {
  pollfd p{fd, POLLIN, 0};
  for (;;) {
    const int r = ::poll(&p, 1, static_cast<int>(timeout.count()));
    if (r < 0 && errno == EINTR) continue;
    if (r < 0) throw IoError("poll failed: " + errno_text());
    return r > 0;
  }
}

// Reads an HTTP header block up to the blank line.
std::string read_http_head(int fd) {
  std::string head;
  char c;
  while (head.size() < 8192) {
    if (!wait_readable(fd, std::chrono::milliseconds(5000))) return {};
    const ssize_t r = ::recv(fd, &c, 1, 0);
    if (r <= 0) return {};
    head += c;
    if (head.size() >= 4 && head.compare(head.size() - 4, 4, "\r\n\r\n") == 0) return head;
  }
  return {};
}

std::string header_value(const std::string& head, const std::string& name) {
  std::istringstream is(head);
  std::string line;
  while (std::getline(is, line)) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string key = line.substr(0, colon);
    std::transform(key.begin(), key.end(), key.begin(), ::tolower);
    if (key != name) continue;
    std::string value = line.substr(colon + 1);
    value.erase(0, value.find_first_not_of(" \t"));
    value.erase(value.find_last_not_of(" \t\r") + 1);
    return value;
  }
  return {};
}

}  // namespace

std::string accept_key(const std::string& client_key) {
  const std::string s = client_key + kGuid;
  std::array<unsigned char, SHA_DIGEST_LENGTH> digest{};
  SHA1(reinterpret_cast<const unsigned char*>(s.data()), s.size(), digest.data());
  return base64(digest.data(), digest.size());
}

Connection::Connection(int fd, bool client_side) : fd_(fd), client_side_(client_side) {
  const int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

Connection::~Connection() {
  if (fd_ >= 0) ::close(fd_);
}

void Connection::close() {
  if (!open_) return;
  try {
    send_frame(0x8, std::string());
  } catch (const IoError&) {
  }
  open_ = false;
  ::shutdown(fd_, SHUT_RDWR);
}

void Connection::send_text(const std::string& text) {
  if (!open_) throw IoError("websocket closed");
  send_frame(0x1, text);
}

void Connection::send_frame(unsigned char opcode, const std::string& payload) {
  std::string frame;
  frame += static_cast<char>(0x80 | opcode);
  const unsigned char mask_bit = client_side_ ? 0x80 : 0x00;
  const std::size_t n = payload.size();
  if (n < 126) {
    frame += static_cast<char>(mask_bit | n);
  } else if (n <= 0xFFFF) {
    frame += static_cast<char>(mask_bit | 126);
    frame += static_cast<char>((n >> 8) & 0xFF);
    frame += static_cast<char>(n & 0xFF);
  } else {
    frame += static_cast<char>(mask_bit | 127);
    for (int i = 7; i >= 0; --i) frame += static_cast<char>((static_cast<std::uint64_t>(n) >> (8 * i)) & 0xFF);
  }
  if (client_side_) {
    static thread_local std::mt19937 rng(std::random_device{}());
    std::array<unsigned char, 4> mask{};
    for (auto& m : mask) m = static_cast<unsigned char>(rng());
    frame.append(reinterpret_cast<const char*>(mask.data()), 4);
    for (std::size_t i = 0; i < n; ++i) frame += static_cast<char>(payload[i] ^ mask[i % 4]);
  } else {
    frame += payload;
  }
  std::lock_guard<std::mutex> lock(write_mutex_);
  write_all(fd_, frame.data(), frame.size());
}

bool Connection::read_exact(void* buf, std::size_t n) {
  auto* p = static_cast<char*>(buf);
  while (n > 0) {
    const ssize_t r = ::recv(fd_, p, n, 0);
    if (r == 0) return false;
    if (r < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    p += r;
    n -= static_cast<std::size_t>(r);
  }
  return true;
}

std::optional<std::string> Connection::receive() {
  bool timed_out = false;
  return receive_for(std::chrono::milliseconds(-1), timed_out);
}

std::optional<std::string> Connection::receive_for(std::chrono::milliseconds timeout,
                                                   bool& timed_out) {
  timed_out = false;
  std::string message;
  bool in_message = false;
  while (open_) {
    if (timeout.count() >= 0 && !in_message && !wait_readable(fd_, timeout)) {
      timed_out = true;
      return std::nullopt;
    }
    unsigned char h[2];
    if (!read_exact(h, 2)) break;
    const bool fin = h[0] & 0x80;
    const unsigned char opcode = h[0] & 0x0F;
    const bool masked = h[1] & 0x80;
    std::uint64_t n = h[1] & 0x7F;
    if (n == 126) {
      unsigned char e[2];
      if (!read_exact(e, 2)) break;
      n = (static_cast<std::uint64_t>(e[0]) << 8) | e[1];
    } else if (n == 127) {
      unsigned char e[8];
      if (!read_exact(e, 8)) break;
      n = 0;
      for (unsigned char b : e) n = (n << 8) | b;
    }
    if (n > kMaxMessage || message.size() + n > kMaxMessage) {
      throw IoError("websocket message larger than " + std::to_string(kMaxMessage) + " bytes");
    }
    if (!client_side_ && !masked) throw IoError("websocket client frame without mask");
    std::array<unsigned char, 4> mask{};
    if (masked && !read_exact(mask.data(), 4)) break;
    std::string payload(static_cast<std::size_t>(n), '\0');
    if (n > 0 && !read_exact(payload.data(), payload.size())) break;
    if (masked) {
      for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<char>(payload[i] ^ mask[i % 4]);
    }
    switch (opcode) {
      case 0x8:  // close
        if (open_) {
          try {
            send_frame(0x8, std::string());
          } catch (const IoError&) {
          }
        }
        open_ = false;
        return std::nullopt;
      case 0x9:  // ping
        send_frame(0xA, payload);
        continue;
      case 0xA:  // pong
        continue;
      case 0x1:
      case 0x2:
        if (in_message) throw IoError("websocket frame interleaved with a fragmented message");
        message = std::move(payload);
        in_message = true;
        break;
      case 0x0:
        if (!in_message) throw IoError("websocket continuation without a message");
        message += payload;
        break;
      default:
        throw IoError("websocket opcode " + std::to_string(opcode) + " not supported");
    }
    if (fin) return message;
  }
  open_ = false;
  return std::nullopt;
}

Server::Server(int port, const std::string& host) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw IoError("socket: " + errno_text());
  const int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    throw IoError("invalid listen address '" + host + "'");
  }
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(fd_, 4) < 0) {
    const std::string msg = errno_text();
    ::close(fd_);
    throw IoError("cannot listen on " + host + ":" + std::to_string(port) + ": " + msg);
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

Server::~Server() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<Connection> Server::accept(std::chrono::milliseconds timeout) {
  if (!wait_readable(fd_, timeout)) return nullptr;
  const int fd = ::accept(fd_, nullptr, nullptr);
  if (fd < 0) return nullptr;
  const std::string head = read_http_head(fd);
  const std::string key = header_value(head, "sec-websocket-key");
  std::string upgrade = header_value(head, "upgrade");
  std::transform(upgrade.begin(), upgrade.end(), upgrade.begin(), ::tolower);
  if (head.rfind("GET ", 0) != 0 || key.empty() || upgrade != "websocket") {
    const std::string reply =
        "HTTP/1.1 400 Bad Request\r\nContent-Length: 0\r\nConnection: close\r\n\r\n";
    try {
      write_all(fd, reply.data(), reply.size());
    } catch (const IoError&) {
    }
    ::close(fd);
    return nullptr;
  }
  const std::string reply = "HTTP/1.1 101 Switching Protocols\r\nUpgrade: websocket\r\n"
                            "Connection: Upgrade\r\nSec-WebSocket-Accept: " +
                            accept_key(key) + "\r\n\r\n";
  write_all(fd, reply.data(), reply.size());
  return std::make_unique<Connection>(fd, false);
}

std::unique_ptr<Connection> connect(const std::string& host, int port, const std::string& path) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw IoError("socket: " + errno_text());
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1 ||
      ::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
    const std::string msg = errno_text();
    ::close(fd);
    throw IoError("cannot connect to " + host + ":" + std::to_string(port) + ": " + msg);
  }
  std::array<unsigned char, 16> nonce{};
  std::random_device rd;
  for (auto& b : nonce) b = static_cast<unsigned char>(rd());
  const std::string key = base64(nonce.data(), nonce.size());
  const std::string request = "GET " + path + " HTTP/1.1\r\nHost: " + host + ":" + std::to_string(port) +
                              "\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
                              "Sec-WebSocket-Key: " + key + "\r\nSec-WebSocket-Version: 13\r\n\r\n";
  write_all(fd, request.data(), request.size());
  const std::string head = read_http_head(fd);
  if (head.rfind("HTTP/1.1 101", 0) != 0 || header_value(head, "sec-websocket-accept") != accept_key(key)) {
    ::close(fd);
    throw IoError("websocket handshake with " + host + ":" + std::to_string(port) + " failed");
  }
  return std::make_unique<Connection>(fd, true);
}

}  // namespace pvhri::ws
