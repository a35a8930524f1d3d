// Copyright 2026 The snk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <cerrno>
#include <cstdint>
#include <cstring>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include "snk/error.hpp"
#include "snk/labels.hpp"
#include "snk/nn/network.hpp"
#include "snk/rt/protocol.hpp"
#include "snk/rt/session.hpp"

namespace snk::rt {

struct ServeConfig {
  StabilityConfig stability;
  std::vector<ClassLabel> cycle_order = canonical_cycle();
};

inline PredictionMsg to_message(const Prediction& p) {
  PredictionMsg m;
  m.timestamp_ms = static_cast<std::uint64_t>(p.timestamp_ms);
  m.class_index = static_cast<std::uint8_t>(p.top_class.index());
  m.probabilities = p.probabilities;
  m.flags = p.stable ? PredictionMsg::kStableFlag : 0;
  return m;
}

inline CycleMsg to_message(const CycleEvent& e) {
  return {static_cast<std::uint8_t>(e.kind), static_cast<std::uint8_t>(e.step_index),
          static_cast<std::uint8_t>(e.expected.index()), static_cast<std::uint8_t>(e.observed.index())};
}

/// Protocol state machine for one connection, independent of the transport.
/// Bytes in, bytes out; after an ERROR reply the connection is closed and
/// further input is ignored.
class Connection {
 public:
  Connection(const nn::Network<float>& net, const ServeConfig& cfg) : net_(&net), cfg_(cfg) {}

  std::vector<std::uint8_t> on_bytes(std::span<const std::uint8_t> bytes) {
    std::vector<std::uint8_t> out;
    if (closed_) return out;
    decoder_.feed(bytes);
    try {
      while (!closed_) {
        std::optional<Message> msg = decoder_.next();
        if (!msg) break;
        handle(*msg, out);
      }
    } catch (const ProtocolError& e) {
      fail(e.wire_code(), e.detail(), out);
    } catch (const Error& e) {
      WireError code = WireError::kInternal;
      switch (e.code()) {
        case ErrorCode::kOrdering: code = WireError::kOutOfOrder; break;
        case ErrorCode::kInvalidValue: code = WireError::kInvalidValue; break;
        case ErrorCode::kShape: code = WireError::kBadDim; break;
        default: break;
      }
      fail(code, e.detail(), out);
    }
    return out;
  }

  bool closed() const { return closed_; }
  std::size_t predictions_sent() const { return predictions_sent_; }

 private:
  void send(const Message& m, std::vector<std::uint8_t>& out) {
    const auto bytes = encode(m);
    out.insert(out.end(), bytes.begin(), bytes.end());
  }

  void fail(WireError code, std::string message, std::vector<std::uint8_t>& out) {
    if (message.size() > 255) message.resize(255);
    send(ErrorMsg{code, std::move(message)}, out);
    closed_ = true;
  }

  void handle(const Message& msg, std::vector<std::uint8_t>& out) {
    if (const auto* hello = std::get_if<Hello>(&msg)) {
      if (session_) throw ProtocolError(WireError::kUnexpectedMessage, "duplicate HELLO");
      if (hello->version != kProtocolVersion) {
        throw ProtocolError(WireError::kBadVersion, "unsupported protocol version " + std::to_string(hello->version));
      }
      if (hello->dim != net_->input_dim()) {
        throw ProtocolError(WireError::kBadDim, "client dim " + std::to_string(hello->dim) + ", model expects " +
                                                    std::to_string(net_->input_dim()));
      }
      session_.emplace(*net_, cfg_.stability, cfg_.cycle_order);
      send(HelloAck{metrics_names()}, out);
      return;
    }
    if (const auto* frame = std::get_if<FrameMsg>(&msg)) {
      if (!session_) throw ProtocolError(WireError::kUnexpectedMessage, "FRAME before HELLO");
      if (frame->values.size() != kFeatureDim) {
        throw ProtocolError(WireError::kBadDim, "FRAME dim " + std::to_string(frame->values.size()) + ", expected " +
                                                    std::to_string(kFeatureDim));
      }
      if (frame->timestamp_ms > static_cast<std::uint64_t>(INT64_MAX)) {
        throw ProtocolError(WireError::kMalformed, "timestamp out of range");
      }
      Session::Step step =
          session_->process(KeypointFrame{static_cast<std::int64_t>(frame->timestamp_ms), frame->values});
      if (step.prediction) {
        send(to_message(*step.prediction), out);
        ++predictions_sent_;
      }
      if (step.cycle) send(to_message(*step.cycle), out);
      return;
    }
    throw ProtocolError(WireError::kUnexpectedMessage, "clients may only send HELLO and FRAME");
  }

  static std::vector<std::string> metrics_names() { return {kClassNames.begin(), kClassNames.end()}; }

  const nn::Network<float>* net_;
  ServeConfig cfg_;
  StreamDecoder decoder_;
  std::optional<Session> session_;
  bool closed_ = false;
  std::size_t predictions_sent_ = 0;
};

namespace detail {

inline bool write_all(int fd, std::span<const std::uint8_t> bytes) {
  std::size_t done = 0;
  while (done < bytes.size()) {
    // MSG_NOSIGNAL keeps a vanished peer from raising SIGPIPE; stdio is not a socket.
    ssize_t n = ::send(fd, bytes.data() + done, bytes.size() - done, MSG_NOSIGNAL);
    if (n < 0 && errno == ENOTSOCK) n = ::write(fd, bytes.data() + done, bytes.size() - done);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    done += static_cast<std::size_t>(n);
  }
  return true;
}

}  // namespace detail

/// Runs one connection over a pair of file descriptors until EOF, an I/O
/// error, or a protocol error. Used for both sockets and stdio.
inline void serve_fd(int in_fd, int out_fd, const nn::Network<float>& net, const ServeConfig& cfg) {
  Connection conn(net, cfg);
  std::vector<std::uint8_t> buf(1 << 16);
  while (!conn.closed()) {
    const ssize_t n = ::read(in_fd, buf.data(), buf.size());
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    const auto reply = conn.on_bytes({buf.data(), static_cast<std::size_t>(n)});
    if (!reply.empty() && !detail::write_all(out_fd, reply)) break;
  }
}

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

/// Parses "host:port" (host may be empty for all interfaces, or a bare port).
inline Endpoint parse_endpoint(std::string_view addr) {
  Endpoint ep;
  std::string_view port_part = addr;
  if (const auto colon = addr.rfind(':'); colon != std::string_view::npos) {
    ep.host = std::string(addr.substr(0, colon));
    port_part = addr.substr(colon + 1);
    if (ep.host.empty()) ep.host = "0.0.0.0";
  }
  unsigned long port = 0;
  try {
    std::size_t used = 0;
    port = std::stoul(std::string(port_part), &used);
    if (used != port_part.size()) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw Error(ErrorCode::kConfig, "bad listen address '" + std::string(addr) + "', expected host:port");
  }
  if (port > 65535) throw Error(ErrorCode::kConfig, "port out of range in '" + std::string(addr) + "'");
  ep.port = static_cast<std::uint16_t>(port);
  return ep;
}

/// TCP front end. Each accepted connection gets its own thread and Session;
/// the network is shared read-only.
class TcpServer {
 public:
  TcpServer(const nn::Network<float>& net, ServeConfig cfg) : net_(&net), cfg_(std::move(cfg)) {}
  ~TcpServer() { stop(); }

  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  /// Binds and listens; returns the bound port (useful when asking for port 0).
  std::uint16_t listen(const Endpoint& ep) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    const std::string port = std::to_string(ep.port);
    if (int rc = ::getaddrinfo(ep.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
      throw Error(ErrorCode::kIo, "cannot resolve '" + ep.host + "': " + ::gai_strerror(rc));
    }
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, ::freeaddrinfo);
    listen_fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (listen_fd_ < 0) throw Error(ErrorCode::kIo, std::string("socket: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(listen_fd_, res->ai_addr, res->ai_addrlen) != 0 || ::listen(listen_fd_, 16) != 0) {
      const std::string why = std::strerror(errno);
      ::close(listen_fd_);
      listen_fd_ = -1;
      throw Error(ErrorCode::kIo, "cannot listen on " + ep.host + ":" + port + ": " + why);
    }
    sockaddr_storage bound{};
    socklen_t len = sizeof bound;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    if (bound.ss_family == AF_INET6) return ntohs(reinterpret_cast<sockaddr_in6*>(&bound)->sin6_port);
    return ntohs(reinterpret_cast<sockaddr_in*>(&bound)->sin_port);
  }

  /// Accept loop; returns after `stop()` or when `should_stop` reports true.
  void run(const std::function<bool()>& should_stop = {}) {
    while (!stopping_.load()) {
      if (should_stop && should_stop()) break;
      pollfd pfd{listen_fd_, POLLIN, 0};
      const int rc = ::poll(&pfd, 1, 100);
      if (rc <= 0 || !(pfd.revents & POLLIN)) continue;
      const int fd = ::accept(listen_fd_, nullptr, nullptr);
      if (fd < 0) continue;
      std::lock_guard lock(mu_);
      if (stopping_.load()) {
        ::close(fd);
        break;
      }
      client_fds_.insert(fd);
      workers_.emplace_back([this, fd] {
        serve_fd(fd, fd, *net_, cfg_);
        std::lock_guard inner(mu_);
        client_fds_.erase(fd);
        ::shutdown(fd, SHUT_RDWR);
        ::close(fd);
      });
    }
  }

  /// Stops accepting, unblocks live connections and joins their threads.
  void stop() {
    std::vector<std::thread> workers;
    {
      std::lock_guard lock(mu_);
      stopping_.store(true);
      for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
      workers.swap(workers_);
    }
    for (auto& t : workers) t.join();
    if (listen_fd_ >= 0) {
      ::close(listen_fd_);
      listen_fd_ = -1;
    }
  }

 private:
  const nn::Network<float>* net_;
  ServeConfig cfg_;
  int listen_fd_ = -1;
  std::atomic<bool> stopping_{false};
  std::mutex mu_;
  std::set<int> client_fds_;
  std::vector<std::thread> workers_;
};

}  // namespace snk::rt
