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

#include <cerrno>
#include <cstdint>
#include <cstring>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include "snk/error.hpp"
#include "snk/rt/protocol.hpp"
#include "snk/rt/server.hpp"

namespace snk::rt {

/// Blocking client over any stream file descriptor (socket or pipe pair).
class Client {
 public:
  Client(int read_fd, int write_fd, bool owns) : read_fd_(read_fd), write_fd_(write_fd), owns_(owns) {}

  static Client connect(const Endpoint& ep) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string port = std::to_string(ep.port);
    if (int rc = ::getaddrinfo(ep.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
      throw Error(ErrorCode::kIo, "cannot resolve '" + ep.host + "': " + ::gai_strerror(rc));
    }
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, ::freeaddrinfo);
    const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd < 0 || ::connect(fd, res->ai_addr, res->ai_addrlen) != 0) {
      const std::string why = std::strerror(errno);
      if (fd >= 0) ::close(fd);
      throw Error(ErrorCode::kIo, "cannot connect to " + ep.host + ":" + port + ": " + why);
    }
    return Client(fd, fd, true);
  }

  Client(Client&& o) noexcept
      : read_fd_(std::exchange(o.read_fd_, -1)),
        write_fd_(std::exchange(o.write_fd_, -1)),
        owns_(o.owns_),
        decoder_(std::move(o.decoder_)) {}
  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;
  Client& operator=(Client&&) = delete;

  ~Client() { close(); }

  void send(const Message& m) {
    if (!detail::write_all(write_fd_, encode(m))) throw Error(ErrorCode::kIo, "send failed");
  }

  /// Next message from the peer, or nothing once the peer has closed.
  std::optional<Message> receive() {
    std::uint8_t buf[1 << 14];
    while (true) {
      if (auto m = decoder_.next()) return m;
      const ssize_t n = ::read(read_fd_, buf, sizeof buf);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) return std::nullopt;
      decoder_.feed({buf, static_cast<std::size_t>(n)});
    }
  }

  /// Half-closes the sending side so the server sees EOF.
  void finish_sending() {
    if (read_fd_ == write_fd_) {
      ::shutdown(write_fd_, SHUT_WR);
    } else if (owns_ && write_fd_ >= 0) {
      ::close(write_fd_);
      write_fd_ = -1;
    }
  }

  void close() {
    if (!owns_) return;
    if (read_fd_ >= 0) ::close(read_fd_);
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
    read_fd_ = write_fd_ = -1;
  }

 private:
  int read_fd_;
  int write_fd_;
  bool owns_;
  StreamDecoder decoder_;
};

}  // namespace snk::rt
