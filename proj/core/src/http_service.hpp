// Copyright 2026 The textact Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <thread>

#include <httplib.h>

namespace textact::detail {

/// httplib::Server plus the thread that drives it.
class HttpService {
 public:
  HttpService() = default;
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;
  ~HttpService() { stop(); }

  httplib::Server& server() noexcept { return server_; }

  int bind(const std::string& host, int port) {
    if (port == 0) {
      port_ = server_.bind_to_any_port(host);
    } else {
      port_ = server_.bind_to_port(host, port) ? port : -1;
    }
    if (port_ < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    host_ = host;
    return port_;
  }

  void start() {
    if (port_ < 0) throw std::logic_error("bind() before start()");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
  }

  void run() {
    if (port_ < 0) throw std::logic_error("bind() before run()");
    server_.listen_after_bind();
  }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  const std::string& host() const noexcept { return host_; }
  int port() const noexcept { return port_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  std::string host_;
  int port_ = -1;
};

inline void send(httplib::Response& res, int status, const std::string& body) {
  res.status = status;
  res.set_content(body, "application/json");
}

}  // namespace textact::detail
