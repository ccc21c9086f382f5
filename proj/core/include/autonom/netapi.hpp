#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>

#include "autonom/node.hpp"

namespace autonom {

class ApiBindError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ApiConfig {
  std::string bind_address = "127.0.0.1";
  int port = 8080;  // 0 picks an ephemeral port, read it back via port()

  // both paths set serves HTTPS, otherwise plain HTTP
  std::string tls_cert_path;
  std::string tls_key_path;

  // wall clock for transaction and block timestamps, injectable for tests
  std::function<std::int64_t()> now_ms;
};

// JSON REST face over one node. Handlers run on the server's worker pool;
// every touch of node state happens under one reader-writer lock, so the
// API cannot reach states the library calls alone cannot.
//
// Mutating endpoints take the caller's private key in the request body
// (never in the query string, to keep keys out of access logs). That is a
// deliberate proof-of-concept trade-off; see the README warning.
class ApiServer {
 public:
  ApiServer(Node& node, ApiConfig config);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  // binds and serves on a background thread; throws ApiBindError when the
  // port is taken or TLS material is unusable
  void start();
  void stop();

  int port() const;
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace autonom
