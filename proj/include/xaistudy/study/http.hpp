#pragma once

#include <memory>
#include <string>
#include <thread>

#include "xaistudy/study/api.hpp"

namespace xaistudy::study {

// Serves an ApiRouter over HTTP on a background thread.
class HttpServer {
 public:
  explicit HttpServer(const ApiRouter& router);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Returns the bound port.
  int start(const std::string& host, int port);
  // Blocks the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();
  int port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  int port_ = 0;
};

// What simulated participants and tools talk to.
class ApiClient {
 public:
  virtual ~ApiClient() = default;
  virtual ApiResponse call(const std::string& method, const std::string& target, const Json& body) = 0;
  ApiResponse get(const std::string& target) { return call("GET", target, Json()); }
  ApiResponse post(const std::string& target, const Json& body) { return call("POST", target, body); }
};

class InProcessClient final : public ApiClient {
 public:
  explicit InProcessClient(const ApiRouter& router) : router_(router) {}
  ApiResponse call(const std::string& method, const std::string& target, const Json& body) override;

 private:
  const ApiRouter& router_;
};

class HttpClient final : public ApiClient {
 public:
  HttpClient(std::string host, int port);
  ~HttpClient() override;
  ApiResponse call(const std::string& method, const std::string& target, const Json& body) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace xaistudy::study
