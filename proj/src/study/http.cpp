#include "xaistudy/study/http.hpp"

#include "httplib.h"
#include "xaistudy/common/error.hpp"

namespace xaistudy::study {

struct HttpServer::Impl {
  httplib::Server server;
};

namespace {

std::string target_of(const httplib::Request& req) {
  if (req.params.empty()) return req.path;
  std::string t = req.path + "?";
  bool first = true;
  for (const auto& [k, v] : req.params) {
    if (!first) t += "&";
    t += k + "=" + v;
    first = false;
  }
  return t;
}

}  // namespace

HttpServer::HttpServer(const ApiRouter& router) : impl_(std::make_unique<Impl>()) {
  const ApiRouter* target = &router;
  auto handler = [target](const httplib::Request& req, httplib::Response& res) {
    const ApiResponse r = target->handle(req.method, target_of(req), req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  impl_->server.set_tcp_nodelay(true);
  impl_->server.Get(R"(/.*)", handler);
  impl_->server.Post(R"(/.*)", handler);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  if (port == 0) {
    port_ = impl_->server.bind_to_any_port(host);
  } else {
    if (!impl_->server.bind_to_port(host, port)) throw Error("io", "cannot bind " + host + ":" + std::to_string(port));
    port_ = port;
  }
  if (port_ <= 0) throw Error("io", "cannot bind " + host);
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port_;
}

void HttpServer::run(const std::string& host, int port) {
  port_ = port;
  if (!impl_->server.listen(host, port)) throw Error("io", "cannot listen on " + host + ":" + std::to_string(port));
}

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

ApiResponse InProcessClient::call(const std::string& method, const std::string& target, const Json& body) {
  return router_.handle(method, target, body.is_null() ? std::string() : body.dump());
}

struct HttpClient::Impl {
  httplib::Client client;
  std::mutex mutex;
  Impl(const std::string& host, int port) : client(host, port) {}
};

HttpClient::HttpClient(std::string host, int port) : impl_(std::make_unique<Impl>(host, port)) {
  impl_->client.set_keep_alive(true);
  impl_->client.set_tcp_nodelay(true);
  impl_->client.set_read_timeout(60, 0);
}

HttpClient::~HttpClient() = default;

ApiResponse HttpClient::call(const std::string& method, const std::string& target, const Json& body) {
  std::lock_guard lock(impl_->mutex);
  httplib::Result res = method == "GET" ? impl_->client.Get(target)
                                        : impl_->client.Post(target, body.is_null() ? "{}" : body.dump(),
                                                             "application/json");
  if (!res) throw Error("io", "HTTP " + method + " " + target + " failed: " + httplib::to_string(res.error()));
  std::string type = res->get_header_value("Content-Type");
  return {res->status, type.empty() ? "application/json" : type, res->body};
}

}  // namespace xaistudy::study
