#include "negprobe/mock_endpoint.hpp"

#include <httplib.h>

#include <cstdio>

#include <json.hpp>

#include "negprobe/error.hpp"

namespace negprobe {
namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

MockEndpoint::MockEndpoint() : MockEndpoint(Behavior{}) {}

MockEndpoint::MockEndpoint(Behavior behavior)
    : behavior_(std::move(behavior)), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

MockEndpoint::~MockEndpoint() { stop(); }

std::string MockEndpoint::image_for(const std::string& prompt) {
  return "mock://image/" + hex64(fnv1a(prompt));
}

void MockEndpoint::install_routes() {
  server_->Post(behavior_.path, [this](const httplib::Request& req, httplib::Response& res) {
    ++requests_;
    int now = ++in_flight_;
    int prev = max_in_flight_.load();
    while (now > prev && !max_in_flight_.compare_exchange_weak(prev, now)) {
    }
    struct Leave {
      std::atomic<int>& n;
      ~Leave() { --n; }
    } leave{in_flight_};
    // Hold the request briefly so concurrent clients overlap observably.
    std::this_thread::sleep_for(std::chrono::milliseconds(20));

    std::string prompt;
    try {
      prompt = nlohmann::json::parse(req.body).at("prompt").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      res.status = 400;
      res.set_content(R"({"error":"expected {\"prompt\": string}"})", "application/json");
      return;
    }
    int seen;
    {
      std::lock_guard lock(mutex_);
      seen = seen_[prompt]++;
    }
    if (seen < behavior_.fail_first) {
      res.status = behavior_.fail_status;
      res.set_content(R"({"error":"scripted failure"})", "application/json");
      return;
    }
    std::string image = image_for(prompt);
    if (behavior_.base64_images) image = httplib::detail::base64_encode(image);
    res.status = 200;
    res.set_content(nlohmann::json{{"image", image}}.dump(), "application/json");
  });
}

int MockEndpoint::start(const std::string& host, int port) {
  host_ = host;
  port_ = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (port_ < 0) throw Error("mock endpoint cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void MockEndpoint::serve_forever(const std::string& host, int port) {
  host_ = host;
  port_ = port;
  if (!server_->listen(host, port)) {
    throw Error("mock endpoint cannot listen on " + host + ":" + std::to_string(port));
  }
}

void MockEndpoint::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockEndpoint::url() const {
  return "http://" + host_ + ":" + std::to_string(port_) + behavior_.path;
}

}  // namespace negprobe
