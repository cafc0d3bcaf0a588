#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace negprobe {

// Deterministic stand-in for an image-generation endpoint. Accepts
// POST <path> {"prompt": "..."} and answers {"image": "mock://image/<hash>"}
// where the hash depends only on the prompt.
class MockEndpoint {
 public:
  struct Behavior {
    std::string path = "/generate";
    int fail_first = 0;     // failures served per distinct prompt before success
    int fail_status = 500;  // status used for those failures
    bool base64_images = false;
  };

  MockEndpoint();
  explicit MockEndpoint(Behavior behavior);
  ~MockEndpoint();
  MockEndpoint(const MockEndpoint&) = delete;
  MockEndpoint& operator=(const MockEndpoint&) = delete;

  // Binds to host:port (port 0 picks a free one) and serves on a background
  // thread. Returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Blocks serving on the calling thread.
  void serve_forever(const std::string& host, int port);
  void stop();

  std::string url() const;
  std::size_t requests() const noexcept { return requests_.load(); }
  int max_in_flight() const noexcept { return max_in_flight_.load(); }

  static std::string image_for(const std::string& prompt);

 private:
  void install_routes();

  Behavior behavior_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string host_;
  int port_ = 0;
  std::mutex mutex_;
  std::map<std::string, int> seen_;
  std::atomic<std::size_t> requests_{0};
  std::atomic<int> in_flight_{0};
  std::atomic<int> max_in_flight_{0};
};

}  // namespace negprobe
