#include <CLI11.hpp>

#include <iostream>

#include "negprobe/mock_endpoint.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Deterministic image-generation endpoint for campaign tests",
               "negprobe-mock-endpoint"};
  std::string host = "127.0.0.1";
  int port = 8089;
  negprobe::MockEndpoint::Behavior behavior;
  app.add_option("--host", host)->capture_default_str();
  app.add_option("--port", port)->capture_default_str();
  app.add_option("--path", behavior.path)->capture_default_str();
  app.add_option("--fail-first", behavior.fail_first, "Failures per distinct prompt before success")
      ->capture_default_str();
  app.add_option("--fail-status", behavior.fail_status)->capture_default_str();
  app.add_flag("--base64", behavior.base64_images, "Return base64 image payloads");
  CLI11_PARSE(app, argc, argv);

  try {
    negprobe::MockEndpoint endpoint(behavior);
    std::cout << "listening on http://" << host << ":" << port << behavior.path << std::endl;
    endpoint.serve_forever(host, port);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
