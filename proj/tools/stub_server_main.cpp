// Serves canned tool responses on 127.0.0.1 for local runs and tests.

#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "rebel/stub_server.hpp"

namespace {
volatile std::sig_atomic_t g_stop = 0;
void on_signal(int) { g_stop = 1; }
}  // namespace

int main(int argc, char** argv) {
  std::string routes_path;
  int port = 0;
  CLI::App app{"Canned HTTP tool server", "rebel_stub_server"};
  app.add_option("routes", routes_path, "Routes file (JSON)")->required();
  app.add_option("--port", port, "Port to bind (0 picks a free one)");
  CLI11_PARSE(app, argc, argv);

  std::ifstream in(routes_path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open " << routes_path << "\n";
    return 2;
  }
  try {
    rebel::StubToolServer server(rebel::load_stub_routes(in));
    server.start(port);
    std::cout << server.base_url() << std::endl;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
