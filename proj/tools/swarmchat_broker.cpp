#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "signals.hpp"
#include "swarmchat/bus.hpp"
#include "swarmchat/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"swarmchat topic broker"};
  std::string bind = "127.0.0.1:7447";
  std::string level = "info";
  app.add_option("--bind", bind, "host:port to listen on");
  app.add_option("--log-level", level, "trace, debug, info, warn, error");
  CLI11_PARSE(app, argc, argv);

  spdlog::set_level(spdlog::level::from_str(level));
  try {
    swarmchat::Broker broker(swarmchat::parse_endpoint(bind));
    broker.start();
    spdlog::info("broker listening on port {}", broker.port());
    swarmchat::tools::wait_for_signal();
    broker.stop();
  } catch (const swarmchat::Error& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
