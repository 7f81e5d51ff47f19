#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <sstream>

#include "signals.hpp"
#include "swarmchat/config.hpp"
#include "swarmchat/robot.hpp"

namespace {

swarmchat::Pose parse_pose(const std::string& text) {
  std::stringstream in(text);
  swarmchat::Pose p;
  char c1 = 0, c2 = 0;
  if (!(in >> p.x >> c1 >> p.y >> c2 >> p.heading) || c1 != ',' || c2 != ',')
    throw CLI::ValidationError("--start-pose", "expected x,y,heading");
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulated swarmchat robot"};
  std::string id;
  std::string broker = "127.0.0.1:7447";
  std::string pose = "0,0,0";
  std::string config_path;
  std::string received_log;
  std::string level = "info";
  double battery = 100.0;
  bool realtime = false;
  app.add_option("--id", id, "robot identifier, e.g. \"TurtleBot 1\"")->required();
  app.add_option("--broker", broker, "broker host:port");
  app.add_option("--start-pose", pose, "x,y,heading");
  app.add_option("--battery", battery, "initial battery percent")->check(CLI::Range(0.0, 100.0));
  app.add_option("--config", config_path, "config file for motion settings");
  app.add_option("--received-log", received_log, "append received commands to this file");
  app.add_flag("--realtime", realtime, "execute motion in wall-clock time");
  app.add_option("--log-level", level);
  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(level));

  try {
    auto config = config_path.empty() ? swarmchat::Config{} : swarmchat::Config::load(config_path);
    swarmchat::RobotNodeOptions options;
    options.initial = swarmchat::RobotState{id, parse_pose(pose), battery, "idle"};
    options.motion = config.motion;
    options.broker = swarmchat::parse_endpoint(broker, config.bus);
    options.received_log = received_log;
    options.realtime = realtime;

    swarmchat::RobotNode node(std::move(options));
    node.start();
    spdlog::info("{} online", id);
    swarmchat::tools::wait_for_signal();
    node.stop();
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
