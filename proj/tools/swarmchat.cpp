#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>

#include "signals.hpp"
#include "swarmchat/api.hpp"
#include "swarmchat/scenario.hpp"
#include "swarmchat/stack.hpp"

namespace {

struct Common {
  std::string broker;
  std::string config_path;
  std::string data_dir;
  std::string level = "warn";
  bool synonyms = false;
  std::string provider_url;
};

swarmchat::StackOptions stack_options(const Common& common) {
  swarmchat::StackOptions options;
  if (!common.config_path.empty()) options.config = swarmchat::Config::load(common.config_path);
  if (common.synonyms) options.config.similarity.synonyms_enabled = true;
  if (!common.provider_url.empty()) options.config.external.url = common.provider_url;
  if (!options.config.external.url.empty()) {
    options.provider.mode = swarmchat::ProviderMode::External;
    options.provider.fetch = swarmchat::make_http_fetch(options.config.external);
  }
  options.data_dir = common.data_dir;
  return options;
}

int run_scenario(const Common& common, const std::string& script, bool as_json) {
  auto steps = swarmchat::load_scenario(script);
  auto options = stack_options(common);
  swarmchat::ScenarioOptions run;
  swarmchat::ManualClock clock(run.start_ms);
  options.clock = clock.clock();
  if (!common.broker.empty()) {
    options.broker = swarmchat::parse_endpoint(common.broker, options.config.bus);
    options.spawn_robots = false;
  }

  swarmchat::LocalStack stack(std::move(options));
  stack.start();
  run.clock = &clock;
  auto report = swarmchat::run_scenario(stack.orchestrator(), steps, run);
  stack.stop();

  if (as_json)
    std::cout << swarmchat::render_json(report).dump(2) << '\n';
  else if (!report.rows.empty())
    std::cout << swarmchat::render_table(report.rows);
  if (report.error) {
    std::cerr << "error: " << *report.error << '\n';
    return 1;
  }
  return 0;
}

int serve(const Common& common, const std::string& http, bool embedded, bool realtime) {
  auto options = stack_options(common);
  options.realtime = realtime;
  if (!embedded) {
    options.broker = common.broker.empty() ? options.config.bus
                                           : swarmchat::parse_endpoint(common.broker, options.config.bus);
    options.spawn_robots = false;
  }
  swarmchat::LocalStack stack(std::move(options));
  stack.start();

  auto endpoint = swarmchat::parse_endpoint(http, swarmchat::BusEndpoint{"127.0.0.1", 8080});
  swarmchat::ApiServer api(stack.orchestrator());
  auto port = api.start(endpoint.host, endpoint.port);
  std::cout << "serving on http://" << endpoint.host << ':' << port << std::endl;
  swarmchat::tools::wait_for_signal();
  api.stop();
  stack.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"swarmchat orchestrator"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--broker", common.broker, "broker host:port");
  app.add_option("--config", common.config_path, "JSON config file");
  app.add_option("--data-dir", common.data_dir, "directory for the JSON-lines logs");
  app.add_option("--log-level", common.level, "trace, debug, info, warn, error");
  app.add_flag("--synonyms", common.synonyms, "enable the zone/area partial-credit rule");
  app.add_option("--provider-url", common.provider_url, "external context generator endpoint");

  auto* scenario_cmd = app.add_subcommand("run-scenario", "run a scenario script and print the report");
  std::string script;
  bool as_json = false;
  scenario_cmd->add_option("script", script, "JSON-lines scenario file")->required();
  scenario_cmd->add_flag("--json", as_json, "print the report as JSON");

  auto* serve_cmd = app.add_subcommand("serve", "serve the HTTP API");
  std::string http = "127.0.0.1:8080";
  bool embedded = false;
  bool realtime = false;
  serve_cmd->add_option("--http", http, "host:port for the HTTP API");
  serve_cmd->add_flag("--embedded-stack", embedded, "start a broker and the configured robots in-process");
  serve_cmd->add_flag("--realtime", realtime, "embedded robots move in wall-clock time");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_default_logger(spdlog::stderr_color_mt("swarmchat"));
  spdlog::set_level(spdlog::level::from_str(common.level));

  try {
    if (*scenario_cmd) return run_scenario(common, script, as_json);
    return serve(common, http, embedded, realtime);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
