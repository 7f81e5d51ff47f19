#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "swarmchat/context.hpp"

namespace swarmchat {

namespace {

struct Url {
  std::string origin;  // scheme://host:port
  std::string path;
};

Url split_url(const std::string& url) {
  auto scheme = url.find("://");
  auto path_start = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

ExternalFetch make_http_fetch(ExternalProviderConfig config) {
  return [config](const KeywordSet& keywords) -> std::vector<std::string> {
    if (config.url.empty()) return {};
    const auto url = split_url(config.url);
    // A client per call keeps concurrent sessions independent.
    httplib::Client client(url.origin);
    const auto timeout = std::chrono::milliseconds(config.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    nlohmann::ordered_json body;
    body["keywords"] = keywords.tokens();
    auto res = client.Post(url.path, body.dump(), "application/json");
    if (!res) {
      spdlog::warn("external context provider unreachable: {}", httplib::to_string(res.error()));
      return {};
    }
    if (res->status != 200) {
      spdlog::warn("external context provider returned HTTP {}", res->status);
      return {};
    }
    try {
      auto doc = nlohmann::json::parse(res->body);
      return doc.at("contexts").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      spdlog::warn("external context provider sent a bad body: {}", e.what());
      return {};
    }
  };
}

}  // namespace swarmchat
