#pragma once

#include <cstdlib>
#include <string>

#include <httplib.h>

#include "semproc/gateway/backend.hpp"

namespace semproc {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

inline ParsedUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("not a URL: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

/// Chat-completions client: POSTs `{model, messages, temperature,
/// max_tokens}` and reads `choices[0].message.content`.
class HttpChatBackend final : public Backend {
 public:
  explicit HttpChatBackend(BackendConfig config) : config_(std::move(config)) {
    validate_backend(config_);
    if (!config_.auth_env.empty()) {
      if (const char* v = std::getenv(config_.auth_env.c_str())) token_ = v;
    }
  }

  std::string id() const override { return config_.name; }

  std::string complete(const InstructionInstance&, const std::string& prompt,
                       const DecodingParams& d) override {
    const auto url = split_url(config_.endpoint);
    httplib::Client cli(url.origin);
    const auto secs = static_cast<time_t>(config_.timeout_s);
    const auto usecs = static_cast<time_t>((config_.timeout_s - static_cast<double>(secs)) * 1e6);
    cli.set_connection_timeout(secs, usecs);
    cli.set_read_timeout(secs, usecs);
    cli.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);

    json messages = json::array();
    if (!config_.system_prompt.empty()) {
      messages.push_back({{"role", "system"}, {"content", config_.system_prompt}});
    }
    messages.push_back({{"role", "user"}, {"content", prompt}});
    const json body = {{"model", config_.model},
                       {"messages", messages},
                       {"temperature", d.temperature},
                       {"max_tokens", d.max_tokens}};

    auto res = cli.Post(url.path, headers, body.dump(), "application/json");
    if (!res) {
      throw UnreachableError(config_.endpoint + ": " + httplib::to_string(res.error()));
    }
    if (res->status == 401 || res->status == 403) {
      throw AuthError(config_.endpoint + ": HTTP " + std::to_string(res->status));
    }
    if (res->status == 429 || res->status >= 500) {
      throw BackendError(config_.endpoint + ": HTTP " + std::to_string(res->status), true);
    }
    if (res->status != 200) {
      throw BackendError(config_.endpoint + ": HTTP " + std::to_string(res->status), false);
    }
    try {
      const json j = json::parse(res->body);
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw MalformedResponse(config_.endpoint + ": " + e.what());
    }
  }

 private:
  BackendConfig config_;
  std::string token_;
};

inline std::unique_ptr<Backend> make_backend(const BackendConfig& c) {
  validate_backend(c);
  switch (c.kind) {
    case BackendKind::Oracle: return std::make_unique<OracleBackend>(c.name);
    case BackendKind::Random: return std::make_unique<RandomBackend>(c.seed, c.name);
    case BackendKind::HttpChat: return std::make_unique<HttpChatBackend>(c);
  }
  throw ConfigError("unknown backend kind");
}

}  // namespace semproc
