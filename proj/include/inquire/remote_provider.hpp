#pragma once

#include <cstdint>
#include <cstdlib>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "inquire/error.hpp"
#include "inquire/provider.hpp"

namespace inquire {

struct RemoteConfig {
  std::string base_url;  // e.g. http://localhost:8000/v1
  std::string api_key;
  std::string model;
  int timeout_seconds = 120;

  static RemoteConfig from_env() {
    auto env = [](const char* name) {
      const char* v = std::getenv(name);
      return v ? std::string(v) : std::string();
    };
    return {env("INQUIRE_API_BASE"), env("INQUIRE_API_KEY"), env("INQUIRE_MODEL")};
  }
};

// OpenAI-style chat completions endpoint. A fresh client per call keeps
// `complete` safe to call from several threads.
class RemoteProvider final : public Provider {
 public:
  explicit RemoteProvider(RemoteConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.base_url.empty()) throw ConfigError("remote provider needs a base URL (INQUIRE_API_BASE)");
    if (cfg_.model.empty()) throw ConfigError("remote provider needs a model name (INQUIRE_MODEL)");
    auto scheme = cfg_.base_url.find("://");
    if (scheme == std::string::npos) throw ConfigError("base URL must include a scheme: " + cfg_.base_url);
    auto slash = cfg_.base_url.find('/', scheme + 3);
    host_ = cfg_.base_url.substr(0, slash);
    prefix_ = slash == std::string::npos ? std::string() : cfg_.base_url.substr(slash);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }

  ProviderIdentity identity() const override { return {"remote", cfg_.model}; }

  static nlohmann::json request_body(const std::string& model, const PromptRequest& request,
                                     const DecodingParams& params, std::uint64_t seed) {
    return {
        {"model", model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.text}}})},
        {"temperature", params.temperature},
        {"top_p", params.top_p},
        {"min_p", params.min_p},
        {"repetition_penalty", params.repetition_penalty},
        {"seed", seed},
    };
  }

  std::string complete(const PromptRequest& request, const DecodingParams& params,
                       std::uint64_t seed) const override {
    httplib::Client cli(host_);
    cli.set_connection_timeout(cfg_.timeout_seconds);
    cli.set_read_timeout(cfg_.timeout_seconds);
    if (!cfg_.api_key.empty()) cli.set_bearer_token_auth(cfg_.api_key);
    auto body = request_body(cfg_.model, request, params, seed).dump();
    auto res = cli.Post(prefix_ + "/chat/completions", body, "application/json");
    if (!res) throw ProviderFailure("request to " + host_ + " failed: " + httplib::to_string(res.error()), true);
    if (res->status == 429 || res->status >= 500)
      throw ProviderFailure("provider returned HTTP " + std::to_string(res->status), true);
    if (res->status != 200)
      throw ProviderFailure("provider returned HTTP " + std::to_string(res->status) + ": " + res->body, false);
    try {
      auto j = nlohmann::json::parse(res->body);
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ProviderFailure(std::string("unexpected provider response: ") + e.what(), false);
    }
  }

 private:
  RemoteConfig cfg_;
  std::string host_;
  std::string prefix_;
};

}  // namespace inquire
