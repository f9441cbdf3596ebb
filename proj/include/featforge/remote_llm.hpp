#pragma once

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "featforge/generator.hpp"

namespace featforge {

// OpenAI-style chat-completions backend. The base URL comes from the config
// or FEATFORGE_LLM_URL; a bearer token is attached when FEATFORGE_LLM_KEY is
// set. Failed requests are retried with exponential backoff; a request that
// still fails yields an error result, never an exception — a long search
// must survive a flaky endpoint.
struct RemoteLlmConfig {
  std::string base_url;
  std::string model = "Llama-2-13B-chat-hf";
  double temperature = 0.8;
  int max_tokens = 256;
  int max_retries = 2;
  int timeout_sec = 30;
  int backoff_ms = 250;
};

class RemoteLlm final : public GeneratorBackend {
 public:
  explicit RemoteLlm(RemoteLlmConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.base_url.empty())
      if (const char* env = std::getenv("FEATFORGE_LLM_URL")) cfg_.base_url = env;
  }

  std::string kind() const override { return "remote"; }

  GenerationResult generate(const std::string& prompt) override {
    if (cfg_.base_url.empty()) return {false, "", "no endpoint configured (FEATFORGE_LLM_URL unset)"};

    const auto [host, prefix] = split_url(cfg_.base_url);
    httplib::Client client(host);
    client.set_connection_timeout(cfg_.timeout_sec, 0);
    client.set_read_timeout(cfg_.timeout_sec, 0);

    httplib::Headers headers;
    if (const char* key = std::getenv("FEATFORGE_LLM_KEY"))
      headers.emplace("Authorization", std::string("Bearer ") + key);

    const nlohmann::json body = {{"model", cfg_.model},
                                 {"messages", {{{"role", "user"}, {"content", prompt}}}},
                                 {"temperature", cfg_.temperature},
                                 {"max_tokens", cfg_.max_tokens}};
    const std::string payload = body.dump();
    const std::string path = prefix + "/chat/completions";

    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
      if (attempt > 0 && cfg_.backoff_ms > 0)
        std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.backoff_ms << (attempt - 1)));

      auto res = client.Post(path, headers, payload, "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status != 200) {
        last_error = "http status " + std::to_string(res->status);
        continue;
      }
      const nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
      if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty() ||
          !reply["choices"][0].contains("message") || !reply["choices"][0]["message"].contains("content"))
        return {false, "", "malformed response body"};
      return {true, reply["choices"][0]["message"]["content"].get<std::string>(), ""};
    }
    return {false, "", last_error};
  }

 private:
  // "http://host:port/v1" -> ("http://host:port", "/v1")
  static std::pair<std::string, std::string> split_url(const std::string& url) {
    std::size_t scheme = url.find("://");
    const std::size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
    const std::size_t slash = url.find('/', host_start);
    if (slash == std::string::npos) return {url, ""};
    std::string prefix = url.substr(slash);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {url.substr(0, slash), prefix};
  }

  RemoteLlmConfig cfg_;
};

}  // namespace featforge
