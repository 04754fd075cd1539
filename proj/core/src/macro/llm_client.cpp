#include <cstdlib>
#include <iostream>

// Eigen must precede httplib: <resolv.h> defines a _res macro.
#include "uavmec/macro_scheduler.hpp"

#include <httplib.h>
#include <json.hpp>

namespace uavmec {

using nlohmann::json;

std::string chat_request_body(const PromptBundle& bundle, const std::string& model) {
  json body;
  body["model"] = model;
  body["messages"] = json::array({{{"role", "system"}, {"content", bundle.system}},
                                  {{"role", "user"}, {"content", bundle.user()}}});
  body["temperature"] = 0;
  return body.dump();
}

namespace {

struct SplitUrl {
  std::string origin;
  std::string path;
};

// "http://host:port/prefix" -> {"http://host:port", "/prefix"}
SplitUrl split_url(const std::string& url) {
  const auto scheme = url.find("://");
  const auto start = scheme == std::string::npos ? 0 : scheme + 3;
  const auto slash = url.find('/', start);
  if (slash == std::string::npos) return {url, ""};
  std::string path = url.substr(slash);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {url.substr(0, slash), path};
}

}  // namespace

std::string call_llm(const PromptBundle& bundle, const LlmEndpoint& ep) {
  if (ep.base_url.empty()) throw EndpointError("llm endpoint: base URL not configured");
  const SplitUrl url = split_url(ep.base_url);
  const std::string body = chat_request_body(bundle, ep.model);
  const auto timeout = std::chrono::milliseconds(static_cast<long>(ep.timeout_s * 1000.0));

  std::string last_error = "no attempt made";
  for (int attempt = 1; attempt <= std::max(1, ep.attempts); ++attempt) {
    try {
      httplib::Client cli(url.origin);
      cli.set_connection_timeout(timeout);
      cli.set_read_timeout(timeout);
      cli.set_write_timeout(timeout);
      if (const char* tok = std::getenv(ep.token_env.c_str()); tok && *tok) cli.set_bearer_token_auth(tok);
      const auto res = cli.Post(url.path + "/chat/completions", body, "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
      } else if (res->status >= 400) {
        last_error = "HTTP " + std::to_string(res->status);
      } else {
        const json j = json::parse(res->body, nullptr, false);
        if (j.is_discarded()) {
          last_error = "response is not JSON";
        } else if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty() ||
                   !j["choices"][0].contains("message") || !j["choices"][0]["message"].contains("content") ||
                   !j["choices"][0]["message"]["content"].is_string()) {
          last_error = "response has no choices[0].message.content";
        } else {
          return j["choices"][0]["message"]["content"].get<std::string>();
        }
      }
    } catch (const std::exception& e) {
      last_error = e.what();
    }
    std::clog << "[llm] attempt " << attempt << " failed: " << last_error << '\n';
  }
  throw EndpointError("llm endpoint: " + last_error);
}

}  // namespace uavmec
