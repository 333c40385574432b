#pragma once

// HTTP model-serving backend.
//
//   POST /translate  {"prompt": ..., "decoding": {...}, "max_tokens": n}
//   200              {"text": ...}

#include <chrono>
#include <cstdlib>
#include <optional>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

// <resolv.h>, pulled in by httplib, defines _res, which collides with Eigen
// parameter names.
#ifdef _res
#undef _res
#endif

#include "mtbias/client.hpp"

namespace mtbias {

inline constexpr const char* kEndpointEnv = "MTBIAS_ENDPOINT";
inline constexpr const char* kTokenEnv = "MTBIAS_TOKEN";

class HttpBackend : public TranslationBackend {
 public:
  // base_url is scheme://host[:port]; an optional bearer token is forwarded.
  explicit HttpBackend(std::string base_url, std::optional<std::string> bearer_token = std::nullopt,
                       std::chrono::seconds timeout = std::chrono::seconds(120))
      : base_url_(std::move(base_url)), token_(std::move(bearer_token)), timeout_(timeout) {}

  static HttpBackend from_environment() {
    const char* url = std::getenv(kEndpointEnv);
    if (!url || !*url) {
      throw BackendError(std::string("no service endpoint: set ") + kEndpointEnv);
    }
    std::optional<std::string> token;
    if (const char* t = std::getenv(kTokenEnv); t && *t) token = t;
    return HttpBackend(url, token);
  }

  std::string tag() const override { return "service:" + base_url_; }
  bool cacheable() const override { return true; }

  std::string translate(const TranslationRequest& request,
                        const DecodingConfig& decoding) override {
    httplib::Client client(base_url_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    httplib::Headers headers;
    if (token_) headers.emplace("Authorization", "Bearer " + *token_);

    nlohmann::json body;
    body["prompt"] = request.prompt;
    body["decoding"] = decoding.to_json();
    body["max_tokens"] = decoding.max_tokens;

    auto res = client.Post("/translate", headers, body.dump(), "application/json");
    if (!res) {
      throw TransientBackendError("request for " + request.instance_id + " failed: " +
                                  httplib::to_string(res.error()));
    }
    if (res->status >= 500 || res->status == 429) {
      throw TransientBackendError("HTTP " + std::to_string(res->status) + " for " +
                                  request.instance_id);
    }
    if (res->status != 200) {
      throw BackendError("HTTP " + std::to_string(res->status) + " for " + request.instance_id);
    }
    try {
      return nlohmann::json::parse(res->body).at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw BackendError("malformed response for " + request.instance_id + ": " + e.what());
    }
  }

 private:
  std::string base_url_;
  std::optional<std::string> token_;
  std::chrono::seconds timeout_;
};

}  // namespace mtbias
