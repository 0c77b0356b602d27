// Copyright 2026 The eventaug Authors.
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Chat-completion provider over HTTP(S).
//
// Request:  POST <endpoint>, Content-Type: application/json,
//           Authorization: Bearer $<auth_env> (omitted when unset),
//           body {"model", "messages": [{"role": "user", "content"}],
//                 "max_tokens", "temperature"}.
// Response: {"choices": [{"message": {"content": "..."}}], "model": "..."}.
//
// Transport failures, 429 and 5xx are retried with exponential backoff up
// to max_retries times; any other status fails at once.

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "eventaug/error.hpp"
#include "eventaug/explicit_aug.hpp"

namespace eventaug {

struct ParsedEndpoint {
  std::string base;  // scheme://host[:port]
  std::string path;  // begins with '/'
};

inline ParsedEndpoint parse_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint '" + url + "' has no scheme");
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("endpoint '" + url + "' must use http or https");
  }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (scheme == "https") throw ConfigError("this build has no TLS support for '" + url + "'");
#endif
  const auto slash = url.find('/', scheme_end + 3);
  if (slash == scheme_end + 3) throw ConfigError("endpoint '" + url + "' has no host");
  ParsedEndpoint out;
  out.base = url.substr(0, slash);
  out.path = slash == std::string::npos ? "/" : url.substr(slash);
  return out;
}

class HttpProvider final : public Provider {
 public:
  explicit HttpProvider(ProviderConfig config) : config_(std::move(config)) {
    config_.validate();
    endpoint_ = parse_endpoint(config_.endpoint);
    if (const char* token = std::getenv(config_.auth_env.c_str()); token && *token) token_ = token;
  }

  int max_in_flight() const override { return config_.max_in_flight; }
  const ProviderConfig& config() const noexcept { return config_; }

 protected:
  Completion do_complete(const std::string& prompt) override {
    const auto body = provider_request_body(config_, prompt).dump();
    httplib::Headers headers;
    if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(
            std::chrono::milliseconds(static_cast<long long>(config_.retry_base_delay_ms) << (attempt - 1)));
      }
      httplib::Client client(endpoint_.base);
      client.set_connection_timeout(config_.timeout_seconds, 0);
      client.set_read_timeout(config_.timeout_seconds, 0);
      client.set_write_timeout(config_.timeout_seconds, 0);
      const auto t0 = std::chrono::steady_clock::now();
      auto res = client.Post(endpoint_.path, headers, body, "application/json");
      const auto t1 = std::chrono::steady_clock::now();
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 429 || res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200) {
        throw ProviderError("provider returned HTTP " + std::to_string(res->status) + ": " +
                                res->body.substr(0, 200),
                            res->status);
      }
      try {
        const auto j = nlohmann::json::parse(res->body);
        Completion c;
        c.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
        c.model = j.value("model", config_.model);
        c.latency_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        return c;
      } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("malformed provider response: ") + e.what(), res->status);
      }
    }
    throw ProviderError("provider failed after " + std::to_string(config_.max_retries + 1) +
                            " attempts: " + last_error,
                        0);
  }

 private:
  ProviderConfig config_;
  ParsedEndpoint endpoint_;
  std::string token_;
};

}  // namespace eventaug
