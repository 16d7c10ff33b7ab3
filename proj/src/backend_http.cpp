#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <memory>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "smi/backend.hpp"
#include "smi/errors.hpp"
#include "smi/util.hpp"

namespace smi::backend {

using nlohmann::json;

namespace {

struct ParsedUrl {
  std::string base;  // scheme://host[:port]
  std::string path;  // base path ("" or "/v1", ...)
};

ParsedUrl parse_url(const std::string& endpoint) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) throw config_error("bad endpoint URL: " + endpoint);
  const auto path_start = endpoint.find('/', scheme_end + 3);
  ParsedUrl url;
  if (path_start == std::string::npos) {
    url.base = endpoint;
  } else {
    url.base = endpoint.substr(0, path_start);
    url.path = endpoint.substr(path_start);
    while (!url.path.empty() && url.path.back() == '/') url.path.pop_back();
  }
  return url;
}

}  // namespace

class HttpBackend : public Backend {
 public:
  explicit HttpBackend(const BackendDescriptor& desc)
      : desc_(desc), url_(parse_url(desc.endpoint)), bucket_(desc.requests_per_second) {
    // httplib clients serialize their requests internally, so in-flight
    // parallelism needs one client per slot.
    const int pool = std::max(1, desc.max_in_flight);
    for (int i = 0; i < pool; ++i) {
      auto client = std::make_unique<httplib::Client>(url_.base);
      client->set_connection_timeout(30);
      client->set_read_timeout(120);
      if (const char* key = std::getenv(desc.api_key_env.c_str()); key && *key) {
        client->set_default_headers({{"Authorization", std::string("Bearer ") + key}});
      }
      clients_.push_back(std::move(client));
    }
  }

  EchoResponse score_echo(const EchoRequest& req) override {
    json body = {
        {"model", req.model},
        {"prompt", nullptr},
        {"max_tokens", 0},
        {"echo", true},
        {"logprobs", 0},
    };
    std::string prompt;
    std::size_t base = 0;
    if (!req.question.empty()) {
      prompt = req.question + "\n";
      base = prompt.size();
    }
    prompt += req.prefix_text + req.scored_text;
    body["prompt"] = prompt;
    if (!req.image_ref.empty()) body["image_ref"] = req.image_ref;  // opaque passthrough

    const json resp = post(url_.path + "/completions", body);
    const json& choice = first_choice(resp);
    if (!choice.contains("logprobs") || choice["logprobs"].is_null()) {
      throw capability_error("backend returned no logprobs; echo scoring unsupported by " +
                             desc_.endpoint);
    }
    const json& lp = choice["logprobs"];
    EchoResponse out;
    out.prompt_char_base = base;
    const auto& tokens = lp.at("tokens");
    const auto& values = lp.at("token_logprobs");
    const auto& offsets = lp.at("text_offset");
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      EchoToken t;
      t.token = tokens[i].get<std::string>();
      if (i < values.size() && !values[i].is_null()) t.logprob = values[i].get<double>();
      t.offset = i < offsets.size() ? offsets[i].get<std::size_t>() : 0;
      out.tokens.push_back(std::move(t));
    }
    return out;
  }

  PredictedToken predict_next(const PredictRequest& req) override {
    json body = {
        {"model", req.model},
        {"messages", json::array({json{{"role", "user"}, {"content", req.prompt}}})},
        {"max_tokens", 1},
        {"logprobs", true},
    };
    if (desc_.use_top_logprobs && desc_.top_logprobs > 0) {
      body["top_logprobs"] = desc_.top_logprobs;
    }
    if (!req.image_ref.empty()) body["image_ref"] = req.image_ref;

    const json resp = post(url_.path + "/chat/completions", body);
    const json& choice = first_choice(resp);
    PredictedToken out;
    if (!choice.contains("logprobs") || choice["logprobs"].is_null() ||
        !choice["logprobs"].contains("content") || choice["logprobs"]["content"].empty()) {
      out.empty = true;
      return out;
    }
    const json& entry = choice["logprobs"]["content"][0];
    out.token = entry.value("token", std::string{});
    out.logprob = entry.value("logprob", 0.0);
    if (entry.contains("top_logprobs")) {
      for (const auto& alt : entry["top_logprobs"]) {
        out.top_logprobs.emplace_back(alt.value("token", std::string{}),
                                      alt.value("logprob", 0.0));
      }
    }
    return out;
  }

  std::string complete_chat(const ChatRequest& req) override {
    const json body = {
        {"model", req.model},
        {"messages", json::array({json{{"role", "user"}, {"content", req.prompt}}})},
        {"temperature", req.temperature},
    };
    const json resp = post(url_.path + "/chat/completions", body);
    const json& choice = first_choice(resp);
    if (!choice.contains("message") || !choice["message"].contains("content")) {
      throw backend_error("chat response without message content from " + desc_.endpoint, true);
    }
    return choice["message"]["content"].get<std::string>();
  }

 private:
  static const json& first_choice(const json& resp) {
    if (!resp.contains("choices") || resp["choices"].empty()) {
      throw backend_error("response without choices", true);
    }
    return resp["choices"][0];
  }

  json post(const std::string& path, const json& body) {
    constexpr int kAttempts = 3;
    std::string last_error;
    httplib::Client& client =
        *clients_[next_client_.fetch_add(1, std::memory_order_relaxed) % clients_.size()];
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
      if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(200 * attempt));
      bucket_.acquire();
      count_request();
      auto res = client.Post(path, body.dump(), "application/json");
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status == 401 || res->status == 403) {
        throw backend_error("backend " + desc_.endpoint + " rejected authorization (HTTP " +
                                std::to_string(res->status) + "); set " + desc_.api_key_env,
                            false);
      }
      if (res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200) {
        throw backend_error("backend " + desc_.endpoint + " returned HTTP " +
                                std::to_string(res->status) + ": " + res->body,
                            false);
      }
      try {
        return json::parse(res->body);
      } catch (const json::parse_error& e) {
        throw backend_error(std::string("backend returned malformed JSON: ") + e.what(), false);
      }
    }
    throw backend_error("backend " + desc_.endpoint + " unreachable after " +
                            std::to_string(kAttempts) + " attempts: " + last_error,
                        true);
  }

  BackendDescriptor desc_;
  ParsedUrl url_;
  std::vector<std::unique_ptr<httplib::Client>> clients_;
  std::atomic<std::size_t> next_client_{0};
  util::TokenBucket bucket_;
};

std::unique_ptr<Backend> make_file_backend(const std::string& path);

std::unique_ptr<Backend> make_backend(const BackendDescriptor& desc) {
  if (desc.endpoint.rfind("mock:", 0) == 0) {
    return std::make_unique<MockBackend>(parse_mock_endpoint(desc.endpoint));
  }
  if (desc.endpoint.rfind("file:", 0) == 0) {
    return make_file_backend(desc.endpoint.substr(5));
  }
  if (desc.endpoint.rfind("http://", 0) == 0 || desc.endpoint.rfind("https://", 0) == 0) {
    return std::make_unique<HttpBackend>(desc);
  }
  throw config_error("unsupported backend endpoint \"" + desc.endpoint +
                     "\" (expected mock:, file:, http:// or https://)");
}

}  // namespace smi::backend
