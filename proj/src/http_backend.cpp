#include <chrono>
#include <cstdlib>
#include <memory>
#include <string>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "prmh/backend.hpp"
#include "prmh/error.hpp"
#include "prmh/textutil.hpp"

namespace prmh {

namespace {

using nlohmann::json;

constexpr int kMaxAttempts = 3;
constexpr int kBackoffBaseMs = 100;

struct ParsedEndpoint {
  std::string scheme_host_port;
  std::string path_prefix;
};

ParsedEndpoint parse_endpoint(const std::string& endpoint) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos ||
      (endpoint.rfind("http://", 0) != 0 && endpoint.rfind("https://", 0) != 0)) {
    throw Error(ErrorKind::config,
                "http backend: endpoint must start with http:// or https://");
  }
  const auto path_start = endpoint.find('/', scheme_end + 3);
  ParsedEndpoint out;
  if (path_start == std::string::npos) {
    out.scheme_host_port = endpoint;
  } else {
    out.scheme_host_port = endpoint.substr(0, path_start);
    out.path_prefix = endpoint.substr(path_start);
    while (!out.path_prefix.empty() && out.path_prefix.back() == '/') {
      out.path_prefix.pop_back();
    }
  }
  return out;
}

bool retryable_status(int status) {
  return status == 429 || status == 500 || status == 502 || status == 503 ||
         status == 504;
}

// Token scores at the verdict position: the last sampled token whose text
// normalizes to yes/no, together with the alternatives reported for it.
std::optional<TokenScoreMap> verdict_token_scores(const json& choice) {
  const auto lp = choice.find("logprobs");
  if (lp == choice.end() || !lp->is_object()) return std::nullopt;
  const auto content = lp->find("content");
  if (content == lp->end() || !content->is_array()) return std::nullopt;
  for (auto it = content->rbegin(); it != content->rend(); ++it) {
    const json& entry = *it;
    if (!entry.is_object() || !entry.contains("token")) continue;
    const std::string norm = text::normalize_token(entry["token"].get<std::string>());
    if (norm != "yes" && norm != "no") continue;
    TokenScoreMap scores;
    if (entry.contains("logprob") && entry["logprob"].is_number()) {
      scores[entry["token"].get<std::string>()] = entry["logprob"].get<double>();
    }
    const auto top = entry.find("top_logprobs");
    if (top != entry.end() && top->is_array()) {
      for (const json& alt : *top) {
        if (!alt.is_object() || !alt.contains("token") || !alt.contains("logprob")) continue;
        const std::string tok = alt["token"].get<std::string>();
        const double score = alt["logprob"].get<double>();
        auto [pos, inserted] = scores.emplace(tok, score);
        if (!inserted && score > pos->second) pos->second = score;
      }
    }
    if (scores.empty()) return std::nullopt;
    return scores;
  }
  return std::nullopt;
}

class HttpBackend : public Backend {
 public:
  explicit HttpBackend(const BackendDescriptor& d) : descriptor_(d) {
    if (descriptor_.endpoint.empty()) {
      if (const char* base = std::getenv("PRMH_API_BASE")) descriptor_.endpoint = base;
    }
    if (descriptor_.api_key.empty()) {
      if (const char* key = std::getenv("PRMH_API_KEY")) descriptor_.api_key = key;
    }
    if (descriptor_.endpoint.empty()) {
      throw Error(ErrorKind::config,
                  "http backend: endpoint missing (set --api-base or PRMH_API_BASE)");
    }
    if (descriptor_.model_name.empty()) {
      throw Error(ErrorKind::config, "http backend: model name missing");
    }
    endpoint_ = parse_endpoint(descriptor_.endpoint);
  }

  GenerationResult generate(const GenerationRequest& request) override {
    validate_request(request);

    json body{{"model", descriptor_.model_name},
              {"messages", json::array({json{{"role", "user"}, {"content", request.prompt}}})},
              {"n", request.num_samples},
              {"temperature", request.temperature},
              {"max_tokens", request.max_tokens}};
    if (request.seed) body["seed"] = *request.seed;
    if (request.want_token_scores) {
      body["logprobs"] = true;
      body["top_logprobs"] = 5;
    }
    const std::string payload = body.dump();
    const std::string path = endpoint_.path_prefix + "/chat/completions";

    httplib::Result res;
    int attempts = 0;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(
            std::chrono::milliseconds(kBackoffBaseMs << (attempt - 1)));
      }
      ++attempts;
      httplib::Client client(endpoint_.scheme_host_port);
      client.set_connection_timeout(10, 0);
      client.set_read_timeout(300, 0);
      client.set_write_timeout(30, 0);
      httplib::Headers headers;
      if (!descriptor_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + descriptor_.api_key);
      }
      res = client.Post(path, headers, payload, "application/json");
      if (res && !retryable_status(res->status)) break;
    }

    if (!res) {
      Error err(ErrorKind::transport,
                "http backend: request to " + endpoint_.scheme_host_port + path +
                    " failed after " + std::to_string(attempts) + " attempt(s): " +
                    httplib::to_string(res.error()));
      err.attempts = attempts;
      throw err;
    }
    if (res->status < 200 || res->status >= 300) {
      Error err(ErrorKind::transport,
                "http backend: status " + std::to_string(res->status) + " after " +
                    std::to_string(attempts) + " attempt(s)");
      err.attempts = attempts;
      throw err;
    }

    json parsed;
    try {
      parsed = json::parse(res->body);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::protocol, std::string("http backend: malformed response body: ") + e.what());
    }
    const auto choices = parsed.find("choices");
    if (choices == parsed.end() || !choices->is_array()) {
      throw Error(ErrorKind::protocol, "http backend: response has no choices array");
    }
    if (static_cast<int>(choices->size()) != request.num_samples) {
      throw Error(ErrorKind::protocol,
                  "http backend: expected " + std::to_string(request.num_samples) +
                      " choices, got " + std::to_string(choices->size()));
    }

    GenerationResult result;
    bool any_scores = false;
    std::vector<std::optional<TokenScoreMap>> scores;
    for (const json& choice : *choices) {
      const auto msg = choice.find("message");
      if (msg == choice.end() || !msg->is_object() || !msg->contains("content") ||
          !(*msg)["content"].is_string()) {
        throw Error(ErrorKind::protocol, "http backend: choice has no message content");
      }
      result.texts.push_back((*msg)["content"].get<std::string>());
      std::optional<TokenScoreMap> s;
      if (request.want_token_scores) s = verdict_token_scores(choice);
      if (s) any_scores = true;
      scores.push_back(std::move(s));
    }
    if (any_scores) result.token_scores = std::move(scores);
    return result;
  }

 private:
  BackendDescriptor descriptor_;
  ParsedEndpoint endpoint_;
};

}  // namespace

std::shared_ptr<Backend> make_http_backend(const BackendDescriptor& descriptor) {
  return std::make_shared<HttpBackend>(descriptor);
}

}  // namespace prmh
