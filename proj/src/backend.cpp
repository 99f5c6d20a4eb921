#include "prmh/backend.hpp"

#include <cmath>
#include <utility>

#include "json.hpp"

#include "prmh/error.hpp"
#include "prmh/io.hpp"

namespace prmh {

void validate_request(const GenerationRequest& request) {
  if (request.num_samples < 1) {
    throw Error(ErrorKind::invalid_argument, "generation request: num_samples must be >= 1");
  }
  if (!(request.temperature >= 0.0) || !std::isfinite(request.temperature)) {
    throw Error(ErrorKind::invalid_argument, "generation request: temperature must be >= 0");
  }
  if (request.max_tokens < 1) {
    throw Error(ErrorKind::invalid_argument, "generation request: max_tokens must be >= 1");
  }
}

BackendDescriptor mock_oracle_configure(std::vector<BenchmarkCase> truth,
                                        double accuracy, std::uint64_t seed) {
  if (!(accuracy >= 0.0 && accuracy <= 1.0)) {
    throw Error(ErrorKind::invalid_argument, "mock oracle: accuracy must be in [0, 1]");
  }
  for (const auto& c : truth) validate_case(c);
  BackendDescriptor d;
  d.kind = BackendKind::mock_oracle;
  d.mock_accuracy = accuracy;
  d.mock_seed = seed;
  d.mock_truth = std::make_shared<const std::vector<BenchmarkCase>>(std::move(truth));
  return d;
}

BackendDescriptor replay_configure(std::vector<ReplayEntry> entries, bool keyed) {
  BackendDescriptor d;
  d.kind = BackendKind::replay;
  d.replay_entries = std::make_shared<const std::vector<ReplayEntry>>(std::move(entries));
  d.replay_keyed = keyed;
  return d;
}

std::vector<ReplayEntry> load_replay_fixture(const std::string& path) {
  std::vector<ReplayEntry> entries;
  io::for_each_jsonl(path, [&](int line_no, const nlohmann::json& j) {
    ReplayEntry e;
    try {
      e.request_key = j.at("request_key").get<std::string>();
      e.text = j.at("text").get<std::string>();
      const auto& scores = j.at("token_scores");
      if (!scores.is_null()) e.token_scores = scores.get<TokenScoreMap>();
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorKind::parse,
                  path + " line " + std::to_string(line_no) + ": " + ex.what());
    }
    entries.push_back(std::move(e));
  });
  return entries;
}

std::shared_ptr<Backend> make_mock_oracle_backend(const BackendDescriptor& descriptor);
std::shared_ptr<Backend> make_replay_backend(const BackendDescriptor& descriptor);
std::shared_ptr<Backend> make_http_backend(const BackendDescriptor& descriptor);

std::shared_ptr<Backend> make_backend(const BackendDescriptor& descriptor) {
  switch (descriptor.kind) {
    case BackendKind::mock_oracle:
      return make_mock_oracle_backend(descriptor);
    case BackendKind::replay:
      return make_replay_backend(descriptor);
    case BackendKind::http:
      return make_http_backend(descriptor);
  }
  throw Error(ErrorKind::config, "unknown backend kind");
}

}  // namespace prmh
