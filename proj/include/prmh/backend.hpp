#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "prmh/case.hpp"

namespace prmh {

using TokenScoreMap = std::map<std::string, double>;

struct GenerationRequest {
  std::string prompt;
  double temperature = 0.0;
  int num_samples = 1;
  int max_tokens = 1024;
  std::optional<std::uint64_t> seed;
  bool want_token_scores = false;
};

// texts always has num_samples entries. token_scores is either empty (the
// backend does not expose token scores) or aligned with texts; individual
// entries may still be absent.
struct GenerationResult {
  std::vector<std::string> texts;
  std::vector<std::optional<TokenScoreMap>> token_scores;
};

enum class BackendKind { mock_oracle, replay, http };

struct ReplayEntry {
  std::string request_key;
  std::string text;
  std::optional<TokenScoreMap> token_scores;
};

struct BackendDescriptor {
  BackendKind kind = BackendKind::mock_oracle;

  // http
  std::string endpoint;
  std::string model_name;
  std::string api_key;

  // mock oracle
  double mock_accuracy = 1.0;
  std::uint64_t mock_seed = 0;
  std::shared_ptr<const std::vector<BenchmarkCase>> mock_truth;

  // replay
  std::string replay_path;
  std::shared_ptr<const std::vector<ReplayEntry>> replay_entries;
  bool replay_keyed = false;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual GenerationResult generate(const GenerationRequest& request) = 0;
};

void validate_request(const GenerationRequest& request);

/// Builds a descriptor for the deterministic oracle backend: given a judging
/// prompt for a known (case, step), it emits a well-formed trajectory whose
/// verdict matches the ground truth with probability `accuracy`, driven by a
/// counter hash of (seed, case id, step index, sample index).
BackendDescriptor mock_oracle_configure(std::vector<BenchmarkCase> truth,
                                        double accuracy, std::uint64_t seed);

BackendDescriptor replay_configure(std::vector<ReplayEntry> entries,
                                   bool keyed = false);

std::vector<ReplayEntry> load_replay_fixture(const std::string& path);

std::shared_ptr<Backend> make_backend(const BackendDescriptor& descriptor);

}  // namespace prmh
