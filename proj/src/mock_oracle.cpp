#include <map>
#include <memory>
#include <string>
#include <vector>

#include "prmh/backend.hpp"
#include "prmh/error.hpp"
#include "prmh/rng.hpp"
#include "prmh/textutil.hpp"

namespace prmh {

namespace {

struct PromptParts {
  std::string problem;
  std::string previous;
  std::string now;
};

// The oracle only understands prompts produced from the shipped template; it
// slices them back apart on the template's fixed section anchors.
PromptParts parse_judge_prompt(const std::string& prompt) {
  static const std::string kQuestion = "Question: ";
  static const std::string kPrevious = "\nPrevious Steps: ";
  static const std::string kNow = "\nNow Step: ";
  static const std::string kTail = "\nPlease carefully analyze the correctness of the Now Step.";

  const auto q = prompt.find(kQuestion);
  if (q == std::string::npos) {
    throw Error(ErrorKind::protocol, "mock oracle: prompt has no Question section");
  }
  const auto p = prompt.find(kPrevious, q);
  if (p == std::string::npos) {
    throw Error(ErrorKind::protocol, "mock oracle: prompt has no Previous Steps section");
  }
  const auto n = prompt.find(kNow, p);
  if (n == std::string::npos) {
    throw Error(ErrorKind::protocol, "mock oracle: prompt has no Now Step section");
  }
  auto tail = prompt.find(kTail, n);
  if (tail == std::string::npos) tail = prompt.size();

  PromptParts parts;
  const auto q_end = q + kQuestion.size();
  parts.problem = prompt.substr(q_end, p - q_end);
  const auto p_end = p + kPrevious.size();
  parts.previous = prompt.substr(p_end, n - p_end);
  const auto n_end = n + kNow.size();
  parts.now = prompt.substr(n_end, tail - n_end);
  return parts;
}

std::string joined_prefix(const BenchmarkCase& c, int step_index) {
  std::string out;
  for (int i = 0; i < step_index; ++i) {
    if (i) out += '\n';
    out += c.steps[i];
  }
  return out;
}

class MockOracleBackend : public Backend {
 public:
  explicit MockOracleBackend(const BackendDescriptor& d)
      : accuracy_(d.mock_accuracy), seed_(d.mock_seed), truth_(d.mock_truth) {
    if (!truth_) {
      throw Error(ErrorKind::config, "mock oracle: no truth set configured");
    }
    for (const auto& c : *truth_) by_problem_[c.problem].push_back(&c);
  }

  GenerationResult generate(const GenerationRequest& request) override {
    validate_request(request);
    const PromptParts parts = parse_judge_prompt(request.prompt);

    const auto it = by_problem_.find(parts.problem);
    if (it == by_problem_.end()) {
      throw Error(ErrorKind::protocol, "mock oracle: unknown problem in prompt");
    }
    const BenchmarkCase* match = nullptr;
    int step_index = -1;
    for (const BenchmarkCase* c : it->second) {
      for (int i = 0; i < static_cast<int>(c->steps.size()); ++i) {
        if (c->steps[i] == parts.now && joined_prefix(*c, i) == parts.previous) {
          match = c;
          step_index = i;
          break;
        }
      }
      if (match) break;
    }
    if (!match) {
      throw Error(ErrorKind::protocol,
                  "mock oracle: prompt does not match any (case, step) in the truth set");
    }

    const bool truth_correct = step_is_correct(*match, step_index);
    GenerationResult result;
    result.texts.reserve(request.num_samples);
    for (int s = 0; s < request.num_samples; ++s) {
      std::uint64_t h = rng::key(seed_, rng::fnv1a64(match->id),
                                 static_cast<std::uint64_t>(step_index),
                                 static_cast<std::uint64_t>(s));
      if (request.seed) h = rng::key(h, *request.seed);
      const bool agree = rng::uniform01(h) < accuracy_;
      const bool verdict_yes = agree ? truth_correct : !truth_correct;
      result.texts.push_back(trajectory_text(verdict_yes));
    }
    // Token scores are not simulated; callers fall back to the binary vote.
    return result;
  }

 private:
  static std::string trajectory_text(bool verdict_yes) {
    std::string out =
        "Analysis: The Now Step applies the stated update to the running total "
        "carried over from the Previous Steps. ";
    if (verdict_yes) {
      out +=
          "Re-deriving the arithmetic for this step reproduces the stated total, "
          "and the step is consistent with the question and the prior work.\n"
          "Conclusion: The recomputed total agrees with the Now Step.\n"
          "Verification: Is the step correct (Yes/No)? Yes";
    } else {
      out +=
          "Re-deriving the arithmetic for this step gives a total different from "
          "the one stated, so the step conflicts with the prior work.\n"
          "Conclusion: The recomputed total disagrees with the Now Step.\n"
          "Verification: Is the step correct (Yes/No)? No";
    }
    return out;
  }

  double accuracy_;
  std::uint64_t seed_;
  std::shared_ptr<const std::vector<BenchmarkCase>> truth_;
  std::map<std::string, std::vector<const BenchmarkCase*>> by_problem_;
};

}  // namespace

std::shared_ptr<Backend> make_mock_oracle_backend(const BackendDescriptor& descriptor) {
  return std::make_shared<MockOracleBackend>(descriptor);
}

}  // namespace prmh
