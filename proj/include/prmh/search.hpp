#pragma once

#include <optional>
#include <string>
#include <vector>

#include "prmh/backend.hpp"
#include "prmh/core.hpp"

namespace prmh {

struct CandidateSolution {
  std::vector<std::string> steps;
  std::optional<std::string> final_answer;
  bool terminal = false;
};

enum class Reduction { min, product, last, mean };

Reduction reduction_from_name(const std::string& name);
const char* reduction_name(Reduction r);

struct SearchConfig {
  int n_candidates = 8;
  int max_steps = 8;
  Reduction reduction = Reduction::min;
  double policy_temperature = 1.0;
  int policy_max_tokens = 1024;
  int parallelism = 1;
};

struct CandidateTrace {
  std::string text;
  double step_reward = 0.0;
  bool chosen = false;
};

struct RoundTrace {
  std::vector<CandidateTrace> candidates;
  int chosen_index = -1;
};

struct SearchResult {
  CandidateSolution chosen;
  std::vector<double> per_candidate_scores;  // final round for guided search
  int rounds = 0;
  std::vector<RoundTrace> trace;
  int chosen_index = -1;
  double chosen_score = 0.0;
};

// Scoring interface the search strategies drive. Implementations judge a
// candidate step against the problem and the prefix it extends.
class StepJudge {
 public:
  virtual ~StepJudge() = default;
  virtual std::vector<StepReward> score_solution(const std::string& problem,
                                                 const std::vector<std::string>& steps) = 0;
  virtual StepReward score_step(const std::string& problem,
                                const std::vector<std::string>& previous_steps,
                                const std::string& candidate_step) = 0;
};

/// Collapses per-step rewards into one solution score.
double reduce_solution_score(const std::vector<StepReward>& rewards, Reduction reduction);

/// Scores every candidate, reduces, and picks the argmax (ties resolve to the
/// lowest index).
SearchResult best_of_n(const std::string& problem,
                       const std::vector<CandidateSolution>& candidates,
                       StepJudge& judge, const SearchConfig& config);

/// Round by round: samples n_candidates next steps from the policy
/// conditioned on the chosen prefix, scores each as the step under judgment,
/// appends the best, and stops on a terminal step or after max_steps rounds.
SearchResult greedy_guided_search(const std::string& problem, Backend& policy,
                                  StepJudge& judge, const SearchConfig& config);

/// Last well-formed \boxed{...} marker, brace-balanced, normalized.
std::optional<std::string> extract_final_answer(std::string_view text);

std::string normalize_answer(std::string_view answer);

/// Splits raw policy text into steps: blank lines separate steps and a
/// "Step <number>:" prefix starts a new one.
std::vector<std::string> segment_steps(std::string_view text);

/// Most frequent answer; ties resolve to the earliest first occurrence.
std::string majority_vote(const std::vector<std::string>& answers);

struct PassAtKItem {
  std::vector<std::string> answers;
  std::string gold;
};

/// Percentage of problems where any of the answers matches gold exactly
/// (after normalization by the caller).
double pass_at_k(const std::vector<PassAtKItem>& items);

}  // namespace prmh
