#pragma once

#include <optional>
#include <string>
#include <vector>

#include "prmh/backend.hpp"
#include "prmh/case.hpp"
#include "prmh/core.hpp"

namespace prmh {

enum class Verdict { yes, no, unparseable };

const char* verdict_name(Verdict v);
Verdict verdict_from_name(const std::string& name);

// One sampled judging trajectory for a step. `analysis` is the full sampled
// text, verification line included. p_yes is absent exactly when the verdict
// is unparseable.
struct JudgmentTrajectory {
  std::string case_id;
  int step_index = 0;
  int sample_index = 0;
  std::string analysis;
  Verdict verdict = Verdict::unparseable;
  std::optional<double> p_yes;
};

enum class UnparseablePolicy { drop, count_as_half };
enum class ProbabilitySource { token_softmax, binary_vote, auto_detect };

struct ScoringConfig {
  int k = 10;
  double judge_temperature = 0.7;
  UnparseablePolicy unparseable_policy = UnparseablePolicy::drop;
  ProbabilitySource probability_source = ProbabilitySource::auto_detect;
  std::string prompt_template;  // empty selects the shipped default
  int max_tokens = 2048;
  int parallelism = 1;
};

struct StepScore {
  StepReward reward;
  std::vector<JudgmentTrajectory> trajectories;
};

// The judging prompt shipped with the toolkit (also installed as
// data/judge_prompt.txt). Placeholders: [Math Problem], [Previous Steps],
// [Current Step].
const std::string& default_judge_prompt();

/// Substitutes the case's problem, the steps before step_index (newline
/// joined) and the step under judgment into the template. Every placeholder
/// must occur; nothing else is altered.
std::string build_judge_prompt(const BenchmarkCase& c, int step_index,
                               const std::string& prompt_template);

/// Total: never throws. Scans for the final occurrence of the verification
/// question and reads the answer token after it, tolerating whitespace,
/// asterisks, case and trailing punctuation.
Verdict parse_verdict(std::string_view text);

/// Per-trajectory yes-probability under the configured source. Absent for
/// unparseable verdicts. token_softmax requires usable token scores;
/// auto_detect falls back to the binary vote when they are missing.
std::optional<double> trajectory_p_yes(const JudgmentTrajectory& trajectory,
                                       const std::optional<TokenScoreMap>& token_scores,
                                       const ScoringConfig& config);

/// Samples k trajectories for one step and aggregates them into a StepReward.
/// All k raw trajectories are kept for audit; dropped ones simply do not
/// contribute to the mean.
StepScore score_step(const BenchmarkCase& c, int step_index, Backend& backend,
                     const ScoringConfig& config);

/// Scores every step of the case, each judged against its own prefix only.
/// Steps may be scored concurrently (config.parallelism); results are
/// assembled in step order regardless.
std::vector<StepScore> score_solution(const BenchmarkCase& c, Backend& backend,
                                      const ScoringConfig& config);

std::vector<StepReward> rewards_of(const std::vector<StepScore>& scores);

}  // namespace prmh
