#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "prmh/backend.hpp"
#include "prmh/case.hpp"
#include "prmh/search.hpp"

namespace prmh {

struct SynthSpec {
  int num_cases = 100;
  int steps_per_case = 5;
  double error_fraction = 0.5;
  std::uint64_t seed = 0;
};

/// Deterministic arithmetic-chain benchmark: every step states the running
/// total; an erroneous case deviates once at first_error and carries the
/// wrong total forward. Pure function of the spec.
std::vector<BenchmarkCase> generate_cases(const SynthSpec& spec);

struct ScalingRow {
  double accuracy = 0.0;
  int k = 0;
  std::optional<double> error_acc;
  std::optional<double> correct_acc;
  std::optional<double> f1;
  double step_decision_accuracy = 0.0;
  int steps_evaluated = 0;
};

/// Scores the generated benchmark with a mock oracle at each accuracy and
/// each trajectory count, evaluating at the given threshold. Odd trajectory
/// counts avoid ties at the 0.5 boundary.
std::vector<ScalingRow> run_scaling_experiment(const SynthSpec& spec,
                                               const std::vector<double>& accuracies,
                                               const std::vector<int>& ks,
                                               double threshold,
                                               int parallelism = 1);

void write_scaling_csv(const std::string& path, const std::vector<ScalingRow>& rows);

// ---------------------------------------------------------------------------
// Scripted search world: a branch-selection task with one marked correct
// continuation per round, for exercising guided search end to end with a
// policy and judge whose behavior is known exactly.

struct ScriptedWorldConfig {
  std::uint64_t seed = 0;
  int n_candidates = 8;
  int depth = 4;
};

struct ScriptedProblem {
  std::string id;
  std::string problem;
  std::string gold;
};

class ScriptedSearchWorld {
 public:
  explicit ScriptedSearchWorld(ScriptedWorldConfig config);

  ScriptedProblem problem(int index) const;
  std::vector<ScriptedProblem> problems(int count) const;
  int correct_move(const std::string& problem_id, int round) const;
  const ScriptedWorldConfig& config() const { return config_; }

  /// Policy emitting the candidate next steps for the prefix in the prompt.
  std::shared_ptr<Backend> next_step_policy() const;
  /// Policy sampling whole solutions (one per sample) for best-of-n.
  std::shared_ptr<Backend> full_solution_policy() const;
  /// Judge that knows the marked branch: reward 1 iff the prefix and the
  /// candidate all follow it.
  std::unique_ptr<StepJudge> oracle_judge() const;

 private:
  ScriptedWorldConfig config_;
};

// Judge that returns the same reward for every candidate; the argmax tie rule
// then always picks index 0, which serves as the uninformed baseline.
class ConstantJudge : public StepJudge {
 public:
  explicit ConstantJudge(double reward) : reward_(reward) {}
  std::vector<StepReward> score_solution(const std::string& problem,
                                         const std::vector<std::string>& steps) override;
  StepReward score_step(const std::string& problem,
                        const std::vector<std::string>& previous_steps,
                        const std::string& candidate_step) override;

 private:
  double reward_;
};

}  // namespace prmh
