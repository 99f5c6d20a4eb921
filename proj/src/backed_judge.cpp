#include "prmh/backed_judge.hpp"

#include <cinttypes>
#include <cstdio>
#include <utility>

#include "prmh/rng.hpp"

namespace prmh {

namespace {

// Search problems arrive without a benchmark identity; derive a stable id
// from the problem text so trajectories stay attributable.
std::string derived_case_id(const std::string& problem) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "q-%016" PRIx64, rng::fnv1a64(problem));
  return buf;
}

BenchmarkCase make_case(const std::string& problem, std::vector<std::string> steps) {
  BenchmarkCase c;
  c.id = derived_case_id(problem);
  c.problem = problem;
  c.steps = std::move(steps);
  c.first_error = -1;  // unknown; never consulted by prompting or scoring
  return c;
}

}  // namespace

BackedStepJudge::BackedStepJudge(std::shared_ptr<Backend> backend, ScoringConfig config)
    : backend_(std::move(backend)), config_(std::move(config)) {}

std::vector<StepReward> BackedStepJudge::score_solution(
    const std::string& problem, const std::vector<std::string>& steps) {
  const BenchmarkCase c = make_case(problem, steps);
  return rewards_of(prmh::score_solution(c, *backend_, config_));
}

StepReward BackedStepJudge::score_step(const std::string& problem,
                                       const std::vector<std::string>& previous_steps,
                                       const std::string& candidate_step) {
  std::vector<std::string> steps = previous_steps;
  steps.push_back(candidate_step);
  const BenchmarkCase c = make_case(problem, std::move(steps));
  const int index = static_cast<int>(c.steps.size()) - 1;
  return prmh::score_step(c, index, *backend_, config_).reward;
}

}  // namespace prmh
