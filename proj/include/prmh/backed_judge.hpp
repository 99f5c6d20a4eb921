#pragma once

#include <memory>

#include "prmh/judge.hpp"
#include "prmh/search.hpp"

namespace prmh {

// StepJudge backed by a generation backend running the judging prompt.
class BackedStepJudge : public StepJudge {
 public:
  BackedStepJudge(std::shared_ptr<Backend> backend, ScoringConfig config);

  std::vector<StepReward> score_solution(const std::string& problem,
                                         const std::vector<std::string>& steps) override;
  StepReward score_step(const std::string& problem,
                        const std::vector<std::string>& previous_steps,
                        const std::string& candidate_step) override;

 private:
  std::shared_ptr<Backend> backend_;
  ScoringConfig config_;
};

}  // namespace prmh
