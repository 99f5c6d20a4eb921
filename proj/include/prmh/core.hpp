#pragma once

#include <span>
#include <vector>

namespace prmh {

// Reward record for one solution step: the mean yes-probability over the
// judging trajectories sampled for that step. trajectory_count is the number
// of trajectories sampled; per_trajectory_p_yes holds the probabilities that
// entered the mean (unparseable trajectories may have been dropped, so the
// list can be shorter than trajectory_count).
struct StepReward {
  int step_index = 0;
  double value = 0.0;
  int trajectory_count = 0;
  std::vector<double> per_trajectory_p_yes;
};

struct DpoLossParams {
  double beta = 0.1;
  double logp_chosen_policy = 0.0;
  double logp_chosen_ref = 0.0;
  double logp_rejected_policy = 0.0;
  double logp_rejected_ref = 0.0;
};

/// Softmax probability of the "yes" logit against the "no" logit.
/// Stable for large magnitudes; throws on non-finite input.
double yes_probability(double yes_logit, double no_logit);

/// Arithmetic mean of per-trajectory yes-probabilities.
/// Throws on an empty list or on values outside [0, 1].
double aggregate_rewards(std::span<const double> per_trajectory_p_yes);

/// Harmonic mean of the two accuracies on the 0-100 scale; 0 when both are 0.
double f1_score(double error_acc, double correct_acc);

/// Preference-pair loss -log sigmoid(beta * margin), where margin is the
/// chosen log-ratio minus the rejected log-ratio against the reference.
double dpo_pair_loss(const DpoLossParams& params);

StepReward make_step_reward(int step_index, std::vector<double> per_trajectory_p_yes);
void validate_step_reward(const StepReward& reward);

}  // namespace prmh
