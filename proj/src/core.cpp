#include "prmh/core.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

#include "prmh/error.hpp"

namespace prmh {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::empty_input: return "empty_input";
    case ErrorKind::parse: return "parse";
    case ErrorKind::validation: return "validation";
    case ErrorKind::alignment: return "alignment";
    case ErrorKind::template_error: return "template";
    case ErrorKind::config: return "config";
    case ErrorKind::scoring: return "scoring";
    case ErrorKind::search: return "search";
    case ErrorKind::vote: return "vote";
    case ErrorKind::transport: return "transport";
    case ErrorKind::protocol: return "protocol";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

double yes_probability(double yes_logit, double no_logit) {
  if (!std::isfinite(yes_logit) || !std::isfinite(no_logit)) {
    throw Error(ErrorKind::invalid_argument, "yes_probability: logits must be finite");
  }
  const double m = yes_logit > no_logit ? yes_logit : no_logit;
  const double ey = std::exp(yes_logit - m);
  const double en = std::exp(no_logit - m);
  return ey / (ey + en);
}

double aggregate_rewards(std::span<const double> per_trajectory_p_yes) {
  if (per_trajectory_p_yes.empty()) {
    throw Error(ErrorKind::empty_input, "aggregate_rewards: empty probability list");
  }
  double sum = 0.0;
  for (double p : per_trajectory_p_yes) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorKind::invalid_argument,
                  "aggregate_rewards: probability outside [0, 1]");
    }
    sum += p;
  }
  return sum / static_cast<double>(per_trajectory_p_yes.size());
}

double f1_score(double error_acc, double correct_acc) {
  if (!(error_acc >= 0.0 && error_acc <= 100.0) ||
      !(correct_acc >= 0.0 && correct_acc <= 100.0)) {
    throw Error(ErrorKind::invalid_argument, "f1_score: accuracies must be in [0, 100]");
  }
  const double sum = error_acc + correct_acc;
  if (sum == 0.0) return 0.0;
  return 2.0 * error_acc * correct_acc / sum;
}

double dpo_pair_loss(const DpoLossParams& params) {
  if (!std::isfinite(params.beta) || params.beta <= 0.0) {
    throw Error(ErrorKind::invalid_argument, "dpo_pair_loss: beta must be finite and > 0");
  }
  for (double v : {params.logp_chosen_policy, params.logp_chosen_ref,
                   params.logp_rejected_policy, params.logp_rejected_ref}) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::invalid_argument, "dpo_pair_loss: log-probs must be finite");
    }
  }
  const double margin = (params.logp_chosen_policy - params.logp_chosen_ref) -
                        (params.logp_rejected_policy - params.logp_rejected_ref);
  const double z = params.beta * margin;
  // -log(sigmoid(z)) without overflow on either tail.
  return z >= 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

StepReward make_step_reward(int step_index, std::vector<double> per_trajectory_p_yes) {
  StepReward r;
  r.step_index = step_index;
  r.value = aggregate_rewards(per_trajectory_p_yes);
  r.trajectory_count = static_cast<int>(per_trajectory_p_yes.size());
  r.per_trajectory_p_yes = std::move(per_trajectory_p_yes);
  return r;
}

void validate_step_reward(const StepReward& reward) {
  auto fail = [&](const char* what) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "step reward %d: %s", reward.step_index, what);
    throw Error(ErrorKind::validation, buf);
  };
  if (reward.per_trajectory_p_yes.empty()) fail("no retained probabilities");
  if (reward.trajectory_count < static_cast<int>(reward.per_trajectory_p_yes.size())) {
    fail("trajectory_count below retained list size");
  }
  for (double p : reward.per_trajectory_p_yes) {
    if (!(p >= 0.0 && p <= 1.0)) fail("probability outside [0, 1]");
  }
  const double mean = aggregate_rewards(reward.per_trajectory_p_yes);
  if (std::fabs(mean - reward.value) > 1e-12) fail("value does not match the mean");
}

}  // namespace prmh
