#include "prmh/datagen.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "prmh/error.hpp"
#include "prmh/io.hpp"

namespace prmh {

const char* human_label_name(HumanLabel label) {
  switch (label) {
    case HumanLabel::correct: return "correct";
    case HumanLabel::incorrect: return "incorrect";
    case HumanLabel::neutral: return "neutral";
  }
  return "?";
}

HumanLabel human_label_from_name(const std::string& name) {
  if (name == "correct") return HumanLabel::correct;
  if (name == "incorrect") return HumanLabel::incorrect;
  if (name == "neutral") return HumanLabel::neutral;
  throw Error(ErrorKind::parse, "unknown step label: " + name);
}

bool is_consistent(const JudgmentTrajectory& trajectory, HumanLabel label) {
  if (label == HumanLabel::neutral) {
    throw Error(ErrorKind::invalid_argument,
                "is_consistent: neutral labels carry no agreement signal");
  }
  switch (trajectory.verdict) {
    case Verdict::yes: return label == HumanLabel::correct;
    case Verdict::no: return label == HumanLabel::incorrect;
    case Verdict::unparseable: return false;
  }
  return false;
}

namespace {

void check_labeled(const LabeledStepCase& labeled) {
  validate_case(labeled.bench_case);
  if (labeled.step_index < 0 ||
      labeled.step_index >= static_cast<int>(labeled.bench_case.steps.size())) {
    throw Error(ErrorKind::validation,
                "case " + labeled.bench_case.id + ": labeled step " +
                    std::to_string(labeled.step_index) + " out of range");
  }
}

void check_trajectory_origin(const LabeledStepCase& labeled,
                             const JudgmentTrajectory& t) {
  if (t.case_id != labeled.bench_case.id || t.step_index != labeled.step_index) {
    throw Error(ErrorKind::validation,
                "trajectory for case " + t.case_id + " step " +
                    std::to_string(t.step_index) + " offered against case " +
                    labeled.bench_case.id + " step " +
                    std::to_string(labeled.step_index));
  }
}

std::string labeled_prompt(const LabeledStepCase& labeled,
                           const std::string& prompt_template) {
  const std::string& tpl =
      prompt_template.empty() ? default_judge_prompt() : prompt_template;
  return build_judge_prompt(labeled.bench_case, labeled.step_index, tpl);
}

}  // namespace

SftBuild build_sft_records(const LabeledStepCase& labeled,
                           const std::vector<JudgmentTrajectory>& trajectories,
                           int m, const std::string& prompt_template) {
  if (m < 1) {
    throw Error(ErrorKind::invalid_argument, "build_sft_records: m must be >= 1");
  }
  check_labeled(labeled);
  SftBuild out;
  if (labeled.human_label == HumanLabel::neutral) {
    out.skipped_neutral = 1;
    return out;
  }
  const std::string prompt = labeled_prompt(labeled, prompt_template);
  const std::size_t take =
      std::min<std::size_t>(static_cast<std::size_t>(m), trajectories.size());
  for (std::size_t t = 0; t < take; ++t) {
    const JudgmentTrajectory& traj = trajectories[t];
    check_trajectory_origin(labeled, traj);
    ++out.considered;
    if (!is_consistent(traj, labeled.human_label)) {
      ++out.filtered;
      continue;
    }
    ++out.kept;
    SftRecord rec;
    rec.prompt = prompt;
    rec.target = traj.analysis;
    rec.meta = SftMeta{traj.case_id, traj.step_index, traj.sample_index};
    out.records.push_back(std::move(rec));
  }
  return out;
}

DpoBuild build_dpo_pairs(const LabeledStepCase& labeled,
                         const std::vector<JudgmentTrajectory>& trajectories,
                         int cap, const std::string& prompt_template) {
  if (cap < 1) {
    throw Error(ErrorKind::invalid_argument, "build_dpo_pairs: cap must be >= 1");
  }
  check_labeled(labeled);
  DpoBuild out;
  if (labeled.human_label == HumanLabel::neutral) {
    out.skipped_neutral = 1;
    return out;
  }
  std::vector<const JudgmentTrajectory*> winners, losers;
  for (const JudgmentTrajectory& traj : trajectories) {
    check_trajectory_origin(labeled, traj);
    if (traj.verdict == Verdict::unparseable) {
      ++out.unparseable;
    } else if (is_consistent(traj, labeled.human_label)) {
      ++out.consistent;
      winners.push_back(&traj);
    } else {
      ++out.inconsistent;
      losers.push_back(&traj);
    }
  }
  if (winners.empty() || losers.empty()) return out;
  const std::string prompt = labeled_prompt(labeled, prompt_template);
  for (const JudgmentTrajectory* w : winners) {
    for (const JudgmentTrajectory* l : losers) {
      if (static_cast<int>(out.pairs.size()) >= cap) return out;
      PreferencePair pair;
      pair.prompt = prompt;
      pair.chosen = w->analysis;
      pair.rejected = l->analysis;
      pair.meta = DpoMeta{labeled.bench_case.id, labeled.step_index,
                          w->sample_index, l->sample_index};
      out.pairs.push_back(std::move(pair));
    }
  }
  return out;
}

ExportResult export_sft(const std::vector<SftRecord>& records, const std::string& path) {
  ExportResult result;
  std::set<std::tuple<std::string, int, int>> seen;
  std::vector<std::string> lines;
  lines.reserve(records.size());
  for (const SftRecord& rec : records) {
    if (!seen.insert({rec.meta.case_id, rec.meta.step_index, rec.meta.sample_index})
             .second) {
      ++result.deduplicated;
      continue;
    }
    lines.push_back(io::sft_record_to_json(rec).dump());
  }
  result.written = static_cast<int>(lines.size());
  io::write_lines_atomic(path, lines);
  return result;
}

ExportResult export_dpo(const std::vector<PreferencePair>& pairs, const std::string& path) {
  ExportResult result;
  std::set<std::tuple<std::string, int, int, int>> seen;
  std::vector<std::string> lines;
  lines.reserve(pairs.size());
  for (const PreferencePair& pair : pairs) {
    if (!seen.insert({pair.meta.case_id, pair.meta.step_index, pair.meta.chosen_sample,
                      pair.meta.rejected_sample})
             .second) {
      ++result.deduplicated;
      continue;
    }
    lines.push_back(io::dpo_pair_to_json(pair).dump());
  }
  result.written = static_cast<int>(lines.size());
  io::write_lines_atomic(path, lines);
  return result;
}

}  // namespace prmh
