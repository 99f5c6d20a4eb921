#pragma once

#include <string>
#include <vector>

#include "prmh/case.hpp"
#include "prmh/judge.hpp"

namespace prmh {

enum class HumanLabel { correct, incorrect, neutral };

HumanLabel human_label_from_name(const std::string& name);
const char* human_label_name(HumanLabel label);

struct LabeledStepCase {
  BenchmarkCase bench_case;
  int step_index = 0;
  HumanLabel human_label = HumanLabel::correct;
};

struct SftMeta {
  std::string case_id;
  int step_index = 0;
  int sample_index = 0;
};

struct SftRecord {
  std::string prompt;
  std::string target;
  SftMeta meta;
};

struct DpoMeta {
  std::string case_id;
  int step_index = 0;
  int chosen_sample = 0;
  int rejected_sample = 0;
};

struct PreferencePair {
  std::string prompt;
  std::string chosen;
  std::string rejected;
  DpoMeta meta;
};

/// Whether the trajectory's verdict agrees with the human step label.
/// Unparseable is never consistent; a neutral label is a caller error.
bool is_consistent(const JudgmentTrajectory& trajectory, HumanLabel label);

struct SftBuild {
  std::vector<SftRecord> records;
  int considered = 0;
  int kept = 0;
  int filtered = 0;
  int skipped_neutral = 0;
};

/// Keeps the label-consistent trajectories among the first m sampled for this
/// (case, step); each retained trajectory becomes one record whose target is
/// the trajectory text verbatim. Neutral-label inputs yield no records and
/// bump the skip counter.
SftBuild build_sft_records(const LabeledStepCase& labeled,
                           const std::vector<JudgmentTrajectory>& trajectories,
                           int m = 4, const std::string& prompt_template = "");

struct DpoBuild {
  std::vector<PreferencePair> pairs;
  int consistent = 0;
  int inconsistent = 0;
  int unparseable = 0;
  int skipped_neutral = 0;
};

/// Pairs every consistent trajectory (chosen) with every parseable
/// inconsistent one (rejected), in lexicographic (chosen, rejected) sample
/// order, truncated to cap pairs.
DpoBuild build_dpo_pairs(const LabeledStepCase& labeled,
                         const std::vector<JudgmentTrajectory>& trajectories,
                         int cap = 4, const std::string& prompt_template = "");

struct ExportResult {
  int written = 0;
  int deduplicated = 0;
};

// JSON-lines export; the file appears atomically (temp file + rename) and
// duplicate meta keys are dropped with a count.
ExportResult export_sft(const std::vector<SftRecord>& records, const std::string& path);
ExportResult export_dpo(const std::vector<PreferencePair>& pairs, const std::string& path);

}  // namespace prmh
