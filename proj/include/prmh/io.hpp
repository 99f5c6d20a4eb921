#pragma once

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "prmh/backend.hpp"
#include "prmh/case.hpp"
#include "prmh/core.hpp"
#include "prmh/datagen.hpp"
#include "prmh/eval.hpp"
#include "prmh/judge.hpp"

namespace prmh::io {

std::string read_text_file(const std::string& path);

// Writers go through a temp file in the same directory plus a rename, so a
// reader never observes a partial file.
void write_text_file_atomic(const std::string& path, const std::string& content);
void write_lines_atomic(const std::string& path, const std::vector<std::string>& lines);

/// Calls fn(line_number, parsed) per non-blank line; parse failures raise a
/// parse error naming the path and 1-based line number.
void for_each_jsonl(const std::string& path,
                    const std::function<void(int, const nlohmann::json&)>& fn);

nlohmann::json case_to_json(const BenchmarkCase& c);
BenchmarkCase case_from_json(const nlohmann::json& j);

nlohmann::json trajectory_to_json(const JudgmentTrajectory& t);
JudgmentTrajectory trajectory_from_json(const nlohmann::json& j);

nlohmann::json reward_to_json(const std::string& case_id, const StepReward& r);
std::pair<std::string, StepReward> reward_from_json(const nlohmann::json& j);

nlohmann::json sft_record_to_json(const SftRecord& r);
nlohmann::json dpo_pair_to_json(const PreferencePair& p);

nlohmann::json report_to_json(const EvalReport& report);

}  // namespace prmh::io
