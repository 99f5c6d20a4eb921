#include "prmh/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "prmh/error.hpp"

namespace prmh::io {

using nlohmann::json;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::io, "read failed for " + path);
  return buf.str();
}

void write_text_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open " + tmp + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::io, "write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::io, "cannot rename " + tmp + " to " + path + ": " + ec.message());
}

void write_lines_atomic(const std::string& path, const std::vector<std::string>& lines) {
  std::string content;
  for (const auto& line : lines) {
    content += line;
    content += '\n';
  }
  write_text_file_atomic(path, content);
}

void for_each_jsonl(const std::string& path,
                    const std::function<void(int, const json&)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool blank = true;
    for (char c : line) {
      if (c != ' ' && c != '\t') { blank = false; break; }
    }
    if (blank) continue;
    json parsed;
    try {
      parsed = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::parse,
                  path + " line " + std::to_string(line_no) + ": " + e.what());
    }
    fn(line_no, parsed);
  }
  if (in.bad()) throw Error(ErrorKind::io, "read failed for " + path);
}

namespace {

const json& require_field(const json& j, const char* name, const char* ctx) {
  auto it = j.find(name);
  if (it == j.end()) {
    throw Error(ErrorKind::parse, std::string(ctx) + ": missing field \"" + name + "\"");
  }
  return *it;
}

}  // namespace

json case_to_json(const BenchmarkCase& c) {
  return json{{"id", c.id},
              {"problem", c.problem},
              {"steps", c.steps},
              {"first_error", c.first_error}};
}

BenchmarkCase case_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::parse, "case: expected an object");
  BenchmarkCase c;
  try {
    c.id = require_field(j, "id", "case").get<std::string>();
    c.problem = require_field(j, "problem", "case").get<std::string>();
    c.steps = require_field(j, "steps", "case").get<std::vector<std::string>>();
    c.first_error = require_field(j, "first_error", "case").get<int>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("case: ") + e.what());
  }
  return c;
}

json trajectory_to_json(const JudgmentTrajectory& t) {
  json j{{"case_id", t.case_id},
         {"step_index", t.step_index},
         {"sample_index", t.sample_index},
         {"analysis", t.analysis},
         {"verdict", verdict_name(t.verdict)}};
  if (t.p_yes) {
    j["p_yes"] = *t.p_yes;
  } else {
    j["p_yes"] = nullptr;
  }
  return j;
}

JudgmentTrajectory trajectory_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::parse, "trajectory: expected an object");
  JudgmentTrajectory t;
  try {
    t.case_id = require_field(j, "case_id", "trajectory").get<std::string>();
    t.step_index = require_field(j, "step_index", "trajectory").get<int>();
    t.sample_index = require_field(j, "sample_index", "trajectory").get<int>();
    t.analysis = require_field(j, "analysis", "trajectory").get<std::string>();
    t.verdict = verdict_from_name(require_field(j, "verdict", "trajectory").get<std::string>());
    const json& p = require_field(j, "p_yes", "trajectory");
    if (!p.is_null()) t.p_yes = p.get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("trajectory: ") + e.what());
  }
  return t;
}

json reward_to_json(const std::string& case_id, const StepReward& r) {
  return json{{"case_id", case_id},
              {"step_index", r.step_index},
              {"value", r.value},
              {"trajectory_count", r.trajectory_count},
              {"per_trajectory_p_yes", r.per_trajectory_p_yes}};
}

std::pair<std::string, StepReward> reward_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::parse, "reward: expected an object");
  StepReward r;
  std::string case_id;
  try {
    case_id = require_field(j, "case_id", "reward").get<std::string>();
    r.step_index = require_field(j, "step_index", "reward").get<int>();
    r.value = require_field(j, "value", "reward").get<double>();
    r.trajectory_count = require_field(j, "trajectory_count", "reward").get<int>();
    r.per_trajectory_p_yes =
        require_field(j, "per_trajectory_p_yes", "reward").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("reward: ") + e.what());
  }
  return {case_id, r};
}

json sft_record_to_json(const SftRecord& r) {
  return json{{"prompt", r.prompt},
              {"target", r.target},
              {"meta", json{{"case_id", r.meta.case_id},
                            {"step_index", r.meta.step_index},
                            {"sample_index", r.meta.sample_index}}}};
}

json dpo_pair_to_json(const PreferencePair& p) {
  return json{{"prompt", p.prompt},
              {"chosen", p.chosen},
              {"rejected", p.rejected},
              {"meta", json{{"case_id", p.meta.case_id},
                            {"step_index", p.meta.step_index},
                            {"chosen_sample", p.meta.chosen_sample},
                            {"rejected_sample", p.meta.rejected_sample}}}};
}

json report_to_json(const EvalReport& report) {
  json per_case = json::array();
  for (const auto& c : report.per_case) {
    per_case.push_back(json{{"case_id", c.case_id},
                            {"predicted", c.predicted},
                            {"gold", c.gold},
                            {"hit", c.hit}});
  }
  json j{{"dataset_name", report.dataset_name}, {"per_case", per_case}};
  j["error_acc"] = report.error_acc ? json(*report.error_acc) : json(nullptr);
  j["correct_acc"] = report.correct_acc ? json(*report.correct_acc) : json(nullptr);
  j["f1"] = report.f1 ? json(*report.f1) : json(nullptr);
  return j;
}

}  // namespace prmh::io
