#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <tuple>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "prmh/backed_judge.hpp"
#include "prmh/backend.hpp"
#include "prmh/case.hpp"
#include "prmh/core.hpp"
#include "prmh/datagen.hpp"
#include "prmh/error.hpp"
#include "prmh/eval.hpp"
#include "prmh/io.hpp"
#include "prmh/judge.hpp"
#include "prmh/search.hpp"
#include "prmh/synthetic.hpp"

namespace {

using nlohmann::json;

int exit_code_for(prmh::ErrorKind kind) {
  switch (kind) {
    case prmh::ErrorKind::invalid_argument:
    case prmh::ErrorKind::empty_input:
    case prmh::ErrorKind::parse:
    case prmh::ErrorKind::validation:
    case prmh::ErrorKind::template_error:
    case prmh::ErrorKind::config:
    case prmh::ErrorKind::vote:
    case prmh::ErrorKind::io:
      return 2;
    case prmh::ErrorKind::alignment:
      return 3;
    case prmh::ErrorKind::transport:
    case prmh::ErrorKind::protocol:
    case prmh::ErrorKind::scoring:
    case prmh::ErrorKind::search:
      return 4;
  }
  return 1;
}

void print_error_line(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

// Config-file values; anything absent falls through to the defaults.
struct FileConfig {
  std::optional<std::uint64_t> seed;
  std::optional<int> parallelism;
  std::optional<std::string> api_base;
  std::optional<std::string> api_key;
  std::optional<int> k;
  std::optional<double> threshold;
};

FileConfig load_config_file(const std::string& path) {
  FileConfig fc;
  if (path.empty()) return fc;
  json j;
  try {
    j = json::parse(prmh::io::read_text_file(path));
  } catch (const json::exception& e) {
    throw prmh::Error(prmh::ErrorKind::config,
                      "config file " + path + ": " + e.what());
  }
  if (!j.is_object()) {
    throw prmh::Error(prmh::ErrorKind::config,
                      "config file " + path + ": expected a JSON object");
  }
  auto bad = [&](const char* key, const char* want) {
    return prmh::Error(prmh::ErrorKind::config, "config file " + path + ": key '" +
                                                    key + "' must be " + want);
  };
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw bad("seed", "an unsigned integer");
    fc.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("parallelism")) {
    if (!j["parallelism"].is_number_integer()) throw bad("parallelism", "an integer");
    fc.parallelism = j["parallelism"].get<int>();
  }
  if (j.contains("api_base")) {
    if (!j["api_base"].is_string()) throw bad("api_base", "a string");
    fc.api_base = j["api_base"].get<std::string>();
  }
  if (j.contains("api_key")) {
    if (!j["api_key"].is_string()) throw bad("api_key", "a string");
    fc.api_key = j["api_key"].get<std::string>();
  }
  if (j.contains("k")) {
    if (!j["k"].is_number_integer()) throw bad("k", "an integer");
    fc.k = j["k"].get<int>();
  }
  if (j.contains("threshold")) {
    if (!j["threshold"].is_number()) throw bad("threshold", "a number");
    fc.threshold = j["threshold"].get<double>();
  }
  return fc;
}

std::optional<std::string> env_string(const char* name) {
  const char* v = std::getenv(name);
  if (!v) return std::nullopt;
  return std::string(v);
}

std::optional<std::uint64_t> env_u64(const char* name) {
  auto s = env_string(name);
  if (!s) return std::nullopt;
  try {
    std::size_t used = 0;
    const std::uint64_t v = std::stoull(*s, &used);
    if (used != s->size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw prmh::Error(prmh::ErrorKind::config,
                      std::string(name) + ": not an unsigned integer: " + *s);
  }
}

std::optional<int> env_int(const char* name) {
  auto s = env_string(name);
  if (!s) return std::nullopt;
  try {
    std::size_t used = 0;
    const int v = std::stoi(*s, &used);
    if (used != s->size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw prmh::Error(prmh::ErrorKind::config,
                      std::string(name) + ": not an integer: " + *s);
  }
}

// Flags beat environment variables beat the config file beat defaults.
template <typename T>
T layered(bool flag_given, const T& flag_value, const std::optional<T>& env_value,
          const std::optional<T>& file_value, const T& fallback) {
  if (flag_given) return flag_value;
  if (env_value) return *env_value;
  if (file_value) return *file_value;
  return fallback;
}

struct GlobalSettings {
  std::uint64_t seed = 0;
  int parallelism = 1;
  std::string api_base;
  std::string api_key;
  FileConfig file;
};

std::vector<double> parse_double_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string item =
        text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw prmh::Error(prmh::ErrorKind::config,
                        std::string(what) + ": not a number: '" + item + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  for (double v : parse_double_list(text, what)) {
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) {
      throw prmh::Error(prmh::ErrorKind::config,
                        std::string(what) + ": not an integer: " + std::to_string(v));
    }
    out.push_back(i);
  }
  return out;
}

prmh::UnparseablePolicy policy_from_name(const std::string& name) {
  if (name == "drop") return prmh::UnparseablePolicy::drop;
  if (name == "half") return prmh::UnparseablePolicy::count_as_half;
  throw prmh::Error(prmh::ErrorKind::config, "unknown unparseable policy: " + name);
}

prmh::ProbabilitySource source_from_name(const std::string& name) {
  if (name == "auto") return prmh::ProbabilitySource::auto_detect;
  if (name == "softmax") return prmh::ProbabilitySource::token_softmax;
  if (name == "vote") return prmh::ProbabilitySource::binary_vote;
  throw prmh::Error(prmh::ErrorKind::config, "unknown probability source: " + name);
}

// ---------------------------------------------------------------------------
// score

struct ScoreArgs {
  std::string cases_path;
  std::string backend = "mock";
  double accuracy = 1.0;
  std::string fixture;
  bool keyed = false;
  std::string model;
  int k = 10;
  bool k_given = false;
  double temperature = 0.7;
  std::string policy = "drop";
  std::string source = "auto";
  std::string template_path;
  int max_tokens = 2048;
  std::string out_rewards = "rewards.jsonl";
  std::string out_trajectories = "trajectories.jsonl";
};

std::shared_ptr<prmh::Backend> build_backend(const std::string& kind,
                                             const std::vector<prmh::BenchmarkCase>& truth,
                                             double accuracy, const std::string& fixture,
                                             bool keyed, const std::string& model,
                                             const GlobalSettings& g) {
  prmh::BackendDescriptor d;
  if (kind == "mock") {
    d = prmh::mock_oracle_configure(truth, accuracy, g.seed);
  } else if (kind == "replay") {
    if (fixture.empty()) {
      throw prmh::Error(prmh::ErrorKind::config, "replay backend needs --fixture");
    }
    d = prmh::replay_configure(prmh::load_replay_fixture(fixture), keyed);
  } else if (kind == "http") {
    d.kind = prmh::BackendKind::http;
    d.endpoint = g.api_base;
    d.model_name = model;
    d.api_key = g.api_key;
  } else {
    throw prmh::Error(prmh::ErrorKind::config, "unknown backend: " + kind);
  }
  return prmh::make_backend(d);
}

int run_score(const ScoreArgs& a, const GlobalSettings& g) {
  const std::vector<prmh::BenchmarkCase> cases = prmh::load_benchmark(a.cases_path);
  const auto backend = build_backend(a.backend, cases, a.accuracy, a.fixture,
                                     a.keyed, a.model, g);
  prmh::ScoringConfig sc;
  sc.k = layered(a.k_given, a.k, std::optional<int>{}, g.file.k, 10);
  sc.judge_temperature = a.temperature;
  sc.unparseable_policy = policy_from_name(a.policy);
  sc.probability_source = source_from_name(a.source);
  if (!a.template_path.empty()) {
    sc.prompt_template = prmh::io::read_text_file(a.template_path);
  }
  sc.max_tokens = a.max_tokens;
  sc.parallelism = g.parallelism;

  std::vector<std::string> reward_lines;
  std::vector<std::string> trajectory_lines;
  for (const prmh::BenchmarkCase& c : cases) {
    const std::vector<prmh::StepScore> scores = prmh::score_solution(c, *backend, sc);
    for (const prmh::StepScore& s : scores) {
      reward_lines.push_back(prmh::io::reward_to_json(c.id, s.reward).dump());
      for (const prmh::JudgmentTrajectory& t : s.trajectories) {
        trajectory_lines.push_back(prmh::io::trajectory_to_json(t).dump());
      }
    }
  }
  prmh::io::write_lines_atomic(a.out_rewards, reward_lines);
  prmh::io::write_lines_atomic(a.out_trajectories, trajectory_lines);
  std::cout << json{{"cases", cases.size()},
                    {"steps", reward_lines.size()},
                    {"trajectories", trajectory_lines.size()},
                    {"rewards_file", a.out_rewards},
                    {"trajectories_file", a.out_trajectories}}
                   .dump()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval / sweep

struct EvalArgs {
  std::string cases_path;
  std::string rewards_path;
  double threshold = 0.5;
  bool threshold_given = false;
  std::string dataset_name;
  bool sweep = false;
  std::string grid = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";
  std::string out_csv;
};

std::vector<std::vector<prmh::StepReward>> align_rewards(
    const std::vector<prmh::BenchmarkCase>& cases, const std::string& rewards_path) {
  std::map<std::string, std::vector<prmh::StepReward>> by_case;
  prmh::io::for_each_jsonl(rewards_path, [&](int line_no, const json& j) {
    std::string case_id;
    prmh::StepReward r;
    try {
      std::tie(case_id, r) = prmh::io::reward_from_json(j);
    } catch (const prmh::Error& e) {
      throw prmh::Error(e.kind(), rewards_path + " line " + std::to_string(line_no) +
                                      ": " + e.what());
    }
    if (!(r.value >= 0.0 && r.value <= 1.0)) {
      throw prmh::Error(prmh::ErrorKind::validation,
                        rewards_path + " line " + std::to_string(line_no) +
                            ": reward value out of [0, 1]");
    }
    by_case[case_id].push_back(std::move(r));
  });
  std::vector<std::vector<prmh::StepReward>> aligned;
  aligned.reserve(cases.size());
  for (const prmh::BenchmarkCase& c : cases) {
    auto it = by_case.find(c.id);
    if (it == by_case.end()) {
      throw prmh::Error(prmh::ErrorKind::alignment, "case " + c.id + ": no rewards");
    }
    std::vector<prmh::StepReward> ordered(c.steps.size());
    std::vector<bool> seen(c.steps.size(), false);
    for (prmh::StepReward& r : it->second) {
      if (r.step_index < 0 || r.step_index >= static_cast<int>(c.steps.size()) ||
          seen[static_cast<std::size_t>(r.step_index)]) {
        throw prmh::Error(prmh::ErrorKind::alignment,
                          "case " + c.id + ": rewards do not cover steps 0.." +
                              std::to_string(c.steps.size() - 1) + " exactly once");
      }
      seen[static_cast<std::size_t>(r.step_index)] = true;
      ordered[static_cast<std::size_t>(r.step_index)] = std::move(r);
    }
    for (bool s : seen) {
      if (!s) {
        throw prmh::Error(prmh::ErrorKind::alignment,
                          "case " + c.id + ": rewards do not cover steps 0.." +
                              std::to_string(c.steps.size() - 1) + " exactly once");
      }
    }
    aligned.push_back(std::move(ordered));
    by_case.erase(it);
  }
  if (!by_case.empty()) {
    throw prmh::Error(prmh::ErrorKind::alignment,
                      "rewards name unknown case " + by_case.begin()->first);
  }
  return aligned;
}

int run_eval(const EvalArgs& a, const GlobalSettings& g, bool sweep_only) {
  const std::vector<prmh::BenchmarkCase> cases = prmh::load_benchmark(a.cases_path);
  const auto aligned = align_rewards(cases, a.rewards_path);
  prmh::EvalConfig ec;
  ec.threshold =
      layered(a.threshold_given, a.threshold, std::optional<double>{}, g.file.threshold, 0.5);
  const bool want_sweep = sweep_only || a.sweep;
  if (want_sweep) {
    if (a.out_csv.empty()) {
      throw prmh::Error(prmh::ErrorKind::config, "sweep needs --out-csv");
    }
    ec.sweep_grid = parse_double_list(a.grid, "--grid");
  }
  if (!sweep_only) {
    const prmh::EvalReport report = prmh::evaluate(cases, aligned, ec, a.dataset_name);
    std::cout << prmh::io::report_to_json(report).dump() << "\n";
  }
  if (want_sweep) {
    const auto rows = prmh::threshold_sweep(cases, aligned, ec, a.dataset_name);
    prmh::write_sweep_csv(a.out_csv, rows);
    if (sweep_only) {
      std::cout << json{{"rows", rows.size()}, {"csv", a.out_csv}}.dump() << "\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// search

struct SearchArgs {
  std::string mode = "guided";
  std::string world;
  std::string problems_path;
  int num_problems = 100;
  int depth = 4;
  std::string judge = "oracle";
  double constant_reward = 0.5;
  std::string model;
  int k = 10;
  bool k_given = false;
  int n = 8;
  int max_steps = 8;
  std::string reduction = "min";
  double policy_temperature = 1.0;
  int policy_max_tokens = 1024;
  std::string out = "search_results.jsonl";
  bool baselines = false;
};

struct SearchProblem {
  std::string id;
  std::string problem;
  std::optional<std::string> gold;
};

json trace_to_json(const prmh::SearchResult& r) {
  json rounds = json::array();
  for (const prmh::RoundTrace& round : r.trace) {
    json candidates = json::array();
    for (const prmh::CandidateTrace& c : round.candidates) {
      candidates.push_back(json{
          {"text", c.text}, {"step_reward", c.step_reward}, {"chosen", c.chosen}});
    }
    rounds.push_back(
        json{{"candidates", std::move(candidates)}, {"chosen_index", round.chosen_index}});
  }
  return rounds;
}

int run_search(const SearchArgs& a, const GlobalSettings& g) {
  if (a.mode != "bon" && a.mode != "guided") {
    throw prmh::Error(prmh::ErrorKind::config, "unknown search mode: " + a.mode);
  }
  if (a.baselines && a.mode != "bon") {
    throw prmh::Error(prmh::ErrorKind::config, "--baselines requires --mode bon");
  }

  std::vector<SearchProblem> problems;
  std::shared_ptr<prmh::Backend> policy;
  std::unique_ptr<prmh::StepJudge> judge;

  if (!a.world.empty()) {
    if (a.world != "scripted") {
      throw prmh::Error(prmh::ErrorKind::config, "unknown world: " + a.world);
    }
    prmh::ScriptedWorldConfig wc;
    wc.seed = g.seed;
    wc.n_candidates = a.n;
    wc.depth = a.depth;
    prmh::ScriptedSearchWorld world(wc);
    for (const prmh::ScriptedProblem& p : world.problems(a.num_problems)) {
      problems.push_back({p.id, p.problem, p.gold});
    }
    policy = a.mode == "guided" ? world.next_step_policy() : world.full_solution_policy();
    if (a.judge == "oracle") {
      judge = world.oracle_judge();
    } else if (a.judge == "constant") {
      judge = std::make_unique<prmh::ConstantJudge>(a.constant_reward);
    } else {
      throw prmh::Error(prmh::ErrorKind::config, "unknown judge: " + a.judge);
    }
  } else {
    if (a.problems_path.empty()) {
      throw prmh::Error(prmh::ErrorKind::config,
                        "search needs --world scripted or --problems FILE");
    }
    prmh::io::for_each_jsonl(a.problems_path, [&](int line_no, const json& j) {
      if (!j.is_object() || !j.contains("id") || !j.contains("problem") ||
          !j["id"].is_string() || !j["problem"].is_string()) {
        throw prmh::Error(prmh::ErrorKind::parse,
                          a.problems_path + " line " + std::to_string(line_no) +
                              ": expected {id, problem, gold?}");
      }
      SearchProblem p;
      p.id = j["id"].get<std::string>();
      p.problem = j["problem"].get<std::string>();
      if (j.contains("gold") && !j["gold"].is_null()) {
        if (!j["gold"].is_string()) {
          throw prmh::Error(prmh::ErrorKind::parse,
                            a.problems_path + " line " + std::to_string(line_no) +
                                ": gold must be a string");
        }
        p.gold = j["gold"].get<std::string>();
      }
      problems.push_back(std::move(p));
    });
    prmh::BackendDescriptor d;
    d.kind = prmh::BackendKind::http;
    d.endpoint = g.api_base;
    d.model_name = a.model;
    d.api_key = g.api_key;
    policy = prmh::make_backend(d);
    prmh::ScoringConfig sc;
    sc.k = layered(a.k_given, a.k, std::optional<int>{}, g.file.k, 10);
    sc.parallelism = g.parallelism;
    judge = std::make_unique<prmh::BackedStepJudge>(policy, sc);
  }

  prmh::SearchConfig scfg;
  scfg.n_candidates = a.n;
  scfg.max_steps = a.max_steps;
  scfg.reduction = prmh::reduction_from_name(a.reduction);
  scfg.policy_temperature = a.policy_temperature;
  scfg.policy_max_tokens = a.policy_max_tokens;
  scfg.parallelism = g.parallelism;

  std::vector<std::string> lines;
  json failures = json::array();
  int with_gold = 0, solved = 0, maj_hits = 0, pass_hits = 0;
  for (const SearchProblem& p : problems) {
    try {
      prmh::SearchResult result;
      std::vector<std::string> candidate_answers;
      if (a.mode == "bon") {
        prmh::GenerationRequest req;
        req.prompt = p.problem;
        req.temperature = a.policy_temperature;
        req.num_samples = a.n;
        req.max_tokens = a.policy_max_tokens;
        req.seed = g.seed;
        const prmh::GenerationResult gen = policy->generate(req);
        std::vector<prmh::CandidateSolution> candidates;
        for (const std::string& sample_text : gen.texts) {
          prmh::CandidateSolution cand;
          cand.steps = prmh::segment_steps(sample_text);
          if (cand.steps.empty()) continue;
          cand.final_answer = prmh::extract_final_answer(sample_text);
          cand.terminal = cand.final_answer.has_value();
          if (cand.final_answer) candidate_answers.push_back(*cand.final_answer);
          candidates.push_back(std::move(cand));
        }
        if (candidates.empty()) {
          throw prmh::Error(prmh::ErrorKind::search,
                            "problem " + p.id + ": no usable candidates");
        }
        result = prmh::best_of_n(p.problem, candidates, *judge, scfg);
      } else {
        result = prmh::greedy_guided_search(p.problem, *policy, *judge, scfg);
      }

      std::optional<bool> hit;
      if (p.gold) {
        ++with_gold;
        const std::string gold_norm = prmh::normalize_answer(*p.gold);
        hit = result.chosen.final_answer && *result.chosen.final_answer == gold_norm;
        if (*hit) ++solved;
        if (a.baselines && !candidate_answers.empty()) {
          if (prmh::majority_vote(candidate_answers) == gold_norm) ++maj_hits;
          for (const std::string& ans : candidate_answers) {
            if (ans == gold_norm) {
              ++pass_hits;
              break;
            }
          }
        }
      }
      json rec{{"id", p.id},
               {"chosen_steps", result.chosen.steps},
               {"final_answer", result.chosen.final_answer
                                    ? json(*result.chosen.final_answer)
                                    : json(nullptr)},
               {"chosen_index", result.chosen_index},
               {"chosen_score", result.chosen_score},
               {"rounds", result.rounds},
               {"per_candidate_scores", result.per_candidate_scores},
               {"trace", trace_to_json(result)}};
      if (hit) rec["solved"] = *hit;
      lines.push_back(rec.dump());
    } catch (const prmh::Error& e) {
      const int code = exit_code_for(e.kind());
      if (code != 4) throw;
      failures.push_back(json{{"id", p.id},
                              {"error", prmh::error_kind_name(e.kind())},
                              {"message", e.what()}});
      lines.push_back(json{{"id", p.id}, {"error", e.what()}}.dump());
    }
  }
  prmh::io::write_lines_atomic(a.out, lines);

  json summary{{"problems", problems.size()},
               {"with_gold", with_gold},
               {"solved", solved},
               {"failed", failures.size()}};
  if (with_gold > 0) {
    summary["accuracy"] = 100.0 * solved / with_gold;
    if (a.baselines) {
      summary["maj_accuracy"] = 100.0 * maj_hits / with_gold;
      summary["pass_accuracy"] = 100.0 * pass_hits / with_gold;
    }
  }
  if (!failures.empty()) summary["failures"] = failures;
  std::cout << summary.dump() << "\n";
  return failures.empty() ? 0 : 4;
}

// ---------------------------------------------------------------------------
// build-sft / build-dpo

struct BuildArgs {
  std::string cases_path;
  std::string labels_path;
  bool labels_from_truth = false;
  std::string trajectories_path;
  int m = 4;
  int cap = 4;
  std::string template_path;
  std::string out;
};

struct BuildInputs {
  std::vector<prmh::LabeledStepCase> labeled;
  std::vector<std::vector<prmh::JudgmentTrajectory>> trajectories;
};

BuildInputs load_build_inputs(const BuildArgs& a) {
  const std::vector<prmh::BenchmarkCase> cases = prmh::load_benchmark(a.cases_path);
  std::map<std::string, const prmh::BenchmarkCase*> by_id;
  for (const prmh::BenchmarkCase& c : cases) by_id[c.id] = &c;

  BuildInputs in;
  if (a.labels_from_truth) {
    for (const prmh::BenchmarkCase& c : cases) {
      for (int s = 0; s < static_cast<int>(c.steps.size()); ++s) {
        in.labeled.push_back({c, s,
                              prmh::step_is_correct(c, s) ? prmh::HumanLabel::correct
                                                          : prmh::HumanLabel::incorrect});
      }
    }
  } else {
    if (a.labels_path.empty()) {
      throw prmh::Error(prmh::ErrorKind::config,
                        "need --labels FILE or --labels-from-truth");
    }
    prmh::io::for_each_jsonl(a.labels_path, [&](int line_no, const json& j) {
      if (!j.is_object() || !j.contains("case_id") || !j.contains("step_index") ||
          !j.contains("label") || !j["case_id"].is_string() ||
          !j["step_index"].is_number_integer() || !j["label"].is_string()) {
        throw prmh::Error(prmh::ErrorKind::parse,
                          a.labels_path + " line " + std::to_string(line_no) +
                              ": expected {case_id, step_index, label}");
      }
      const auto it = by_id.find(j["case_id"].get<std::string>());
      if (it == by_id.end()) {
        throw prmh::Error(prmh::ErrorKind::validation,
                          a.labels_path + " line " + std::to_string(line_no) +
                              ": unknown case " + j["case_id"].get<std::string>());
      }
      const int step_index = j["step_index"].get<int>();
      if (step_index < 0 ||
          step_index >= static_cast<int>(it->second->steps.size())) {
        throw prmh::Error(prmh::ErrorKind::validation,
                          a.labels_path + " line " + std::to_string(line_no) +
                              ": step index out of range for case " + it->second->id);
      }
      in.labeled.push_back({*it->second, step_index,
                            prmh::human_label_from_name(j["label"].get<std::string>())});
    });
  }

  std::map<std::pair<std::string, int>, std::vector<prmh::JudgmentTrajectory>> by_step;
  prmh::io::for_each_jsonl(a.trajectories_path, [&](int line_no, const json& j) {
    prmh::JudgmentTrajectory t;
    try {
      t = prmh::io::trajectory_from_json(j);
    } catch (const prmh::Error& e) {
      throw prmh::Error(e.kind(), a.trajectories_path + " line " +
                                      std::to_string(line_no) + ": " + e.what());
    }
    by_step[{t.case_id, t.step_index}].push_back(std::move(t));
  });
  for (const prmh::LabeledStepCase& ls : in.labeled) {
    const auto it = by_step.find({ls.bench_case.id, ls.step_index});
    in.trajectories.push_back(it == by_step.end()
                                  ? std::vector<prmh::JudgmentTrajectory>{}
                                  : it->second);
  }
  return in;
}

std::string load_template(const std::string& path) {
  return path.empty() ? std::string() : prmh::io::read_text_file(path);
}

int run_build_sft(const BuildArgs& a) {
  const BuildInputs in = load_build_inputs(a);
  const std::string tpl = load_template(a.template_path);
  prmh::SftBuild total;
  for (std::size_t i = 0; i < in.labeled.size(); ++i) {
    prmh::SftBuild b =
        prmh::build_sft_records(in.labeled[i], in.trajectories[i], a.m, tpl);
    total.considered += b.considered;
    total.kept += b.kept;
    total.filtered += b.filtered;
    total.skipped_neutral += b.skipped_neutral;
    for (prmh::SftRecord& rec : b.records) total.records.push_back(std::move(rec));
  }
  const prmh::ExportResult er = prmh::export_sft(total.records, a.out);
  std::cout << json{{"considered", total.considered},
                    {"kept", total.kept},
                    {"filtered", total.filtered},
                    {"skipped_neutral", total.skipped_neutral},
                    {"written", er.written},
                    {"deduplicated", er.deduplicated},
                    {"file", a.out}}
                   .dump()
            << "\n";
  return 0;
}

int run_build_dpo(const BuildArgs& a) {
  const BuildInputs in = load_build_inputs(a);
  const std::string tpl = load_template(a.template_path);
  prmh::DpoBuild total;
  for (std::size_t i = 0; i < in.labeled.size(); ++i) {
    prmh::DpoBuild b =
        prmh::build_dpo_pairs(in.labeled[i], in.trajectories[i], a.cap, tpl);
    total.consistent += b.consistent;
    total.inconsistent += b.inconsistent;
    total.unparseable += b.unparseable;
    total.skipped_neutral += b.skipped_neutral;
    for (prmh::PreferencePair& pair : b.pairs) total.pairs.push_back(std::move(pair));
  }
  const prmh::ExportResult er = prmh::export_dpo(total.pairs, a.out);
  std::cout << json{{"pairs", total.pairs.size()},
                    {"consistent", total.consistent},
                    {"inconsistent", total.inconsistent},
                    {"unparseable", total.unparseable},
                    {"skipped_neutral", total.skipped_neutral},
                    {"written", er.written},
                    {"deduplicated", er.deduplicated},
                    {"file", a.out}}
                   .dump()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// synth / scaling

struct SynthArgs {
  int num_cases = 100;
  int steps = 5;
  double error_fraction = 0.5;
  std::string out;
};

int run_synth(const SynthArgs& a, const GlobalSettings& g) {
  prmh::SynthSpec spec;
  spec.num_cases = a.num_cases;
  spec.steps_per_case = a.steps;
  spec.error_fraction = a.error_fraction;
  spec.seed = g.seed;
  const std::vector<prmh::BenchmarkCase> cases = prmh::generate_cases(spec);
  std::vector<std::string> lines;
  lines.reserve(cases.size());
  for (const prmh::BenchmarkCase& c : cases) {
    lines.push_back(prmh::io::case_to_json(c).dump());
  }
  prmh::io::write_lines_atomic(a.out, lines);
  std::cout << json{{"cases", cases.size()}, {"file", a.out}}.dump() << "\n";
  return 0;
}

struct ScalingArgs {
  int num_cases = 500;
  int steps = 5;
  double error_fraction = 0.5;
  std::string accuracies = "0.6,0.7,0.8,0.9,1.0";
  std::string ks = "1,3,5,7,9";
  double threshold = 0.5;
  bool threshold_given = false;
  std::string out_csv;
};

int run_scaling(const ScalingArgs& a, const GlobalSettings& g) {
  prmh::SynthSpec spec;
  spec.num_cases = a.num_cases;
  spec.steps_per_case = a.steps;
  spec.error_fraction = a.error_fraction;
  spec.seed = g.seed;
  const double threshold = layered(a.threshold_given, a.threshold,
                                   std::optional<double>{}, g.file.threshold, 0.5);
  const auto rows = prmh::run_scaling_experiment(
      spec, parse_double_list(a.accuracies, "--accuracies"),
      parse_int_list(a.ks, "--ks"), threshold, g.parallelism);
  if (!a.out_csv.empty()) prmh::write_scaling_csv(a.out_csv, rows);
  json out = json::array();
  for (const prmh::ScalingRow& r : rows) {
    json row{{"p", r.accuracy},
             {"k", r.k},
             {"error_acc", r.error_acc ? json(*r.error_acc) : json(nullptr)},
             {"correct_acc", r.correct_acc ? json(*r.correct_acc) : json(nullptr)},
             {"f1", r.f1 ? json(*r.f1) : json(nullptr)},
             {"step_decision_accuracy", r.step_decision_accuracy},
             {"steps_evaluated", r.steps_evaluated}};
    out.push_back(std::move(row));
  }
  std::cout << out.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    CLI::App app{"Step-level reward scoring, reward-guided search, and evaluation toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed_flag = 0;
    int parallelism_flag = 1;
    std::string api_base_flag, api_key_flag;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--seed", seed_flag, "Global seed (env PRMH_SEED)");
    app.add_option("--parallelism", parallelism_flag,
                   "Worker threads (env PRMH_PARALLELISM)");
    app.add_option("--api-base", api_base_flag, "HTTP endpoint (env PRMH_API_BASE)");
    app.add_option("--api-key", api_key_flag, "HTTP bearer token (env PRMH_API_KEY)");

    ScoreArgs score;
    CLI::App* score_cmd = app.add_subcommand("score", "Judge every step of every case");
    score_cmd->fallthrough();
    score_cmd->add_option("--cases", score.cases_path, "Benchmark case JSONL")->required();
    score_cmd->add_option("--backend", score.backend, "mock|replay|http");
    score_cmd->add_option("--accuracy", score.accuracy, "Mock oracle accuracy");
    score_cmd->add_option("--fixture", score.fixture, "Replay fixture JSONL");
    score_cmd->add_flag("--keyed", score.keyed, "Match replay entries by prompt");
    score_cmd->add_option("--model", score.model, "HTTP model name");
    score_cmd->add_option("--k", score.k, "Trajectories per step");
    score_cmd->add_option("--temperature", score.temperature, "Judge temperature");
    score_cmd->add_option("--policy", score.policy, "Unparseable policy: drop|half");
    score_cmd->add_option("--source", score.source,
                          "Probability source: auto|softmax|vote");
    score_cmd->add_option("--template", score.template_path, "Judge prompt template file");
    score_cmd->add_option("--max-tokens", score.max_tokens, "Judge max tokens");
    score_cmd->add_option("--out-rewards", score.out_rewards, "Reward JSONL out");
    score_cmd->add_option("--out-trajectories", score.out_trajectories,
                          "Trajectory JSONL out");

    EvalArgs eval;
    CLI::App* eval_cmd = app.add_subcommand("eval", "Earliest-error report from rewards");
    eval_cmd->fallthrough();
    eval_cmd->add_option("--cases", eval.cases_path, "Benchmark case JSONL")->required();
    eval_cmd->add_option("--rewards", eval.rewards_path, "Reward JSONL")->required();
    eval_cmd->add_option("--threshold", eval.threshold, "Decision threshold");
    eval_cmd->add_option("--dataset-name", eval.dataset_name, "Name echoed in the report");
    eval_cmd->add_flag("--sweep", eval.sweep, "Also write a threshold sweep CSV");
    eval_cmd->add_option("--grid", eval.grid, "Sweep thresholds, comma separated");
    eval_cmd->add_option("--out-csv", eval.out_csv, "Sweep CSV out");

    EvalArgs sweep;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Threshold sweep CSV from rewards");
    sweep_cmd->fallthrough();
    sweep_cmd->add_option("--cases", sweep.cases_path, "Benchmark case JSONL")->required();
    sweep_cmd->add_option("--rewards", sweep.rewards_path, "Reward JSONL")->required();
    sweep_cmd->add_option("--grid", sweep.grid, "Sweep thresholds, comma separated");
    sweep_cmd->add_option("--dataset-name", sweep.dataset_name, "Name echoed in the rows");
    sweep_cmd->add_option("--out-csv", sweep.out_csv, "Sweep CSV out")->required();

    SearchArgs search;
    CLI::App* search_cmd = app.add_subcommand("search", "Best-of-n or guided search");
    search_cmd->fallthrough();
    search_cmd->add_option("--mode", search.mode, "bon|guided");
    search_cmd->add_option("--world", search.world, "scripted");
    search_cmd->add_option("--problems", search.problems_path,
                           "Problem JSONL {id, problem, gold?}");
    search_cmd->add_option("--num-problems", search.num_problems, "Scripted problem count");
    search_cmd->add_option("--depth", search.depth, "Scripted world depth");
    search_cmd->add_option("--judge", search.judge, "oracle|constant");
    search_cmd->add_option("--constant-reward", search.constant_reward,
                           "Reward for --judge constant");
    search_cmd->add_option("--model", search.model, "HTTP model name");
    search_cmd->add_option("--k", search.k, "Trajectories per judged step");
    search_cmd->add_option("--n", search.n, "Candidates per round");
    search_cmd->add_option("--max-steps", search.max_steps, "Guided round limit");
    search_cmd->add_option("--reduction", search.reduction, "min|product|last|mean");
    search_cmd->add_option("--policy-temperature", search.policy_temperature,
                           "Policy temperature");
    search_cmd->add_option("--policy-max-tokens", search.policy_max_tokens,
                           "Policy max tokens");
    search_cmd->add_option("--out", search.out, "Trace JSONL out");
    search_cmd->add_flag("--baselines", search.baselines,
                         "Also report majority-vote and any-hit baselines");

    BuildArgs build_sft;
    CLI::App* sft_cmd = app.add_subcommand("build-sft", "Label-consistent tuning records");
    sft_cmd->fallthrough();
    sft_cmd->add_option("--cases", build_sft.cases_path, "Benchmark case JSONL")->required();
    sft_cmd->add_option("--labels", build_sft.labels_path,
                        "Step label JSONL {case_id, step_index, label}");
    sft_cmd->add_flag("--labels-from-truth", build_sft.labels_from_truth,
                      "Derive labels from first_error");
    sft_cmd->add_option("--trajectories", build_sft.trajectories_path,
                        "Trajectory JSONL from score")
        ->required();
    sft_cmd->add_option("--m", build_sft.m, "Trajectories considered per step");
    sft_cmd->add_option("--template", build_sft.template_path, "Judge prompt template file");
    sft_cmd->add_option("--out", build_sft.out, "Record JSONL out")->required();

    BuildArgs build_dpo;
    CLI::App* dpo_cmd = app.add_subcommand("build-dpo", "Preference pairs from trajectories");
    dpo_cmd->fallthrough();
    dpo_cmd->add_option("--cases", build_dpo.cases_path, "Benchmark case JSONL")->required();
    dpo_cmd->add_option("--labels", build_dpo.labels_path,
                        "Step label JSONL {case_id, step_index, label}");
    dpo_cmd->add_flag("--labels-from-truth", build_dpo.labels_from_truth,
                      "Derive labels from first_error");
    dpo_cmd->add_option("--trajectories", build_dpo.trajectories_path,
                        "Trajectory JSONL from score")
        ->required();
    dpo_cmd->add_option("--cap", build_dpo.cap, "Max pairs per step");
    dpo_cmd->add_option("--template", build_dpo.template_path, "Judge prompt template file");
    dpo_cmd->add_option("--out", build_dpo.out, "Pair JSONL out")->required();

    SynthArgs synth;
    CLI::App* synth_cmd = app.add_subcommand("synth", "Generate the synthetic benchmark");
    synth_cmd->fallthrough();
    synth_cmd->add_option("--num-cases", synth.num_cases, "Case count");
    synth_cmd->add_option("--steps", synth.steps, "Steps per case");
    synth_cmd->add_option("--error-fraction", synth.error_fraction,
                          "Fraction of cases with an error");
    synth_cmd->add_option("--out", synth.out, "Case JSONL out")->required();

    ScalingArgs scaling;
    CLI::App* scaling_cmd =
        app.add_subcommand("scaling", "Oracle-accuracy x trajectory-count experiment");
    scaling_cmd->fallthrough();
    scaling_cmd->add_option("--num-cases", scaling.num_cases, "Case count");
    scaling_cmd->add_option("--steps", scaling.steps, "Steps per case");
    scaling_cmd->add_option("--error-fraction", scaling.error_fraction,
                            "Fraction of cases with an error");
    scaling_cmd->add_option("--accuracies", scaling.accuracies,
                            "Oracle accuracies, comma separated");
    scaling_cmd->add_option("--ks", scaling.ks, "Trajectory counts, comma separated");
    scaling_cmd->add_option("--threshold", scaling.threshold, "Decision threshold");
    scaling_cmd->add_option("--out-csv", scaling.out_csv, "Scaling CSV out");

    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == 0) return app.exit(e);
      print_error_line("usage", e.what());
      return 2;
    }

    GlobalSettings g;
    g.file = load_config_file(config_path);
    g.seed = layered(app.count("--seed") > 0, seed_flag, env_u64("PRMH_SEED"),
                     g.file.seed, std::uint64_t{0});
    g.parallelism = layered(app.count("--parallelism") > 0, parallelism_flag,
                            env_int("PRMH_PARALLELISM"), g.file.parallelism, 1);
    g.api_base = layered(app.count("--api-base") > 0, api_base_flag,
                         env_string("PRMH_API_BASE"), g.file.api_base, std::string());
    g.api_key = layered(app.count("--api-key") > 0, api_key_flag,
                        env_string("PRMH_API_KEY"), g.file.api_key, std::string());
    if (g.parallelism < 1) {
      throw prmh::Error(prmh::ErrorKind::config, "parallelism must be >= 1");
    }
    score.k_given = score_cmd->count("--k") > 0;
    search.k_given = search_cmd->count("--k") > 0;
    eval.threshold_given = eval_cmd->count("--threshold") > 0;
    scaling.threshold_given = scaling_cmd->count("--threshold") > 0;

    if (*score_cmd) return run_score(score, g);
    if (*eval_cmd) return run_eval(eval, g, false);
    if (*sweep_cmd) return run_eval(sweep, g, true);
    if (*search_cmd) return run_search(search, g);
    if (*sft_cmd) return run_build_sft(build_sft);
    if (*dpo_cmd) return run_build_dpo(build_dpo);
    if (*synth_cmd) return run_synth(synth, g);
    if (*scaling_cmd) return run_scaling(scaling, g);
    print_error_line("usage", "no subcommand");
    return 2;
  } catch (const prmh::Error& e) {
    print_error_line(prmh::error_kind_name(e.kind()), e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    print_error_line("unexpected", e.what());
    return 1;
  }
}
