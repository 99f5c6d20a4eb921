#include "prmh/synthetic.hpp"

#include <bit>
#include <cmath>
#include <cstdio>

#include "prmh/error.hpp"
#include "prmh/eval.hpp"
#include "prmh/io.hpp"
#include "prmh/judge.hpp"
#include "prmh/parallel.hpp"
#include "prmh/rng.hpp"

namespace prmh {

namespace {

constexpr std::uint64_t kStartTag = rng::fnv1a64("synth-start");
constexpr std::uint64_t kErrStepTag = rng::fnv1a64("synth-errstep");
constexpr std::uint64_t kDeltaTag = rng::fnv1a64("synth-delta");
constexpr std::uint64_t kSignTag = rng::fnv1a64("synth-sign");
constexpr std::uint64_t kOffsetTag = rng::fnv1a64("synth-offset");
constexpr std::uint64_t kScalingTag = rng::fnv1a64("scaling");
constexpr std::uint64_t kMoveTag = rng::fnv1a64("scripted-move");
constexpr std::uint64_t kPathTag = rng::fnv1a64("scripted-path");

}  // namespace

std::vector<BenchmarkCase> generate_cases(const SynthSpec& spec) {
  if (spec.num_cases < 1) {
    throw Error(ErrorKind::invalid_argument, "generate_cases: num_cases must be >= 1");
  }
  if (spec.steps_per_case < 1) {
    throw Error(ErrorKind::invalid_argument,
                "generate_cases: steps_per_case must be >= 1");
  }
  if (!(spec.error_fraction >= 0.0 && spec.error_fraction <= 1.0)) {
    throw Error(ErrorKind::invalid_argument,
                "generate_cases: error_fraction must be in [0, 1]");
  }
  const int n_err =
      static_cast<int>(std::llround(spec.num_cases * spec.error_fraction));
  std::vector<BenchmarkCase> cases;
  cases.reserve(static_cast<std::size_t>(spec.num_cases));
  for (int i = 0; i < spec.num_cases; ++i) {
    const auto tag = static_cast<std::uint64_t>(i);
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "synth-%06d", i);
    BenchmarkCase c;
    c.id = idbuf;
    const int start =
        10 + static_cast<int>(rng::key(spec.seed, kStartTag, tag) % 90);
    c.problem = "Exercise " + c.id + ": start from " + std::to_string(start) +
                " and apply each step's operation in order. What is the final total?";
    c.first_error =
        i < n_err
            ? static_cast<int>(rng::key(spec.seed, kErrStepTag, tag) %
                               static_cast<std::uint64_t>(spec.steps_per_case))
            : -1;
    long long running = start;
    for (int s = 0; s < spec.steps_per_case; ++s) {
      const auto step_tag = static_cast<std::uint64_t>(s);
      const int d =
          1 + static_cast<int>(rng::key(spec.seed, kDeltaTag, tag, step_tag) % 9);
      const bool add = rng::key(spec.seed, kSignTag, tag, step_tag) % 2 == 0;
      long long stated = add ? running + d : running - d;
      if (s == c.first_error) {
        stated += 1 + static_cast<int>(rng::key(spec.seed, kOffsetTag, tag) % 5);
      }
      c.steps.push_back("Step " + std::to_string(s + 1) + ": " +
                        (add ? "Add " : "Subtract ") + std::to_string(d) +
                        " to get " + std::to_string(stated) + ".");
      // The wrong total carries forward, so exactly one step deviates from the
      // running value its predecessor stated.
      running = stated;
    }
    validate_case(c);
    cases.push_back(std::move(c));
  }
  return cases;
}

std::vector<ScalingRow> run_scaling_experiment(const SynthSpec& spec,
                                               const std::vector<double>& accuracies,
                                               const std::vector<int>& ks,
                                               double threshold, int parallelism) {
  if (accuracies.empty() || ks.empty()) {
    throw Error(ErrorKind::empty_input,
                "run_scaling_experiment: need at least one accuracy and one k");
  }
  for (double p : accuracies) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorKind::invalid_argument,
                  "run_scaling_experiment: accuracy must be in [0, 1]");
    }
  }
  for (int k : ks) {
    if (k < 1) {
      throw Error(ErrorKind::invalid_argument, "run_scaling_experiment: k must be >= 1");
    }
  }
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorKind::invalid_argument,
                "run_scaling_experiment: threshold must be in [0, 1]");
  }
  const std::vector<BenchmarkCase> cases = generate_cases(spec);
  std::vector<ScalingRow> rows;
  rows.reserve(accuracies.size() * ks.size());
  for (double p : accuracies) {
    const std::uint64_t oracle_seed =
        rng::key(spec.seed, kScalingTag, std::bit_cast<std::uint64_t>(p));
    const auto backend =
        make_backend(mock_oracle_configure(cases, p, oracle_seed));
    for (int k : ks) {
      ScoringConfig scoring;
      scoring.k = k;
      scoring.probability_source = ProbabilitySource::binary_vote;
      scoring.parallelism = 1;
      std::vector<std::vector<StepReward>> rewards(cases.size());
      parallel_for(cases.size(), parallelism, [&](std::size_t i) {
        rewards[i] = rewards_of(score_solution(cases[i], *backend, scoring));
      });
      EvalConfig eval_config;
      eval_config.threshold = threshold;
      const EvalReport report = evaluate(cases, rewards, eval_config, "synthetic");
      ScalingRow row;
      row.accuracy = p;
      row.k = k;
      row.error_acc = report.error_acc;
      row.correct_acc = report.correct_acc;
      row.f1 = report.f1;
      long long matches = 0, total = 0;
      for (std::size_t i = 0; i < cases.size(); ++i) {
        for (std::size_t s = 0; s < rewards[i].size(); ++s) {
          const bool predicted_correct = rewards[i][s].value >= threshold;
          if (predicted_correct == step_is_correct(cases[i], static_cast<int>(s))) {
            ++matches;
          }
          ++total;
        }
      }
      row.step_decision_accuracy =
          total ? static_cast<double>(matches) / static_cast<double>(total) : 0.0;
      row.steps_evaluated = static_cast<int>(total);
      rows.push_back(row);
    }
  }
  return rows;
}

namespace {

std::string csv_cell(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", *v);
  return buf;
}

}  // namespace

void write_scaling_csv(const std::string& path, const std::vector<ScalingRow>& rows) {
  std::string csv = "p,k,error_acc,correct_acc,f1\n";
  for (const ScalingRow& row : rows) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g,%d,", row.accuracy, row.k);
    csv += buf;
    csv += csv_cell(row.error_acc);
    csv += ',';
    csv += csv_cell(row.correct_acc);
    csv += ',';
    csv += csv_cell(row.f1);
    csv += '\n';
  }
  io::write_text_file_atomic(path, csv);
}

// ---------------------------------------------------------------------------
// Scripted search world

namespace {

int scripted_move(const ScriptedWorldConfig& cfg, const std::string& problem_id,
                  int round) {
  if (round < 0 || round >= cfg.depth) {
    throw Error(ErrorKind::invalid_argument,
                "scripted world: round " + std::to_string(round) +
                    " out of range for depth " + std::to_string(cfg.depth));
  }
  const std::uint64_t h = rng::key(cfg.seed, kMoveTag, rng::fnv1a64(problem_id),
                                   static_cast<std::uint64_t>(round));
  return static_cast<int>(h % static_cast<std::uint64_t>(cfg.n_candidates));
}

std::string find_problem_id(std::string_view text) {
  const auto pos = text.find("sp-");
  if (pos != std::string_view::npos) {
    std::size_t end = pos + 3;
    while (end < text.size() && text[end] >= '0' && text[end] <= '9') ++end;
    if (end > pos + 3) return std::string(text.substr(pos, end - pos));
  }
  throw Error(ErrorKind::protocol, "scripted world: text names no sp- problem id");
}

std::vector<int> parse_branches(std::string_view text) {
  static constexpr std::string_view kMarker = "take branch ";
  std::vector<int> branches;
  std::size_t pos = 0;
  while ((pos = text.find(kMarker, pos)) != std::string_view::npos) {
    pos += kMarker.size();
    int value = 0;
    bool any = false;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      value = value * 10 + (text[pos] - '0');
      any = true;
      ++pos;
    }
    if (!any) {
      throw Error(ErrorKind::protocol, "scripted world: branch marker without a number");
    }
    branches.push_back(value);
  }
  return branches;
}

int count_prefix_steps(std::string_view prompt) {
  static constexpr std::string_view kMarker = "\nStep ";
  int count = 0;
  std::size_t pos = 0;
  while ((pos = prompt.find(kMarker, pos)) != std::string_view::npos) {
    ++count;
    pos += kMarker.size();
  }
  return count;
}

std::string branch_step_text(int round, int branch) {
  return "Step " + std::to_string(round + 1) + ": take branch " +
         std::to_string(branch) + ".";
}

std::string terminal_suffix(const std::string& answer) {
  return " Final answer: \\boxed{" + answer + "}.";
}

class NextStepPolicy : public Backend {
 public:
  explicit NextStepPolicy(ScriptedWorldConfig cfg) : cfg_(cfg) {}

  GenerationResult generate(const GenerationRequest& request) override {
    validate_request(request);
    const std::string id = find_problem_id(request.prompt);
    const int round = count_prefix_steps(request.prompt);
    if (round >= cfg_.depth) {
      throw Error(ErrorKind::protocol,
                  "scripted policy: prefix already has " + std::to_string(round) +
                      " steps at depth " + std::to_string(cfg_.depth));
    }
    const std::vector<int> prefix = parse_branches(request.prompt);
    if (static_cast<int>(prefix.size()) != round) {
      throw Error(ErrorKind::protocol,
                  "scripted policy: prefix step count does not match branch count");
    }
    bool prefix_correct = true;
    for (int r = 0; r < round; ++r) {
      prefix_correct = prefix_correct && prefix[static_cast<std::size_t>(r)] ==
                                             scripted_move(cfg_, id, r);
    }
    GenerationResult result;
    result.texts.reserve(static_cast<std::size_t>(request.num_samples));
    for (int s = 0; s < request.num_samples; ++s) {
      const int branch = s % cfg_.n_candidates;
      std::string text = branch_step_text(round, branch);
      if (round == cfg_.depth - 1) {
        const bool solved =
            prefix_correct && branch == scripted_move(cfg_, id, round);
        text += terminal_suffix(solved ? "goal-" + id
                                       : "miss-" + id + "-" + std::to_string(branch));
      }
      result.texts.push_back(std::move(text));
    }
    return result;
  }

 private:
  ScriptedWorldConfig cfg_;
};

class FullSolutionPolicy : public Backend {
 public:
  explicit FullSolutionPolicy(ScriptedWorldConfig cfg) : cfg_(cfg) {}

  GenerationResult generate(const GenerationRequest& request) override {
    validate_request(request);
    const std::string id = find_problem_id(request.prompt);
    const std::uint64_t id_tag = rng::fnv1a64(id);
    const std::uint64_t request_tag = request.seed.value_or(0);
    GenerationResult result;
    result.texts.reserve(static_cast<std::size_t>(request.num_samples));
    for (int s = 0; s < request.num_samples; ++s) {
      std::string text;
      int first_wrong = -1;
      int last_branch = 0;
      for (int r = 0; r < cfg_.depth; ++r) {
        const std::uint64_t h =
            rng::key(cfg_.seed, kPathTag, id_tag, request_tag,
                     static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(r));
        const int branch =
            static_cast<int>(h % static_cast<std::uint64_t>(cfg_.n_candidates));
        if (first_wrong == -1 && branch != scripted_move(cfg_, id, r)) {
          first_wrong = r;
          last_branch = branch;
        }
        if (r) text += '\n';
        text += branch_step_text(r, branch);
      }
      text += terminal_suffix(first_wrong == -1
                                  ? "goal-" + id
                                  : "miss-" + id + "-" + std::to_string(first_wrong) +
                                        "-" + std::to_string(last_branch));
      result.texts.push_back(std::move(text));
    }
    return result;
  }

 private:
  ScriptedWorldConfig cfg_;
};

class ScriptedOracleJudge : public StepJudge {
 public:
  explicit ScriptedOracleJudge(ScriptedWorldConfig cfg) : cfg_(cfg) {}

  std::vector<StepReward> score_solution(const std::string& problem,
                                         const std::vector<std::string>& steps) override {
    const std::string id = find_problem_id(problem);
    std::vector<StepReward> rewards;
    rewards.reserve(steps.size());
    bool on_track = true;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      on_track = on_track && step_on_track(id, static_cast<int>(i), steps[i]);
      rewards.push_back(make_step_reward(static_cast<int>(i), {on_track ? 1.0 : 0.0}));
    }
    return rewards;
  }

  StepReward score_step(const std::string& problem,
                        const std::vector<std::string>& previous_steps,
                        const std::string& candidate_step) override {
    const std::string id = find_problem_id(problem);
    bool on_track = true;
    for (std::size_t i = 0; i < previous_steps.size(); ++i) {
      on_track =
          on_track && step_on_track(id, static_cast<int>(i), previous_steps[i]);
    }
    const int round = static_cast<int>(previous_steps.size());
    on_track = on_track && step_on_track(id, round, candidate_step);
    return make_step_reward(round, {on_track ? 1.0 : 0.0});
  }

 private:
  bool step_on_track(const std::string& id, int round, const std::string& step) const {
    const std::vector<int> branches = parse_branches(step);
    if (branches.size() != 1) {
      throw Error(ErrorKind::protocol,
                  "scripted judge: step must name exactly one branch, got " +
                      std::to_string(branches.size()));
    }
    return branches[0] == scripted_move(cfg_, id, round);
  }

  ScriptedWorldConfig cfg_;
};

}  // namespace

ScriptedSearchWorld::ScriptedSearchWorld(ScriptedWorldConfig config)
    : config_(config) {
  if (config_.n_candidates < 1 || config_.depth < 1) {
    throw Error(ErrorKind::invalid_argument,
                "scripted world: n_candidates and depth must be >= 1");
  }
}

ScriptedProblem ScriptedSearchWorld::problem(int index) const {
  if (index < 0) {
    throw Error(ErrorKind::invalid_argument, "scripted world: negative problem index");
  }
  char idbuf[32];
  std::snprintf(idbuf, sizeof(idbuf), "sp-%06d", index);
  ScriptedProblem p;
  p.id = idbuf;
  p.problem = "Scripted navigation problem " + p.id +
              ": starting from the root, take the marked branch at each of " +
              std::to_string(config_.depth) +
              " junctions, then report the label you reach.";
  p.gold = "goal-" + p.id;
  return p;
}

std::vector<ScriptedProblem> ScriptedSearchWorld::problems(int count) const {
  if (count < 1) {
    throw Error(ErrorKind::invalid_argument, "scripted world: count must be >= 1");
  }
  std::vector<ScriptedProblem> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(problem(i));
  return out;
}

int ScriptedSearchWorld::correct_move(const std::string& problem_id, int round) const {
  return scripted_move(config_, problem_id, round);
}

std::shared_ptr<Backend> ScriptedSearchWorld::next_step_policy() const {
  return std::make_shared<NextStepPolicy>(config_);
}

std::shared_ptr<Backend> ScriptedSearchWorld::full_solution_policy() const {
  return std::make_shared<FullSolutionPolicy>(config_);
}

std::unique_ptr<StepJudge> ScriptedSearchWorld::oracle_judge() const {
  return std::make_unique<ScriptedOracleJudge>(config_);
}

std::vector<StepReward> ConstantJudge::score_solution(
    const std::string& problem, const std::vector<std::string>& steps) {
  (void)problem;
  std::vector<StepReward> rewards;
  rewards.reserve(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i) {
    rewards.push_back(make_step_reward(static_cast<int>(i), {reward_}));
  }
  return rewards;
}

StepReward ConstantJudge::score_step(const std::string& problem,
                                     const std::vector<std::string>& previous_steps,
                                     const std::string& candidate_step) {
  (void)problem;
  (void)candidate_step;
  return make_step_reward(static_cast<int>(previous_steps.size()), {reward_});
}

}  // namespace prmh
