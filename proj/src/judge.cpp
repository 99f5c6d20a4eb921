#include "prmh/judge.hpp"

#include <algorithm>
#include <cctype>
#include <utility>

#include "prmh/error.hpp"
#include "prmh/parallel.hpp"
#include "prmh/textutil.hpp"

namespace prmh {

namespace {

const std::string kDefaultPrompt =
    R"(You are an excellent math teacher. Please verify the correctness of the Now Step.

You first need to analyze the Now Step and the Previous Steps and then summarize based on your analysis.
Analysis:
You need to analyze the following aspects.
**Previous Steps Analysis**: You need to analyze the Previous Steps step by step. For each step, you need to first explain what the current step is doing, then you try to find any error in the current step.
**Now Step Analysis**: You first need to explain what the Now Step is doing, and then point out which part of the Question it is trying to solve or which part of the information it states.
**Data Source Analysis**: First you need to find out what data are used in the Now Step, and then you need to determine whether the source of the data is reasonable and correct. When you judge whether the source of a data is reasonable and correct, you need to specify the specific source of this data: such as which part of the question, or which content of the previous step; and then determine the source and current use is consistent, the Now Step is used correctly.
**Consistency Analysis**: You need to check that the Now Step is consistent with the contents of the Previous Steps, and then you need to check that all the information inside the Now Step is consistent.
**Calculation Analysis**: If the Now Step involves any calculations, such as addition, subtraction, multiplication, division, equations, modulo operations, etc., you will first need to perform a check on the calculation, such as a reverse operation, to see if the calculation was done correctly, and then analyze the results of your check to see if there was an error in the calculation.
Conclusion:
Please verify the correctness of the Now Step based on your analysis, if there is any error in the Now Step then the Now Step is wrong and vice versa the Now Step is correct. At the end of the Conclusion, when you give your final answer, write it in the form "Verification: Is the step correct (Yes/No)? X", where X is either Yes or No.

Question: [Math Problem]
Previous Steps: [Previous Steps]
Now Step: [Current Step]
Please carefully analyze the correctness of the Now Step.
Reply:
)";

constexpr std::string_view kVerdictPattern = "Verification: Is the step correct (Yes/No)?";

struct Replacement {
  std::size_t pos;
  std::size_t len;
  const std::string* value;
};

// Single-pass substitution over the template: placeholder occurrences are
// located first, so substituted content is never rescanned.
std::string substitute_placeholders(
    const std::string& templ,
    const std::vector<std::pair<std::string_view, const std::string*>>& subs) {
  std::vector<Replacement> reps;
  for (const auto& [token, value] : subs) {
    std::size_t pos = 0;
    bool found = false;
    while ((pos = templ.find(token, pos)) != std::string::npos) {
      reps.push_back({pos, token.size(), value});
      pos += token.size();
      found = true;
    }
    if (!found) {
      throw Error(ErrorKind::template_error,
                  "prompt template: missing placeholder " + std::string(token));
    }
  }
  std::sort(reps.begin(), reps.end(),
            [](const Replacement& a, const Replacement& b) { return a.pos < b.pos; });
  std::string out;
  out.reserve(templ.size());
  std::size_t cursor = 0;
  for (const auto& r : reps) {
    out.append(templ, cursor, r.pos - cursor);
    out.append(*r.value);
    cursor = r.pos + r.len;
  }
  out.append(templ, cursor, templ.size() - cursor);
  return out;
}

std::optional<double> softmax_from_scores(const TokenScoreMap& scores) {
  std::optional<double> yes_score;
  std::optional<double> no_score;
  for (const auto& [token, score] : scores) {
    const std::string norm = text::normalize_token(token);
    if (norm == "yes") {
      if (!yes_score || score > *yes_score) yes_score = score;
    } else if (norm == "no") {
      if (!no_score || score > *no_score) no_score = score;
    }
  }
  if (!yes_score || !no_score) return std::nullopt;
  return yes_probability(*yes_score, *no_score);
}

}  // namespace

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::yes: return "yes";
    case Verdict::no: return "no";
    case Verdict::unparseable: return "unparseable";
  }
  return "unparseable";
}

Verdict verdict_from_name(const std::string& name) {
  if (name == "yes") return Verdict::yes;
  if (name == "no") return Verdict::no;
  if (name == "unparseable") return Verdict::unparseable;
  throw Error(ErrorKind::parse, "unknown verdict \"" + name + "\"");
}

const std::string& default_judge_prompt() { return kDefaultPrompt; }

std::string build_judge_prompt(const BenchmarkCase& c, int step_index,
                               const std::string& prompt_template) {
  validate_case(c);
  if (step_index < 0 || step_index >= static_cast<int>(c.steps.size())) {
    throw Error(ErrorKind::invalid_argument,
                "build_judge_prompt: step index " + std::to_string(step_index) +
                    " out of range for case " + c.id);
  }
  std::string previous;
  for (int i = 0; i < step_index; ++i) {
    if (i) previous += '\n';
    previous += c.steps[i];
  }
  return substitute_placeholders(prompt_template,
                                 {{"[Math Problem]", &c.problem},
                                  {"[Previous Steps]", &previous},
                                  {"[Current Step]", &c.steps[step_index]}});
}

Verdict parse_verdict(std::string_view textv) {
  const auto pos = textv.rfind(kVerdictPattern);
  if (pos == std::string_view::npos) return Verdict::unparseable;
  std::size_t i = pos + kVerdictPattern.size();
  while (i < textv.size() &&
         (std::isspace(static_cast<unsigned char>(textv[i])) || textv[i] == '*')) {
    ++i;
  }
  auto matches = [&](std::string_view word) {
    if (i + word.size() > textv.size()) return false;
    for (std::size_t k = 0; k < word.size(); ++k) {
      if (std::tolower(static_cast<unsigned char>(textv[i + k])) != word[k]) return false;
    }
    const std::size_t j = i + word.size();
    return j >= textv.size() || !std::isalnum(static_cast<unsigned char>(textv[j]));
  };
  if (matches("yes")) return Verdict::yes;
  if (matches("no")) return Verdict::no;
  return Verdict::unparseable;
}

std::optional<double> trajectory_p_yes(const JudgmentTrajectory& trajectory,
                                       const std::optional<TokenScoreMap>& token_scores,
                                       const ScoringConfig& config) {
  if (trajectory.verdict == Verdict::unparseable) return std::nullopt;
  const double vote = trajectory.verdict == Verdict::yes ? 1.0 : 0.0;
  switch (config.probability_source) {
    case ProbabilitySource::binary_vote:
      return vote;
    case ProbabilitySource::token_softmax: {
      if (!token_scores) {
        throw Error(ErrorKind::config,
                    "token-softmax probability source requires token scores, "
                    "but the backend returned none");
      }
      auto p = softmax_from_scores(*token_scores);
      if (!p) {
        throw Error(ErrorKind::config,
                    "token-softmax probability source: token scores carry no "
                    "yes/no candidates");
      }
      return p;
    }
    case ProbabilitySource::auto_detect: {
      if (token_scores) {
        if (auto p = softmax_from_scores(*token_scores)) return p;
      }
      return vote;
    }
  }
  return vote;
}

StepScore score_step(const BenchmarkCase& c, int step_index, Backend& backend,
                     const ScoringConfig& config) {
  if (config.k < 1) {
    throw Error(ErrorKind::invalid_argument, "scoring config: k must be >= 1");
  }
  const std::string& templ =
      config.prompt_template.empty() ? default_judge_prompt() : config.prompt_template;

  GenerationRequest request;
  request.prompt = build_judge_prompt(c, step_index, templ);
  request.temperature = config.judge_temperature;
  request.num_samples = config.k;
  request.max_tokens = config.max_tokens;
  request.want_token_scores = config.probability_source != ProbabilitySource::binary_vote;

  const GenerationResult generated = backend.generate(request);
  if (static_cast<int>(generated.texts.size()) != config.k) {
    throw Error(ErrorKind::protocol,
                "backend returned " + std::to_string(generated.texts.size()) +
                    " texts for " + std::to_string(config.k) + " samples");
  }

  StepScore out;
  out.trajectories.reserve(config.k);
  std::vector<double> retained;
  retained.reserve(config.k);
  for (int s = 0; s < config.k; ++s) {
    JudgmentTrajectory t;
    t.case_id = c.id;
    t.step_index = step_index;
    t.sample_index = s;
    t.analysis = generated.texts[s];
    t.verdict = parse_verdict(t.analysis);
    const std::optional<TokenScoreMap>* scores = nullptr;
    if (s < static_cast<int>(generated.token_scores.size())) {
      scores = &generated.token_scores[s];
    }
    static const std::optional<TokenScoreMap> kNoScores;
    t.p_yes = trajectory_p_yes(t, scores ? *scores : kNoScores, config);
    if (t.p_yes) {
      retained.push_back(*t.p_yes);
    } else if (config.unparseable_policy == UnparseablePolicy::count_as_half) {
      retained.push_back(0.5);
    }
    out.trajectories.push_back(std::move(t));
  }
  if (retained.empty()) {
    throw Error(ErrorKind::scoring,
                "case " + c.id + " step " + std::to_string(step_index) + ": all " +
                    std::to_string(config.k) + " trajectories unparseable");
  }

  out.reward.step_index = step_index;
  out.reward.value = aggregate_rewards(retained);
  out.reward.trajectory_count = config.k;
  out.reward.per_trajectory_p_yes = std::move(retained);
  return out;
}

std::vector<StepScore> score_solution(const BenchmarkCase& c, Backend& backend,
                                      const ScoringConfig& config) {
  validate_case(c);
  std::vector<StepScore> scores(c.steps.size());
  parallel_for(c.steps.size(), config.parallelism, [&](std::size_t i) {
    scores[i] = score_step(c, static_cast<int>(i), backend, config);
  });
  return scores;
}

std::vector<StepReward> rewards_of(const std::vector<StepScore>& scores) {
  std::vector<StepReward> rewards;
  rewards.reserve(scores.size());
  for (const auto& s : scores) rewards.push_back(s.reward);
  return rewards;
}

}  // namespace prmh
