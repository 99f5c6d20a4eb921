#include "prmh/search.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>

#include "prmh/error.hpp"
#include "prmh/parallel.hpp"
#include "prmh/textutil.hpp"

namespace prmh {

namespace {

// Index of the highest score; ties resolve to the lowest index.
std::size_t argmax(const std::vector<double>& scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

bool is_step_heading(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
  static constexpr std::string_view kWord = "Step";
  if (line.size() - i < kWord.size() || line.substr(i, kWord.size()) != kWord) return false;
  i += kWord.size();
  if (i >= line.size() || !std::isspace(static_cast<unsigned char>(line[i]))) return false;
  while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
  std::size_t digits = 0;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) {
    ++i;
    ++digits;
  }
  if (digits == 0) return false;
  while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
  return i < line.size() && line[i] == ':';
}

std::string join_steps(const std::vector<std::string>& steps) {
  std::string out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i) out += '\n';
    out += steps[i];
  }
  return out;
}

}  // namespace

Reduction reduction_from_name(const std::string& name) {
  if (name == "min") return Reduction::min;
  if (name == "product") return Reduction::product;
  if (name == "last") return Reduction::last;
  if (name == "mean") return Reduction::mean;
  throw Error(ErrorKind::config, "unknown reduction \"" + name + "\"");
}

const char* reduction_name(Reduction r) {
  switch (r) {
    case Reduction::min: return "min";
    case Reduction::product: return "product";
    case Reduction::last: return "last";
    case Reduction::mean: return "mean";
  }
  return "min";
}

double reduce_solution_score(const std::vector<StepReward>& rewards, Reduction reduction) {
  if (rewards.empty()) {
    throw Error(ErrorKind::empty_input, "reduce_solution_score: no step rewards");
  }
  switch (reduction) {
    case Reduction::min: {
      double m = rewards[0].value;
      for (const auto& r : rewards) m = std::min(m, r.value);
      return m;
    }
    case Reduction::product: {
      double p = 1.0;
      for (const auto& r : rewards) p *= r.value;
      return p;
    }
    case Reduction::last:
      return rewards.back().value;
    case Reduction::mean: {
      double s = 0.0;
      for (const auto& r : rewards) s += r.value;
      return s / static_cast<double>(rewards.size());
    }
  }
  throw Error(ErrorKind::config, "unknown reduction");
}

SearchResult best_of_n(const std::string& problem,
                       const std::vector<CandidateSolution>& candidates,
                       StepJudge& judge, const SearchConfig& config) {
  if (candidates.empty()) {
    throw Error(ErrorKind::search, "best_of_n: no candidates");
  }
  std::vector<double> scores(candidates.size());
  parallel_for(candidates.size(), config.parallelism, [&](std::size_t i) {
    try {
      const auto rewards = judge.score_solution(problem, candidates[i].steps);
      scores[i] = reduce_solution_score(rewards, config.reduction);
    } catch (const Error& e) {
      Error wrapped(e.kind(), "candidate " + std::to_string(i) + ": " + e.what());
      wrapped.attempts = e.attempts;
      throw wrapped;
    }
  });

  const std::size_t best = argmax(scores);
  SearchResult result;
  result.chosen = candidates[best];
  result.per_candidate_scores = scores;
  result.rounds = 1;
  result.chosen_index = static_cast<int>(best);
  result.chosen_score = scores[best];
  RoundTrace round;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    round.candidates.push_back(
        {join_steps(candidates[i].steps), scores[i], i == best});
  }
  round.chosen_index = static_cast<int>(best);
  result.trace.push_back(std::move(round));
  return result;
}

SearchResult greedy_guided_search(const std::string& problem, Backend& policy,
                                  StepJudge& judge, const SearchConfig& config) {
  if (config.n_candidates < 1) {
    throw Error(ErrorKind::invalid_argument, "search config: n_candidates must be >= 1");
  }
  if (config.max_steps < 1) {
    throw Error(ErrorKind::invalid_argument, "search config: max_steps must be >= 1");
  }

  SearchResult result;
  std::vector<std::string> chosen_steps;
  bool terminal = false;

  for (int round_no = 0; round_no < config.max_steps && !terminal; ++round_no) {
    GenerationRequest request;
    request.prompt = problem;
    for (const auto& s : chosen_steps) {
      request.prompt += '\n';
      request.prompt += s;
    }
    request.temperature = config.policy_temperature;
    request.num_samples = config.n_candidates;
    request.max_tokens = config.policy_max_tokens;
    const GenerationResult generated = policy.generate(request);

    // A sample's candidate next step is the first step segmented from it.
    std::vector<std::string> candidates;
    for (const auto& textv : generated.texts) {
      const auto steps = segment_steps(textv);
      if (!steps.empty()) candidates.push_back(steps.front());
    }
    if (candidates.empty()) {
      throw Error(ErrorKind::search,
                  "guided search: policy returned zero candidates in round " +
                      std::to_string(round_no));
    }

    std::vector<double> scores(candidates.size());
    parallel_for(candidates.size(), config.parallelism, [&](std::size_t i) {
      scores[i] = judge.score_step(problem, chosen_steps, candidates[i]).value;
    });

    const std::size_t best = argmax(scores);
    RoundTrace round;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      round.candidates.push_back({candidates[i], scores[i], i == best});
    }
    round.chosen_index = static_cast<int>(best);
    result.trace.push_back(std::move(round));
    result.per_candidate_scores = scores;
    result.chosen_index = static_cast<int>(best);
    result.chosen_score = scores[best];
    result.rounds = round_no + 1;

    chosen_steps.push_back(candidates[best]);
    terminal = extract_final_answer(candidates[best]).has_value();
  }

  result.chosen.steps = std::move(chosen_steps);
  result.chosen.final_answer = extract_final_answer(join_steps(result.chosen.steps));
  result.chosen.terminal = terminal;
  return result;
}

std::string normalize_answer(std::string_view answer) {
  std::string_view t = text::trim(answer);
  std::string collapsed;
  collapsed.reserve(t.size());
  bool in_ws = false;
  for (char c : t) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_ws = true;
      continue;
    }
    if (in_ws && !collapsed.empty()) collapsed += ' ';
    in_ws = false;
    collapsed += c;
  }
  if (!collapsed.empty() && collapsed.back() == '.') collapsed.pop_back();
  if (collapsed.size() >= 2 && collapsed.front() == '$' && collapsed.back() == '$') {
    collapsed = std::string(text::trim(collapsed.substr(1, collapsed.size() - 2)));
  }
  return collapsed;
}

std::optional<std::string> extract_final_answer(std::string_view textv) {
  static constexpr std::string_view kMarker = "\\boxed{";
  std::size_t search_end = textv.size();
  while (true) {
    const auto pos = textv.rfind(kMarker, search_end == 0 ? 0 : search_end - 1);
    if (pos == std::string_view::npos) return std::nullopt;
    std::size_t i = pos + kMarker.size();
    int depth = 1;
    std::string content;
    bool closed = false;
    while (i < textv.size()) {
      const char c = textv[i];
      if (c == '\\' && i + 1 < textv.size()) {
        content += c;
        content += textv[i + 1];
        i += 2;
        continue;
      }
      if (c == '{') {
        ++depth;
      } else if (c == '}') {
        --depth;
        if (depth == 0) {
          closed = true;
          ++i;
          break;
        }
      }
      content += c;
      ++i;
    }
    if (closed) return normalize_answer(content);
    if (pos == 0) return std::nullopt;
    search_end = pos;  // malformed marker; try an earlier one
  }
}

std::vector<std::string> segment_steps(std::string_view textv) {
  std::vector<std::string> steps;
  std::vector<std::string> current;
  auto flush = [&] {
    if (current.empty()) return;
    std::string step;
    for (std::size_t i = 0; i < current.size(); ++i) {
      if (i) step += '\n';
      step += current[i];
    }
    const std::string_view trimmed = text::trim(step);
    if (!trimmed.empty()) steps.emplace_back(trimmed);
    current.clear();
  };
  for (std::string_view line : text::split_lines(textv)) {
    if (text::trim(line).empty()) {
      flush();
      continue;
    }
    if (is_step_heading(line)) flush();
    current.emplace_back(line);
  }
  flush();
  return steps;
}

std::string majority_vote(const std::vector<std::string>& answers) {
  if (answers.empty()) {
    throw Error(ErrorKind::vote, "majority_vote: no answers after filtering");
  }
  std::unordered_map<std::string, int> counts;
  for (const auto& a : answers) ++counts[a];
  const std::string* best = nullptr;
  int best_count = 0;
  for (const auto& a : answers) {
    const int c = counts[a];
    if (!best || c > best_count) {
      best = &a;
      best_count = c;
    }
  }
  return *best;
}

double pass_at_k(const std::vector<PassAtKItem>& items) {
  if (items.empty()) {
    throw Error(ErrorKind::empty_input, "pass_at_k: no problems");
  }
  int hits = 0;
  for (const auto& item : items) {
    if (item.answers.empty()) {
      throw Error(ErrorKind::invalid_argument,
                  "pass_at_k: every problem needs at least one answer");
    }
    for (const auto& a : item.answers) {
      if (a == item.gold) {
        ++hits;
        break;
      }
    }
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(items.size());
}

}  // namespace prmh
