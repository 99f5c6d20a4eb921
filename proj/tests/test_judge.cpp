#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "prmh/backend.hpp"
#include "prmh/case.hpp"
#include "prmh/error.hpp"
#include "prmh/judge.hpp"

using namespace prmh;

namespace {

BenchmarkCase three_step_case(int first_error) {
  BenchmarkCase c;
  c.id = "judge-case";
  c.problem = "What is 2 + 2 + 2?";
  c.steps = {"Step 1: 2 + 2 = 4.", "Step 2: 4 + 2 = 6.", "Step 3: The answer is 6."};
  c.first_error = first_error;
  return c;
}

std::string verdict_text(const char* answer) {
  return std::string("Some analysis.\nVerification: Is the step correct (Yes/No)? ") +
         answer;
}

ReplayEntry entry(std::string text,
                  std::optional<TokenScoreMap> scores = std::nullopt) {
  return ReplayEntry{"", std::move(text), std::move(scores)};
}

std::shared_ptr<Backend> replay_of(std::vector<ReplayEntry> entries) {
  return make_backend(replay_configure(std::move(entries)));
}

}  // namespace

TEST_CASE("prompt for the first step has an empty previous-steps section") {
  const auto c = three_step_case(-1);
  const std::string prompt = build_judge_prompt(c, 0, default_judge_prompt());
  CHECK(prompt.find(c.problem) != std::string::npos);
  CHECK(prompt.find("Previous Steps: \n") != std::string::npos);
  CHECK(prompt.find("Now Step: " + c.steps[0]) != std::string::npos);
  CHECK(prompt.find(c.steps[1]) == std::string::npos);
}

TEST_CASE("prompt for a later step joins exactly the earlier steps") {
  const auto c = three_step_case(-1);
  const std::string prompt = build_judge_prompt(c, 2, default_judge_prompt());
  CHECK(prompt.find("Previous Steps: " + c.steps[0] + "\n" + c.steps[1] + "\n") !=
        std::string::npos);
  CHECK(prompt.find("Now Step: " + c.steps[2]) != std::string::npos);
}

TEST_CASE("custom templates may reorder placeholders") {
  const auto c = three_step_case(-1);
  const std::string prompt = build_judge_prompt(
      c, 1, "step=[Current Step] prev=[Previous Steps] q=[Math Problem]");
  CHECK(prompt == "step=" + c.steps[1] + " prev=" + c.steps[0] + " q=" + c.problem);
}

TEST_CASE("template without every placeholder is rejected") {
  const auto c = three_step_case(-1);
  try {
    build_judge_prompt(c, 0, "Question: [Math Problem]\nNow Step: [Current Step]");
    FAIL("expected template error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::template_error);
    CHECK(std::string(e.what()).find("[Previous Steps]") != std::string::npos);
  }
}

TEST_CASE("step index out of range is rejected") {
  const auto c = three_step_case(-1);
  CHECK_THROWS_AS(build_judge_prompt(c, 3, default_judge_prompt()), Error);
  CHECK_THROWS_AS(build_judge_prompt(c, -1, default_judge_prompt()), Error);
}

TEST_CASE("shipped default template matches the installed prompt file") {
  std::ifstream in(std::string(PRMH_SOURCE_DIR) + "/data/judge_prompt.txt",
                   std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  CHECK(default_judge_prompt() == buf.str());
  CHECK(default_judge_prompt().find(
            "Verification: Is the step correct (Yes/No)?") != std::string::npos);
}

TEST_CASE("verdict parsing") {
  CHECK(parse_verdict(verdict_text("Yes")) == Verdict::yes);
  CHECK(parse_verdict(verdict_text("No")) == Verdict::no);
  CHECK(parse_verdict(verdict_text("yes.")) == Verdict::yes);
  CHECK(parse_verdict(verdict_text("NO,")) == Verdict::no);
  CHECK(parse_verdict(verdict_text("**Yes**.")) == Verdict::yes);
  CHECK(parse_verdict(verdict_text(" **No**")) == Verdict::no);
  CHECK(parse_verdict(verdict_text("\nYes")) == Verdict::yes);
  CHECK(parse_verdict(verdict_text("Maybe")) == Verdict::unparseable);
  CHECK(parse_verdict(verdict_text("Yesterday")) == Verdict::unparseable);
  CHECK(parse_verdict(verdict_text("")) == Verdict::unparseable);
  CHECK(parse_verdict("no verification line at all") == Verdict::unparseable);
  CHECK(parse_verdict("") == Verdict::unparseable);
}

TEST_CASE("the final verification line wins") {
  const std::string text = verdict_text("Yes") + "\nWait, on reflection:\n" +
                           verdict_text("No");
  CHECK(parse_verdict(text) == Verdict::no);
}

TEST_CASE("verdict names round-trip") {
  for (Verdict v : {Verdict::yes, Verdict::no, Verdict::unparseable}) {
    CHECK(verdict_from_name(verdict_name(v)) == v);
  }
  CHECK_THROWS_AS(verdict_from_name("maybe"), Error);
}

TEST_CASE("per-trajectory probability from the binary vote") {
  ScoringConfig cfg;
  cfg.probability_source = ProbabilitySource::binary_vote;
  JudgmentTrajectory t;
  t.verdict = Verdict::yes;
  CHECK(trajectory_p_yes(t, std::nullopt, cfg) == 1.0);
  t.verdict = Verdict::no;
  CHECK(trajectory_p_yes(t, std::nullopt, cfg) == 0.0);
  t.verdict = Verdict::unparseable;
  CHECK_FALSE(trajectory_p_yes(t, std::nullopt, cfg).has_value());
}

TEST_CASE("per-trajectory probability from token scores") {
  ScoringConfig cfg;
  cfg.probability_source = ProbabilitySource::token_softmax;
  JudgmentTrajectory t;
  t.verdict = Verdict::yes;
  const TokenScoreMap scores{{" Yes", -0.5}, {" No", -2.5}};
  const auto p = trajectory_p_yes(t, scores, cfg);
  REQUIRE(p.has_value());
  CHECK(*p == doctest::Approx(0.8807970779778823).epsilon(1e-12));

  // Casing and punctuation on the token text do not matter.
  const TokenScoreMap decorated{{"**yes**", 1.0}, {"NO", -1.0}};
  const auto q = trajectory_p_yes(t, decorated, cfg);
  REQUIRE(q.has_value());
  CHECK(*q == doctest::Approx(0.8807970779778823).epsilon(1e-12));
}

TEST_CASE("token-softmax without usable scores is a configuration error") {
  ScoringConfig cfg;
  cfg.probability_source = ProbabilitySource::token_softmax;
  JudgmentTrajectory t;
  t.verdict = Verdict::yes;
  try {
    trajectory_p_yes(t, std::nullopt, cfg);
    FAIL("expected config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config);
  }
  const TokenScoreMap no_verdict_tokens{{"maybe", -0.1}, {"certainly", -0.2}};
  CHECK_THROWS_AS(trajectory_p_yes(t, no_verdict_tokens, cfg), Error);
}

TEST_CASE("auto-detect prefers token scores and falls back to the vote") {
  ScoringConfig cfg;
  cfg.probability_source = ProbabilitySource::auto_detect;
  JudgmentTrajectory t;
  t.verdict = Verdict::no;
  const TokenScoreMap scores{{" Yes", 0.0}, {" No", 2.0}};
  const auto with_scores = trajectory_p_yes(t, scores, cfg);
  REQUIRE(with_scores.has_value());
  CHECK(*with_scores == doctest::Approx(1.0 - 0.8807970779778823).epsilon(1e-9));
  CHECK(trajectory_p_yes(t, std::nullopt, cfg) == 0.0);
  const TokenScoreMap unusable{{"hm", -1.0}};
  CHECK(trajectory_p_yes(t, unusable, cfg) == 0.0);
}

TEST_CASE("scoring a step with a perfect oracle yields reward 1") {
  const auto c = three_step_case(-1);
  auto backend = make_backend(mock_oracle_configure({c}, 1.0, 11));
  ScoringConfig cfg;
  cfg.k = 4;
  const StepScore score = score_step(c, 1, *backend, cfg);
  CHECK(score.reward.step_index == 1);
  CHECK(score.reward.value == 1.0);
  CHECK(score.reward.trajectory_count == 4);
  CHECK(score.reward.per_trajectory_p_yes == std::vector<double>{1.0, 1.0, 1.0, 1.0});
  REQUIRE(score.trajectories.size() == 4);
  for (int s = 0; s < 4; ++s) {
    const auto& t = score.trajectories[s];
    CHECK(t.case_id == c.id);
    CHECK(t.step_index == 1);
    CHECK(t.sample_index == s);
    CHECK(t.verdict == Verdict::yes);
    CHECK(t.p_yes == 1.0);
    CHECK(parse_verdict(t.analysis) == Verdict::yes);
  }
  validate_step_reward(score.reward);
}

TEST_CASE("mixed replayed verdicts average to the vote share") {
  const auto c = three_step_case(-1);
  auto backend = replay_of({entry(verdict_text("Yes")), entry(verdict_text("Yes")),
                            entry(verdict_text("No")), entry(verdict_text("Yes"))});
  ScoringConfig cfg;
  cfg.k = 4;
  const StepScore score = score_step(c, 0, *backend, cfg);
  CHECK(score.reward.value == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(score.reward.trajectory_count == 4);
  CHECK(score.reward.per_trajectory_p_yes == std::vector<double>{1.0, 1.0, 0.0, 1.0});
}

TEST_CASE("dropped unparseable trajectories do not dilute the mean") {
  const auto c = three_step_case(-1);
  const double ln9 = std::log(9.0);
  auto backend = replay_of(
      {entry(verdict_text("Yes"), TokenScoreMap{{" Yes", ln9}, {" No", 0.0}}),
       entry("rambling with no verification line"),
       entry(verdict_text("No"), TokenScoreMap{{" Yes", 0.0}, {" No", 0.0}}),
       entry(verdict_text("Huh"))});
  ScoringConfig cfg;
  cfg.k = 4;
  cfg.unparseable_policy = UnparseablePolicy::drop;
  const StepScore score = score_step(c, 0, *backend, cfg);
  CHECK(score.reward.value == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(score.reward.trajectory_count == 4);
  REQUIRE(score.reward.per_trajectory_p_yes.size() == 2);
  CHECK(score.reward.per_trajectory_p_yes[0] == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(score.reward.per_trajectory_p_yes[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(score.trajectories.size() == 4);
  CHECK(score.trajectories[1].verdict == Verdict::unparseable);
  CHECK_FALSE(score.trajectories[1].p_yes.has_value());
  validate_step_reward(score.reward);
}

TEST_CASE("count-as-half scores unparseable trajectories at one half") {
  const auto c = three_step_case(-1);
  auto backend = replay_of({entry(verdict_text("Yes")), entry("no verdict here")});
  ScoringConfig cfg;
  cfg.k = 2;
  cfg.unparseable_policy = UnparseablePolicy::count_as_half;
  const StepScore score = score_step(c, 0, *backend, cfg);
  CHECK(score.reward.value == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(score.reward.per_trajectory_p_yes == std::vector<double>{1.0, 0.5});
}

TEST_CASE("a step whose every trajectory is unparseable cannot be scored") {
  const auto c = three_step_case(-1);
  auto backend = replay_of({entry("nothing"), entry("still nothing")});
  ScoringConfig cfg;
  cfg.k = 2;
  try {
    score_step(c, 0, *backend, cfg);
    FAIL("expected scoring error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::scoring);
    CHECK(std::string(e.what()).find(c.id) != std::string::npos);
    CHECK(std::string(e.what()).find("step 0") != std::string::npos);
  }
}

TEST_CASE("k below one is rejected") {
  const auto c = three_step_case(-1);
  auto backend = replay_of({entry(verdict_text("Yes"))});
  ScoringConfig cfg;
  cfg.k = 0;
  CHECK_THROWS_AS(score_step(c, 0, *backend, cfg), Error);
}

TEST_CASE("scoring a full solution tracks the ground-truth error position") {
  const auto c = three_step_case(1);
  auto backend = make_backend(mock_oracle_configure({c}, 1.0, 23));
  ScoringConfig cfg;
  cfg.k = 3;
  const auto scores = score_solution(c, *backend, cfg);
  REQUIRE(scores.size() == 3);
  const auto rewards = rewards_of(scores);
  CHECK(rewards[0].value == 1.0);
  CHECK(rewards[1].value == 0.0);
  CHECK(rewards[2].value == 0.0);
  for (int i = 0; i < 3; ++i) CHECK(rewards[i].step_index == i);
}

TEST_CASE("solution scoring is deterministic and parallelism-invariant") {
  const auto c = three_step_case(2);
  auto backend = make_backend(mock_oracle_configure({c}, 0.7, 31));
  ScoringConfig serial;
  serial.k = 5;
  serial.parallelism = 1;
  ScoringConfig parallel = serial;
  parallel.parallelism = 4;
  const auto a = score_solution(c, *backend, serial);
  const auto b = score_solution(c, *backend, serial);
  const auto p = score_solution(c, *backend, parallel);
  REQUIRE(a.size() == b.size());
  REQUIRE(a.size() == p.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].reward.value == b[i].reward.value);
    CHECK(a[i].reward.value == p[i].reward.value);
    REQUIRE(a[i].trajectories.size() == b[i].trajectories.size());
    for (std::size_t s = 0; s < a[i].trajectories.size(); ++s) {
      CHECK(a[i].trajectories[s].analysis == b[i].trajectories[s].analysis);
      CHECK(a[i].trajectories[s].analysis == p[i].trajectories[s].analysis);
    }
  }
}
