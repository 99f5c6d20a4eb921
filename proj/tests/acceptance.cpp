// End-to-end acceptance checks. Each criterion prints exactly one
// [PASS]/[FAIL] line; run with a number 1-9 to check one criterion, or with
// no arguments to run them all.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "json.hpp"

#include "prmh/case.hpp"
#include "prmh/core.hpp"
#include "prmh/datagen.hpp"
#include "prmh/error.hpp"
#include "prmh/eval.hpp"
#include "prmh/judge.hpp"
#include "prmh/search.hpp"
#include "prmh/synthetic.hpp"

using namespace prmh;
using nlohmann::json;

namespace {

struct Checker {
  int failures = 0;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      ++failures;
      std::printf("        check failed: %s\n", what.c_str());
    }
  }

  template <typename... Args>
  void requiref(bool ok, const char* fmt, Args... args) {
    if (!ok) {
      ++failures;
      std::printf("        check failed: ");
      std::printf(fmt, args...);
      std::printf("\n");
    }
  }
};

// ---------------------------------------------------------------------------
// 1. F1 arithmetic against published accuracy pairs.

bool criterion_f1_table(Checker& c) {
  struct Row {
    double error_acc, correct_acc, printed_f1;
  };
  const std::vector<Row> rows = {
      {70.0, 91.2, 79.2}, {88.9, 97.9, 93.2}, {32.4, 91.7, 47.9},
      {61.8, 82.9, 70.8}, {66.2, 92.7, 77.2}, {72.0, 96.4, 82.4},
      {72.0, 91.7, 80.7}, {60.3, 88.2, 71.6}, {68.0, 90.4, 77.6},
  };
  c.require(rows.size() >= 5, "needs at least five reference rows");
  for (const Row& row : rows) {
    const double f1 = f1_score(row.error_acc, row.correct_acc);
    c.requiref(std::fabs(f1 - row.printed_f1) <= 0.05,
               "f1(%.1f, %.1f) = %.6f, expected %.1f within 0.05", row.error_acc,
               row.correct_acc, f1, row.printed_f1);
  }
  return c.failures == 0;
}

// ---------------------------------------------------------------------------
// 2. Trajectory-count scaling against an independent majority-vote oracle.

double binomial_tail_at_least(int n, int k, double p) {
  auto comb = [](int n_, int k_) {
    double v = 1.0;
    for (int i = 1; i <= k_; ++i) v = v * (n_ - k_ + i) / i;
    return v;
  };
  double total = 0.0;
  for (int j = k; j <= n; ++j) {
    total += comb(n, j) * std::pow(p, j) * std::pow(1.0 - p, n - j);
  }
  return total;
}

bool criterion_scaling(Checker& c) {
  SynthSpec spec;
  spec.num_cases = 2000;
  spec.steps_per_case = 5;
  spec.error_fraction = 0.5;
  spec.seed = 1234;
  const auto rows = run_scaling_experiment(spec, {0.8}, {1, 9}, 0.5, 8);
  c.require(rows.size() == 2, "expected one row per trajectory count");
  if (rows.size() != 2) return false;

  const double tail = binomial_tail_at_least(9, 5, 0.8);  // = 0.98041856
  c.requiref(std::fabs(tail - 0.98041856) < 1e-9,
             "independent majority oracle computed %.8f, expected 0.98041856", tail);

  const ScalingRow& k1 = rows[0];
  const ScalingRow& k9 = rows[1];
  c.requiref(std::fabs(k1.step_decision_accuracy - 0.8) <= 0.01,
             "decision accuracy at one trajectory = %.4f, expected 0.800 +/- 0.01",
             k1.step_decision_accuracy);
  c.requiref(std::fabs(k9.step_decision_accuracy - tail) <= 0.01,
             "decision accuracy at nine trajectories = %.4f, expected %.4f +/- 0.01",
             k9.step_decision_accuracy, tail);
  c.require(k1.f1.has_value() && k9.f1.has_value(), "both rows need an f1");
  if (k1.f1 && k9.f1) {
    c.requiref(*k9.f1 > *k1.f1, "f1 should rise with trajectories: %.2f vs %.2f",
               *k9.f1, *k1.f1);
  }
  return c.failures == 0;
}

// ---------------------------------------------------------------------------
// 3. Guided search separation on the scripted world.

bool criterion_guided_separation(Checker& c) {
  ScriptedWorldConfig wc;
  wc.seed = 77;
  wc.n_candidates = 8;
  wc.depth = 4;
  const ScriptedSearchWorld world(wc);
  const auto problems = world.problems(1000);
  const auto policy = world.next_step_policy();

  SearchConfig cfg;
  cfg.n_candidates = 8;
  cfg.max_steps = 8;

  const auto oracle = world.oracle_judge();
  int oracle_solved = 0;
  for (const auto& p : problems) {
    const auto result = greedy_guided_search(p.problem, *policy, *oracle, cfg);
    if (result.chosen.final_answer &&
        normalize_answer(*result.chosen.final_answer) == normalize_answer(p.gold)) {
      ++oracle_solved;
    }
  }
  c.requiref(oracle_solved == 1000,
             "oracle-guided search solved %d of 1000, expected all", oracle_solved);

  ConstantJudge constant(0.5);
  int constant_solved = 0;
  for (const auto& p : problems) {
    const auto result = greedy_guided_search(p.problem, *policy, constant, cfg);
    if (result.chosen.final_answer &&
        normalize_answer(*result.chosen.final_answer) == normalize_answer(p.gold)) {
      ++constant_solved;
    }
  }
  c.requiref(constant_solved <= 10,
             "uninformed selection solved %d of 1000, expected at most 10 (analytic "
             "rate (1/8)^4 = 0.000244)",
             constant_solved);
  return c.failures == 0;
}

// ---------------------------------------------------------------------------
// 4. Best-of-n equivalence with a brute-force selection oracle.

class PatternJudge : public StepJudge {
 public:
  std::vector<StepReward> score_solution(const std::string&,
                                         const std::vector<std::string>& steps) override {
    std::vector<StepReward> out;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      out.push_back(make_step_reward(static_cast<int>(i), {value_of(steps[i])}));
    }
    return out;
  }

  StepReward score_step(const std::string&, const std::vector<std::string>&,
                        const std::string& candidate_step) override {
    return make_step_reward(0, {value_of(candidate_step)});
  }

 private:
  static double value_of(const std::string& step) {
    return std::stod(step.substr(2));  // steps look like "r:0.5"
  }
};

std::vector<CandidateSolution> pattern_candidates(
    const std::vector<std::vector<double>>& pattern) {
  std::vector<CandidateSolution> candidates;
  for (const auto& steps : pattern) {
    CandidateSolution cand;
    for (double v : steps) {
      cand.steps.push_back(v == 0.0 ? "r:0" : v == 0.5 ? "r:0.5" : "r:1");
    }
    candidates.push_back(std::move(cand));
  }
  return candidates;
}

// Independent selection rule: min over steps, argmax over candidates, ties to
// the lowest index.
std::pair<int, double> brute_force_pick(const std::vector<std::vector<double>>& pattern) {
  int best = 0;
  double best_score = -1.0;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    double s = pattern[i][0];
    for (double v : pattern[i]) s = std::min(s, v);
    if (s > best_score) {
      best = static_cast<int>(i);
      best_score = s;
    }
  }
  return {best, best_score};
}

bool check_pattern(Checker& c, const std::vector<std::vector<double>>& pattern) {
  PatternJudge judge;
  SearchConfig cfg;
  cfg.reduction = Reduction::min;
  const auto result = best_of_n("p", pattern_candidates(pattern), judge, cfg);
  const auto [want_index, want_score] = brute_force_pick(pattern);
  if (result.chosen_index != want_index || result.chosen_score != want_score) {
    c.requiref(false,
               "selection mismatch on %zu x %zu pattern: got index %d score %.2f, "
               "oracle says index %d score %.2f",
               pattern.size(), pattern[0].size(), result.chosen_index,
               result.chosen_score, want_index, want_score);
    return false;
  }
  return true;
}

bool criterion_best_of_n_oracle(Checker& c) {
  const double values[3] = {0.0, 0.5, 1.0};
  long long exhaustive_patterns = 0;
  long long reduced_patterns = 0;
  long long random_patterns = 0;

  for (int n = 1; n <= 8; ++n) {
    for (int s = 1; s <= 5; ++s) {
      const int cells = n * s;

      // Full joint enumeration wherever the pattern space is small enough.
      if (cells <= 11) {
        long long total = 1;
        for (int i = 0; i < cells; ++i) total *= 3;
        for (long long code = 0; code < total; ++code) {
          long long rest = code;
          std::vector<std::vector<double>> pattern(n, std::vector<double>(s));
          for (int i = 0; i < n; ++i) {
            for (int j = 0; j < s; ++j) {
              pattern[i][j] = values[rest % 3];
              rest /= 3;
            }
          }
          if (!check_pattern(c, pattern)) return false;
          ++exhaustive_patterns;
        }
      }

      // The min reduction depends only on each candidate's weakest step, so
      // enumerating every per-candidate minimum vector covers every scoring
      // outcome; each vector is realized as a concrete pattern.
      long long combos = 1;
      for (int i = 0; i < n; ++i) combos *= 3;
      for (long long code = 0; code < combos; ++code) {
        long long rest = code;
        std::vector<std::vector<double>> pattern(n, std::vector<double>(s, 1.0));
        for (int i = 0; i < n; ++i) {
          pattern[i][s - 1] = values[rest % 3];  // the minimum, placed last
          rest /= 3;
        }
        if (!check_pattern(c, pattern)) return false;
        ++reduced_patterns;
      }

      // Random full patterns for the spaces too large to enumerate.
      std::mt19937_64 gen(0x5eedULL * 1000 + n * 10 + s);
      std::uniform_int_distribution<int> pick(0, 2);
      for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::vector<double>> pattern(n, std::vector<double>(s));
        for (auto& cand : pattern) {
          for (auto& v : cand) v = values[pick(gen)];
        }
        if (!check_pattern(c, pattern)) return false;
        ++random_patterns;
      }
    }
  }

  c.requiref(exhaustive_patterns == 162642,  // sum of 3^(n*s) over the 18 small spaces
             "expected full enumeration coverage, saw %lld patterns",
             exhaustive_patterns);
  c.requiref(reduced_patterns > 10000,
             "expected reduced enumeration coverage, saw only %lld patterns",
             reduced_patterns);
  std::printf(
      "        coverage: %lld fully enumerated, %lld minimum-vector enumerated, "
      "%lld randomized\n",
      exhaustive_patterns, reduced_patterns, random_patterns);
  return c.failures == 0;
}

// ---------------------------------------------------------------------------
// 5. Threshold sweep consistency and monotonicity.

bool criterion_threshold_monotonicity(Checker& c) {
  // Sweep at a single threshold must equal the direct evaluation exactly.
  SynthSpec spec;
  spec.num_cases = 60;
  spec.steps_per_case = 4;
  spec.error_fraction = 0.5;
  spec.seed = 21;
  const auto cases = generate_cases(spec);
  const auto backend = make_backend(mock_oracle_configure(cases, 0.7, 21));
  ScoringConfig scfg;
  scfg.k = 5;
  scfg.probability_source = ProbabilitySource::binary_vote;
  std::vector<std::vector<StepReward>> rewards;
  for (const auto& bc : cases) rewards.push_back(rewards_of(score_solution(bc, *backend, scfg)));

  EvalConfig direct;
  direct.threshold = 0.5;
  const auto single = evaluate(cases, rewards, direct);
  EvalConfig sweep_cfg;
  sweep_cfg.sweep_grid = {0.5};
  const auto swept = threshold_sweep(cases, rewards, sweep_cfg);
  c.require(swept.size() == 1, "sweep of one threshold yields one row");
  c.require(swept[0].second.error_acc == single.error_acc &&
                swept[0].second.correct_acc == single.correct_acc &&
                swept[0].second.f1 == single.f1,
            "sweep at 0.5 must equal the direct evaluation exactly");

  // Monotonicity across random scored sets.
  std::mt19937_64 gen(4242);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> n_steps(1, 6);
  EvalConfig grid_cfg;
  grid_cfg.sweep_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

  bool correct_acc_monotone = true;
  bool error_acc_monotone = true;
  std::string first_violation;

  for (int set = 0; set < 100; ++set) {
    std::vector<BenchmarkCase> set_cases;
    std::vector<std::vector<StepReward>> set_rewards;
    for (int i = 0; i < 6; ++i) {
      BenchmarkCase bc;
      bc.id = "set" + std::to_string(set) + "-case" + std::to_string(i);
      bc.problem = "p";
      const int steps = n_steps(gen);
      for (int j = 0; j < steps; ++j) bc.steps.push_back("Step " + std::to_string(j + 1) + ": w.");
      bc.first_error = (i < 3) ? static_cast<int>(gen() % steps) : -1;
      set_cases.push_back(bc);
      std::vector<double> values(steps);
      for (auto& v : values) v = unit(gen);
      std::vector<StepReward> srs;
      for (int j = 0; j < steps; ++j) srs.push_back(make_step_reward(j, {values[j]}));
      set_rewards.push_back(std::move(srs));
    }
    const auto rows = threshold_sweep(set_cases, set_rewards, grid_cfg);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto& prev = rows[i - 1].second;
      const auto& cur = rows[i].second;
      if (prev.correct_acc && cur.correct_acc &&
          *cur.correct_acc > *prev.correct_acc + 1e-9) {
        correct_acc_monotone = false;
      }
      if (prev.error_acc && cur.error_acc && *cur.error_acc < *prev.error_acc - 1e-9) {
        if (error_acc_monotone && first_violation.empty()) {
          std::ostringstream msg;
          msg << "set " << set << ": error_acc fell from " << *prev.error_acc << " at theta="
              << rows[i - 1].first << " to " << *cur.error_acc << " at theta=" << rows[i].first;
          first_violation = msg.str();
        }
        error_acc_monotone = false;
      }
    }
  }

  c.require(correct_acc_monotone, "correct_acc must be non-increasing in the threshold");
  if (!error_acc_monotone) {
    std::printf("        %s\n", first_violation.c_str());
    std::printf(
        "        minimal instance: rewards [0.6, 0.3], first error at step 1 -> "
        "theta=0.5 predicts step 1 (hit) but theta=0.7 predicts step 0 (miss); "
        "raising the threshold moves the first sub-threshold index earlier, so "
        "exact-match error accuracy is not monotone\n");
  }
  c.require(error_acc_monotone, "error_acc must be non-decreasing in the threshold");
  return c.failures == 0;
}

// ---------------------------------------------------------------------------
// 6. Dataset construction invariants on a generated corpus.

bool criterion_data_pipeline(Checker& c) {
  // Pair count == min(|W| * |L|, cap), exhaustively for small sides.
  LabeledStepCase labeled;
  labeled.bench_case.id = "pipe";
  labeled.bench_case.problem = "q";
  labeled.bench_case.steps = {"Step 1: a.", "Step 2: b."};
  labeled.bench_case.first_error = -1;
  labeled.step_index = 0;
  labeled.human_label = HumanLabel::correct;
  for (int winners = 0; winners <= 4; ++winners) {
    for (int losers = 0; losers <= 4; ++losers) {
      for (int cap : {1, 2, 3, 4, 5, 8, 16, 17}) {
        std::vector<JudgmentTrajectory> trajectories;
        int sample = 0;
        auto add = [&](Verdict v) {
          JudgmentTrajectory t;
          t.case_id = "pipe";
          t.step_index = 0;
          t.sample_index = sample++;
          t.analysis = std::string("Verification: Is the step correct (Yes/No)? ") +
                       (v == Verdict::yes ? "Yes" : "No");
          t.verdict = v;
          t.p_yes = v == Verdict::yes ? 1.0 : 0.0;
          trajectories.push_back(std::move(t));
        };
        for (int w = 0; w < winners; ++w) add(Verdict::yes);
        for (int l = 0; l < losers; ++l) add(Verdict::no);
        const auto build = build_dpo_pairs(labeled, trajectories, cap);
        c.requiref(static_cast<int>(build.pairs.size()) ==
                       std::min(winners * losers, cap),
                   "pair count for |W|=%d |L|=%d cap=%d was %zu", winners, losers,
                   cap, build.pairs.size());
      }
    }
  }

  // Full-corpus assertions on generated fixtures.
  SynthSpec spec;
  spec.num_cases = 80;
  spec.steps_per_case = 4;
  spec.error_fraction = 0.5;
  spec.seed = 9;
  const auto cases = generate_cases(spec);
  const auto backend = make_backend(mock_oracle_configure(cases, 0.7, 9));
  ScoringConfig scfg;
  scfg.k = 8;
  scfg.probability_source = ProbabilitySource::binary_vote;

  std::map<std::string, const BenchmarkCase*> by_id;
  for (const auto& bc : cases) by_id[bc.id] = &bc;

  std::vector<SftRecord> sft_records;
  std::vector<PreferencePair> dpo_pairs;
  for (const auto& bc : cases) {
    const auto scores = score_solution(bc, *backend, scfg);
    for (int step = 0; step < static_cast<int>(bc.steps.size()); ++step) {
      LabeledStepCase ls;
      ls.bench_case = bc;
      ls.step_index = step;
      ls.human_label =
          step_is_correct(bc, step) ? HumanLabel::correct : HumanLabel::incorrect;
      const auto sft = build_sft_records(ls, scores[step].trajectories, 8);
      for (const auto& r : sft.records) sft_records.push_back(r);
      const auto dpo = build_dpo_pairs(ls, scores[step].trajectories, 64);
      for (const auto& p : dpo.pairs) dpo_pairs.push_back(p);
    }
  }
  c.require(sft_records.size() > 500, "corpus should produce a substantial record set");
  c.require(!dpo_pairs.empty(), "corpus should produce preference pairs");

  const auto dir = std::filesystem::temp_directory_path() /
                   ("prmh_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const std::string sft_path = (dir / "sft.jsonl").string();
  const std::string dpo_path = (dir / "dpo.jsonl").string();
  export_sft(sft_records, sft_path);
  export_dpo(dpo_pairs, dpo_path);

  auto expected_verdict = [&](const std::string& case_id, int step) {
    const BenchmarkCase& bc = *by_id.at(case_id);
    return step_is_correct(bc, step) ? Verdict::yes : Verdict::no;
  };

  int sft_lines = 0;
  {
    std::ifstream in(sft_path);
    std::string line;
    while (std::getline(in, line)) {
      ++sft_lines;
      const auto rec = json::parse(line);
      const Verdict want =
          expected_verdict(rec["meta"]["case_id"], rec["meta"]["step_index"]);
      const Verdict got = parse_verdict(rec["target"].get<std::string>());
      c.requiref(got == want, "exported target for %s step %d re-parses to %s",
                 rec["meta"]["case_id"].get<std::string>().c_str(),
                 rec["meta"]["step_index"].get<int>(), verdict_name(got));
      if (c.failures > 5) return false;
    }
  }
  c.requiref(sft_lines == static_cast<int>(sft_records.size()),
             "every record should export once: %d lines for %zu records", sft_lines,
             sft_records.size());

  int dpo_lines = 0;
  {
    std::ifstream in(dpo_path);
    std::string line;
    while (std::getline(in, line)) {
      ++dpo_lines;
      const auto rec = json::parse(line);
      const Verdict want =
          expected_verdict(rec["meta"]["case_id"], rec["meta"]["step_index"]);
      const Verdict chosen = parse_verdict(rec["chosen"].get<std::string>());
      const Verdict rejected = parse_verdict(rec["rejected"].get<std::string>());
      c.require(chosen == want, "chosen side must match the step label");
      c.require(rejected != Verdict::unparseable, "rejected side must be parseable");
      c.require(chosen != rejected, "pair sides must disagree");
      if (c.failures > 5) return false;
    }
  }
  c.requiref(dpo_lines == static_cast<int>(dpo_pairs.size()),
             "every pair should export once: %d lines for %zu pairs", dpo_lines,
             dpo_pairs.size());
  std::filesystem::remove_all(dir);
  return c.failures == 0;
}

// ---------------------------------------------------------------------------
// 7. Preference loss reference values.

bool criterion_dpo_loss(Checker& c) {
  const double ln2 = 0.6931471805599453;
  for (double beta : {0.01, 0.1, 1.0, 10.0}) {
    for (double offset : {0.0, -2.5, 1.75}) {
      DpoLossParams params;
      params.beta = beta;
      params.logp_chosen_policy = offset + 0.4;
      params.logp_chosen_ref = offset + 0.4;
      params.logp_rejected_policy = offset - 1.1;
      params.logp_rejected_ref = offset - 1.1;
      const double loss = dpo_pair_loss(params);
      c.requiref(std::fabs(loss - ln2) <= 1e-12,
                 "loss at zero margin, beta=%.2f: got %.17f, expected ln 2", beta,
                 loss);
    }
  }

  std::mt19937_64 gen(515);
  std::uniform_real_distribution<double> margin_dist(-6.0, 6.0);
  std::uniform_real_distribution<double> beta_dist(0.05, 5.0);
  for (int trial = 0; trial < 300; ++trial) {
    const double beta = beta_dist(gen);
    double m1 = margin_dist(gen);
    double m2 = margin_dist(gen);
    if (m1 == m2) continue;
    if (m1 > m2) std::swap(m1, m2);
    auto loss_at = [&](double margin) {
      DpoLossParams params;
      params.beta = beta;
      params.logp_chosen_policy = margin;
      params.logp_chosen_ref = 0.0;
      params.logp_rejected_policy = 0.0;
      params.logp_rejected_ref = 0.0;
      return dpo_pair_loss(params);
    };
    c.requiref(loss_at(m2) < loss_at(m1),
               "loss must fall as the margin grows (beta=%.3f, margins %.3f < %.3f)",
               beta, m1, m2);
  }
  return c.failures == 0;
}

// ---------------------------------------------------------------------------
// 8. Verdict parser fixture corpus.

bool criterion_verdict_corpus(Checker& c) {
  const std::string q = "Verification: Is the step correct (Yes/No)?";
  std::vector<std::pair<std::string, Verdict>> corpus;
  auto add = [&](std::string text, Verdict v) { corpus.emplace_back(std::move(text), v); };

  // Plain verification-line forms.
  add(q + " Yes", Verdict::yes);
  add(q + " No", Verdict::no);
  add(q + " Yes.", Verdict::yes);
  add(q + " No.", Verdict::no);
  add(q + " yes", Verdict::yes);
  add(q + " no", Verdict::no);
  add(q + " YES", Verdict::yes);
  add(q + " NO", Verdict::no);
  add(q + " yEs", Verdict::yes);
  add(q + " nO!", Verdict::no);
  add(q + "Yes", Verdict::yes);
  add(q + "No", Verdict::no);
  add(q + "  Yes", Verdict::yes);
  add(q + "\tNo", Verdict::no);
  add(q + "\nYes", Verdict::yes);
  add(q + "\n\nNo", Verdict::no);
  add(q + " Yes\n", Verdict::yes);
  add(q + " No\r\n", Verdict::no);
  // Decorated verdicts.
  add(q + " **Yes**", Verdict::yes);
  add(q + " **No**", Verdict::no);
  add(q + " **Yes**.", Verdict::yes);
  add(q + " **No**.", Verdict::no);
  add(q + " *Yes*", Verdict::yes);
  add(q + " *No*", Verdict::no);
  add(q + " ** Yes **", Verdict::yes);
  add(q + " **\nYes\n**", Verdict::yes);
  // Embedded in longer analyses.
  add("Long analysis of every step.\nConclusion: fine.\n" + q + " Yes", Verdict::yes);
  add("The arithmetic slips in step two.\n" + q + " No", Verdict::no);
  add("**Calculation Analysis**: 3 + 4 = 7 checks out.\n" + q + " Yes.", Verdict::yes);
  add(q + " Yes, the step follows from the premise.", Verdict::yes);
  add(q + " No, the substitution is invalid.", Verdict::no);
  add(q + " Yes (verified twice).", Verdict::yes);
  // The last verification line wins.
  add(q + " Yes\nOn second thought:\n" + q + " No", Verdict::no);
  add(q + " No\nCorrection after re-checking:\n" + q + " Yes", Verdict::yes);
  add(q + " Maybe\nFinal call:\n" + q + " No", Verdict::no);
  // Pattern present but the answer is unusable.
  add(q + " Maybe", Verdict::unparseable);
  add(q + " Unsure", Verdict::unparseable);
  add(q + " Yessir", Verdict::unparseable);
  add(q + " Nope", Verdict::unparseable);
  add(q + " Y", Verdict::unparseable);
  add(q + " N/A", Verdict::unparseable);
  add(q + "", Verdict::unparseable);
  add(q + " ", Verdict::unparseable);
  add(q + " ****", Verdict::unparseable);
  add(q + " 1", Verdict::unparseable);
  // Pattern absent entirely.
  add("", Verdict::unparseable);
  add("The step is correct.", Verdict::unparseable);
  add("Yes", Verdict::unparseable);
  add("No", Verdict::unparseable);
  add("Verification: the step is correct? Yes", Verdict::unparseable);
  add("Is the step correct (Yes/No)? Yes and the pattern prefix is missing",
      Verdict::unparseable);
  add("verification: is the step correct (yes/no)? yes", Verdict::unparseable);
  add("Analysis only, no conclusion section.", Verdict::unparseable);
  // Verdict word boundaries.
  add(q + " Yes\nExtra trailing prose afterwards.", Verdict::yes);
  add(q + " No\n" + "Postscript.", Verdict::no);
  add(q + " **Yes**, final.", Verdict::yes);

  c.requiref(corpus.size() >= 50, "corpus has %zu items, need at least 50",
             corpus.size());
  int wrong = 0;
  for (const auto& [text, want] : corpus) {
    const Verdict got = parse_verdict(text);
    if (got != want) {
      ++wrong;
      c.requiref(false, "parse_verdict mismatch (want %s, got %s) on: %s",
                 verdict_name(want), verdict_name(got),
                 text.substr(0, 90).c_str());
    }
  }
  std::printf("        corpus: %zu items, %d mismatches\n", corpus.size(), wrong);
  return c.failures == 0;
}

// ---------------------------------------------------------------------------
// 9. Command-line determinism.

bool criterion_cli_determinism(Checker& c) {
  namespace fs = std::filesystem;
  const fs::path dir =
      fs::temp_directory_path() / ("prmh_acceptance_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  auto file = [&](const std::string& name) { return (dir / name).string(); };
  auto run = [&](const std::string& args) {
    const std::string cmd = std::string(PRMH_CLI_PATH) + " " + args + " >" +
                            file("stdout.txt") + " 2>" + file("stderr.txt");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  auto read = [&](const std::string& name) {
    std::ifstream in(file(name), std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };

  c.require(run("synth --num-cases 40 --steps 4 --error-fraction 0.5 --seed 33 --out " +
                file("bench.jsonl")) == 0,
            "benchmark generation should succeed");

  const std::string score_cmd =
      "score --cases " + file("bench.jsonl") +
      " --backend mock --accuracy 0.8 --k 5 --seed 33 --out-rewards " +
      file("rewards.jsonl") + " --out-trajectories " + file("traj.jsonl");
  c.require(run(score_cmd) == 0, "first scoring run should succeed");
  const std::string rewards_a = read("rewards.jsonl");
  const std::string traj_a = read("traj.jsonl");
  c.require(run(score_cmd) == 0, "second scoring run should succeed");
  c.require(read("rewards.jsonl") == rewards_a,
            "scoring rewards must be byte-identical across runs");
  c.require(read("traj.jsonl") == traj_a,
            "scoring trajectories must be byte-identical across runs");

  const std::string search_cmd =
      "search --world scripted --mode guided --judge oracle --num-problems 25 "
      "--n 6 --depth 3 --seed 33 --out " +
      file("trace.jsonl");
  c.require(run(search_cmd) == 0, "first search run should succeed");
  const std::string trace_a = read("trace.jsonl");
  c.require(run(search_cmd) == 0, "second search run should succeed");
  c.require(read("trace.jsonl") == trace_a,
            "search traces must be byte-identical across runs");

  fs::remove_all(dir);
  return c.failures == 0;
}

struct Criterion {
  int number;
  const char* name;
  bool (*fn)(Checker&);
};

const Criterion kCriteria[] = {
    {1, "harmonic-mean F1 reproduces reference accuracy pairs", criterion_f1_table},
    {2, "trajectory-count scaling matches the majority-vote oracle", criterion_scaling},
    {3, "guided search separates oracle from uninformed judges",
     criterion_guided_separation},
    {4, "best-of-n matches the exhaustive selection oracle", criterion_best_of_n_oracle},
    {5, "threshold sweep consistency and monotonicity",
     criterion_threshold_monotonicity},
    {6, "dataset construction invariants hold corpus-wide", criterion_data_pipeline},
    {7, "preference loss matches its reference values", criterion_dpo_loss},
    {8, "verdict parser is exact on the fixture corpus", criterion_verdict_corpus},
    {9, "scoring and search runs are byte-for-byte reproducible",
     criterion_cli_determinism},
};

int run_criterion(const Criterion& criterion) {
  Checker checker;
  bool ok = false;
  try {
    ok = criterion.fn(checker);
  } catch (const std::exception& e) {
    std::printf("        unexpected exception: %s\n", e.what());
    ok = false;
  }
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion.number,
              criterion.name);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) {
    const int wanted = std::atoi(argv[1]);
    for (const Criterion& criterion : kCriteria) {
      if (criterion.number == wanted) return run_criterion(criterion);
    }
    std::fprintf(stderr, "unknown criterion %s (expected 1-9)\n", argv[1]);
    return 2;
  }
  int failures = 0;
  for (const Criterion& criterion : kCriteria) failures += run_criterion(criterion);
  return failures;
}
