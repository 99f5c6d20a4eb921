#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "prmh/case.hpp"
#include "prmh/core.hpp"

namespace prmh {

struct EvalConfig {
  double threshold = 0.5;
  std::vector<double> sweep_grid;  // strictly increasing, values in [0, 1]
};

struct CaseOutcome {
  std::string case_id;
  int predicted = -1;
  int gold = -1;
  bool hit = false;
};

// Accuracies are absent (not zero) when the corresponding subset of cases is
// empty; f1 is present only when both accuracies are.
struct EvalReport {
  std::optional<double> error_acc;
  std::optional<double> correct_acc;
  std::optional<double> f1;
  std::vector<CaseOutcome> per_case;
  std::string dataset_name;
};

/// Earliest-error prediction: the smallest step index whose reward falls
/// below the threshold, or -1 when every step clears it.
int predict_first_error(const std::vector<StepReward>& rewards, double threshold);

/// Scores predictions against gold labels. A case with gold != -1 is a hit
/// iff the predicted index equals gold; a case with gold == -1 is a hit iff
/// the prediction is -1. error_acc averages hits over the erroneous subset,
/// correct_acc over the error-free subset, both on the 0-100 scale.
EvalReport evaluate(const std::vector<BenchmarkCase>& cases,
                    const std::vector<std::vector<StepReward>>& rewards,
                    const EvalConfig& config, const std::string& dataset_name = "");

std::vector<std::pair<double, EvalReport>> threshold_sweep(
    const std::vector<BenchmarkCase>& cases,
    const std::vector<std::vector<StepReward>>& rewards,
    const EvalConfig& config, const std::string& dataset_name = "");

/// Loads a case file (JSON lines). Parse failures name the line number,
/// invariant violations name the case id. An empty file yields an empty list.
std::vector<BenchmarkCase> load_benchmark(const std::string& path);

void write_sweep_csv(const std::string& path,
                     const std::vector<std::pair<double, EvalReport>>& rows);

}  // namespace prmh
