#include "prmh/eval.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "prmh/error.hpp"
#include "prmh/io.hpp"

namespace prmh {

int predict_first_error(const std::vector<StepReward>& rewards, double threshold) {
  if (rewards.empty()) {
    throw Error(ErrorKind::empty_input, "predict_first_error: no step rewards");
  }
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    if (rewards[i].value < threshold) return static_cast<int>(i);
  }
  return -1;
}

EvalReport evaluate(const std::vector<BenchmarkCase>& cases,
                    const std::vector<std::vector<StepReward>>& rewards,
                    const EvalConfig& config, const std::string& dataset_name) {
  if (cases.size() != rewards.size()) {
    throw Error(ErrorKind::alignment,
                "evaluate: " + std::to_string(cases.size()) + " cases but " +
                    std::to_string(rewards.size()) + " reward lists");
  }
  EvalReport report;
  report.dataset_name = dataset_name;
  int error_total = 0, error_hits = 0;
  int correct_total = 0, correct_hits = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const BenchmarkCase& c = cases[i];
    if (rewards[i].size() != c.steps.size()) {
      throw Error(ErrorKind::alignment,
                  "evaluate: case " + c.id + " has " + std::to_string(c.steps.size()) +
                      " steps but " + std::to_string(rewards[i].size()) + " rewards");
    }
    const int predicted = predict_first_error(rewards[i], config.threshold);
    const bool hit = predicted == c.first_error;
    if (c.first_error != -1) {
      ++error_total;
      if (hit) ++error_hits;
    } else {
      ++correct_total;
      if (hit) ++correct_hits;
    }
    report.per_case.push_back({c.id, predicted, c.first_error, hit});
  }
  if (error_total > 0) {
    report.error_acc = 100.0 * error_hits / error_total;
  }
  if (correct_total > 0) {
    report.correct_acc = 100.0 * correct_hits / correct_total;
  }
  if (report.error_acc && report.correct_acc) {
    report.f1 = f1_score(*report.error_acc, *report.correct_acc);
  }
  return report;
}

std::vector<std::pair<double, EvalReport>> threshold_sweep(
    const std::vector<BenchmarkCase>& cases,
    const std::vector<std::vector<StepReward>>& rewards,
    const EvalConfig& config, const std::string& dataset_name) {
  if (config.sweep_grid.empty()) {
    throw Error(ErrorKind::invalid_argument, "threshold_sweep: empty grid");
  }
  for (std::size_t i = 0; i < config.sweep_grid.size(); ++i) {
    const double t = config.sweep_grid[i];
    if (!(t >= 0.0 && t <= 1.0)) {
      throw Error(ErrorKind::validation, "threshold_sweep: grid values must be in [0, 1]");
    }
    if (i > 0 && !(t > config.sweep_grid[i - 1])) {
      throw Error(ErrorKind::validation, "threshold_sweep: grid must be strictly increasing");
    }
  }
  std::vector<std::pair<double, EvalReport>> rows;
  rows.reserve(config.sweep_grid.size());
  for (double t : config.sweep_grid) {
    EvalConfig point = config;
    point.threshold = t;
    rows.emplace_back(t, evaluate(cases, rewards, point, dataset_name));
  }
  return rows;
}

std::vector<BenchmarkCase> load_benchmark(const std::string& path) {
  std::vector<BenchmarkCase> cases;
  std::set<std::string> seen_ids;
  io::for_each_jsonl(path, [&](int line_no, const nlohmann::json& j) {
    BenchmarkCase c;
    try {
      c = io::case_from_json(j);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::parse) {
        throw Error(ErrorKind::parse,
                    path + " line " + std::to_string(line_no) + ": " + e.what());
      }
      throw;
    }
    validate_case(c);
    if (!seen_ids.insert(c.id).second) {
      throw Error(ErrorKind::validation, "case " + c.id + ": duplicate id");
    }
    cases.push_back(std::move(c));
  });
  return cases;
}

namespace {

std::string metric_cell(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", *v);
  return buf;
}

}  // namespace

void write_sweep_csv(const std::string& path,
                     const std::vector<std::pair<double, EvalReport>>& rows) {
  std::string csv = "theta,error_acc,correct_acc,f1\n";
  for (const auto& [theta, report] : rows) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", theta);
    csv += buf;
    csv += ',';
    csv += metric_cell(report.error_acc);
    csv += ',';
    csv += metric_cell(report.correct_acc);
    csv += ',';
    csv += metric_cell(report.f1);
    csv += '\n';
  }
  io::write_text_file_atomic(path, csv);
}

}  // namespace prmh
