#include "prmh/case.hpp"

#include "prmh/error.hpp"

namespace prmh {

void validate_case(const BenchmarkCase& c) {
  auto fail = [&](const std::string& what) {
    const std::string who = c.id.empty() ? "(unnamed case)" : c.id;
    throw Error(ErrorKind::validation, "case " + who + ": " + what);
  };
  if (c.id.empty()) fail("empty id");
  if (c.steps.empty()) fail("steps must be non-empty");
  const int n = static_cast<int>(c.steps.size());
  if (c.first_error != -1 && (c.first_error < 0 || c.first_error >= n)) {
    fail("first_error must be -1 or in [0, " + std::to_string(n) + ")");
  }
}

bool step_is_correct(const BenchmarkCase& c, int step_index) {
  return c.first_error == -1 || step_index < c.first_error;
}

}  // namespace prmh
