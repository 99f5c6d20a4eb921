#pragma once

#include <string>
#include <vector>

namespace prmh {

// A benchmark problem with a stepwise solution and the earliest-error label:
// first_error is the 0-based index of the first incorrect step, or -1 when
// every step is correct.
struct BenchmarkCase {
  std::string id;
  std::string problem;
  std::vector<std::string> steps;
  int first_error = -1;
};

// Throws a validation error naming the case when an invariant is broken.
void validate_case(const BenchmarkCase& c);

// Ground-truth correctness of one step under the earliest-error convention:
// steps before first_error are correct, steps at or after it are not.
bool step_is_correct(const BenchmarkCase& c, int step_index);

}  // namespace prmh
