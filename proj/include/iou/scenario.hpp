#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "iou/box.hpp"
#include "iou/optimizer.hpp"

namespace iou {

// Assertions a scenario may attach to its finished trace.
struct ScenarioExpect {
  std::optional<double> final_loss_le;
  std::optional<std::size_t> within_iters;    // converged and final iter <= n
  std::optional<double> loss_range_last_ge;   // oscillation over the window
  std::size_t range_window = 100;
  std::optional<double> eiou_max_ge;
  std::optional<double> eiou_max_lt;
};

// One optimization experiment: a (target, init) pair, the optimizer
// configuration, and the assertions the result must satisfy.
struct Scenario {
  std::string name;
  Box target;
  Box init;
  OptimConfig cfg;
  ScenarioExpect expect;
};

// Parses the key-value scenario format. The first effective line must be
// the format tag "format: eiou-scenario/1"; '#' starts a comment; each
// "[scenario]" section needs name, target and init. Names must be unique.
// Throws ParseError with the offending line number.
std::vector<Scenario> parse_scenarios(std::istream& in);
std::vector<Scenario> load_scenarios(const std::string& path);

struct AssertionResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<AssertionResult> check_expectations(const Scenario& scenario,
                                                const Trace& trace);

}  // namespace iou
