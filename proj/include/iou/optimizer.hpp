#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "iou/box.hpp"
#include "iou/gradients.hpp"
#include "iou/losses.hpp"

namespace iou {

// Plain: pred -= alpha * grad. Sot: pred -= alpha * U_e * grad, so the update
// is proportional to the box scale.
enum class StepMode { Plain, Sot };

struct OptimConfig {
  double alpha = 0.1;
  std::size_t max_iters = 5000;
  double loss_tol = 1e-6;
  StepMode mode = StepMode::Sot;
  LossSpec loss;
};

// One optimization state. Record 0 is the initial state before any update;
// loss is the traced loss (the bare -eiou base is recorded with a +1 offset
// so its curve shares the sign convention of the convexified losses).
struct TraceRecord {
  std::size_t iter = 0;
  Box pred;
  double i_e = 0.0;
  double u_e = 0.0;
  double eiou = 0.0;
  double loss = 0.0;
  Grad4 grad;
  double step_norm = 0.0;  // l2 distance from the previous record's pred
};

enum class RunStatus { Converged, MaxIters, DegenerateStep };

struct Trace {
  std::vector<TraceRecord> records;
  RunStatus status = RunStatus::MaxIters;

  double final_loss() const { return records.back().loss; }
  double max_eiou() const;
  // max - min of the traced loss over the last n records.
  double loss_range_last(std::size_t n) const;
};

// One gradient step. alpha = 0 leaves pred unchanged. Throws
// DegenerateStepError when the updated box violates the box invariants.
Box step_plain(const Box& target, const Box& pred, double alpha, const LossSpec& loss);
Box step_sot(const Box& target, const Box& pred, double alpha, const LossSpec& loss);

// Iterates the configured step until traced loss <= loss_tol or max_iters
// updates. Deterministic. A degenerate step ends the run with the partial
// trace and status DegenerateStep.
Trace run(const Box& target, const Box& init, const OptimConfig& cfg);

// Number of steps in a trace whose loss rose by more than slack.
std::size_t monotonicity_violations(const Trace& trace, double slack = 1e-12);

struct SteadyDecreaseReport {
  std::size_t trials = 0;
  std::size_t violations = 0;  // steps where loss rose by more than the slack
  std::optional<std::size_t> first_bad_trial;
  Trace offending;  // trace of the first violating trial
};

// Empirical check of the steady-decrease property: SOT runs with the smooth
// loss from seeded random pairs must have loss[k+1] <= loss[k] + 1e-12 at
// every step. max_iters bounds each trial's run.
SteadyDecreaseReport steady_decrease_check(std::size_t trials, std::uint64_t seed, double alpha,
                              std::size_t max_iters = 500);

}  // namespace iou
