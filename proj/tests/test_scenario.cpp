#include <doctest.h>

#include <cmath>
#include <sstream>

#include "iou/errors.hpp"
#include "iou/scenario.hpp"
#include "iou/search.hpp"

using namespace iou;

namespace {

std::vector<Scenario> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_scenarios(in);
}

const char* kSample = R"(# sample file
format: eiou-scenario/1

[scenario]
name = quick
target = 0,0,1,1
init = 0,0,0.5,0.5
mode = sot
loss = neg-eiou:p=2
alpha = 0.1
max_iters = 500
loss_tol = 1e-6
expect.final_loss_le = 1e-6
expect.within_iters = 500

[scenario]
name = wobble
target = 0,0,1,1
init = 0,0,0.5,0.5
mode = sot
loss = neg-eiou:raw
alpha = 0.1
max_iters = 800
expect.loss_range_last_ge = 0.01
)";

}  // namespace

TEST_CASE("scenario files parse into configured runs") {
  const auto scenarios = parse(kSample);
  REQUIRE(scenarios.size() == 2);
  CHECK(scenarios[0].name == "quick");
  CHECK(scenarios[0].target == Box{0, 0, 1, 1});
  CHECK(scenarios[0].cfg.mode == StepMode::Sot);
  CHECK(scenarios[0].cfg.alpha == 0.1);
  CHECK(scenarios[0].cfg.max_iters == 500);
  CHECK(scenarios[0].expect.final_loss_le == 1e-6);
  CHECK(scenarios[1].cfg.loss.convexified == false);
  CHECK(scenarios[1].expect.loss_range_last_ge == 0.01);
  CHECK(scenarios[1].expect.range_window == 100);
}

TEST_CASE("scenario parsing rejects malformed input") {
  CHECK_THROWS_AS(parse("[scenario]\nname = x\n"), ParseError);  // missing format tag
  CHECK_THROWS_AS(parse("format: eiou-scenario/2\n"), ParseError);
  CHECK_THROWS_AS(parse("format: eiou-scenario/1\nname = orphan\n"), ParseError);
  CHECK_THROWS_AS(
      parse("format: eiou-scenario/1\n[scenario]\nname = a\ninit = 0,0,1,1\n"),
      ParseError);  // no target
  CHECK_THROWS_AS(parse("format: eiou-scenario/1\n[scenario]\nname = a\n"
                        "target = 0,0,1,1\ninit = 0,0,1,1\nwhatever = 1\n"),
                  ParseError);
  // duplicate names
  CHECK_THROWS_AS(parse("format: eiou-scenario/1\n"
                        "[scenario]\nname = a\ntarget = 0,0,1,1\ninit = 0,0,0.5,0.5\n"
                        "[scenario]\nname = a\ntarget = 0,0,1,1\ninit = 0,0,0.5,0.5\n"),
                  ParseError);
  // names feed file paths and stay restricted
  CHECK_THROWS_AS(parse("format: eiou-scenario/1\n[scenario]\nname = ../escape\n"
                        "target = 0,0,1,1\ninit = 0,0,0.5,0.5\n"),
                  ParseError);
  // line number lands on the offending line
  try {
    parse("format: eiou-scenario/1\n[scenario]\nname = a\ntarget = 0,0,zz,1\n");
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(e.line == 4);
  }
}

TEST_CASE("expectations evaluate against the finished trace") {
  const auto scenarios = parse(kSample);
  for (const Scenario& s : scenarios) {
    const Trace trace = run(s.target, s.init, s.cfg);
    const auto results = check_expectations(s, trace);
    CHECK(!results.empty());
    for (const auto& r : results) {
      CHECK(r.pass);
    }
  }
}

TEST_CASE("failed expectations carry diagnostics") {
  auto scenarios = parse(kSample);
  Scenario strict = scenarios[0];
  strict.expect.final_loss_le = 0.0;  // unreachable bound
  const Trace trace = run(strict.target, strict.init, strict.cfg);
  const auto results = check_expectations(strict, trace);
  bool saw_fail = false;
  for (const auto& r : results) {
    if (r.name == "final_loss_le") {
      CHECK_FALSE(r.pass);
      CHECK(!r.detail.empty());
      saw_fail = true;
    }
  }
  CHECK(saw_fail);
}

TEST_CASE("misalignment search finds and certifies a witness") {
  SearchBudget budget;
  budget.max_samples = 20000;
  budget.seed = 123;
  const auto witness = find_misalignment(budget);
  REQUIRE(witness.has_value());
  CHECK(witness->l1_a > witness->l1_b);
  CHECK(witness->siou_a > witness->siou_b);
  // independent recomputation from the emitted boxes
  CHECK(smooth_l1_box(witness->target, witness->pred_a) == witness->l1_a);
  CHECK(siou(witness->target, witness->pred_a) == witness->siou_a);

  budget.max_samples = 1;
  budget.seed = 1;  // first sample of this stream is not a witness
  CHECK_FALSE(find_misalignment(budget).has_value());
}

TEST_CASE("searches return the same lowest-index witness for any thread count") {
  SearchBudget budget;
  budget.max_samples = 50000;
  budget.seed = 123;
  const auto lone = find_misalignment(budget, 1);
  const auto pooled = find_misalignment(budget, 8);
  REQUIRE(lone.has_value());
  REQUIRE(pooled.has_value());
  CHECK(lone->sample_index == pooled->sample_index);
  CHECK(lone->target == pooled->target);
  CHECK(lone->pred_a == pooled->pred_a);
  CHECK(lone->l1_a == pooled->l1_a);

  const auto a = find_giou_anomaly(budget, 1);
  const auto b = find_giou_anomaly(budget, 8);
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  CHECK(a->sample_index == b->sample_index);
  CHECK(a->giou_overlapping == b->giou_overlapping);
}

TEST_CASE("giou anomaly search produces the three certified values") {
  SearchBudget budget;
  budget.max_samples = 50000;
  budget.seed = 5;
  const auto witness = find_giou_anomaly(budget);
  REQUIRE(witness.has_value());
  CHECK(witness->giou_overlapping < 0.0);
  CHECK(witness->eiou_overlapping > 0.0);
  CHECK(std::fabs(witness->giou_touching) <= 1e-12);
  CHECK(classify_overlap(witness->target, witness->pred) == OverlapClass::Overlapping);
  CHECK(classify_overlap(witness->target, witness->touch_pred) == OverlapClass::Touching);

  budget.range_lo = 0.0;
  budget.range_hi = 0.5;  // any pair in a tiny range still needs giou < 0
  budget.max_samples = 10;
  // a very small budget may legitimately come back empty
  const auto scarce = find_giou_anomaly(budget);
  if (scarce) CHECK(scarce->giou_overlapping < 0.0);
}
