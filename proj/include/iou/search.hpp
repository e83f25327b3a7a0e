#pragma once

#include <cstdint>
#include <optional>

#include "iou/box.hpp"

namespace iou {

// Random-search budget shared by the counterexample finders.
struct SearchBudget {
  std::size_t max_samples = 100000;
  std::uint64_t seed = 1;
  double range_lo = -2.0;
  double range_hi = 2.0;
};

// A pair of predictions against one target where the smooth-l1 ordering
// contradicts the IoU ordering: pred_a localizes better (higher siou) yet
// carries the larger smooth-l1 loss.
struct MisalignWitness {
  Box target;
  Box pred_a;
  Box pred_b;
  double l1_a = 0.0;
  double l1_b = 0.0;
  double siou_a = 0.0;
  double siou_b = 0.0;
  std::size_t sample_index = 0;
};

// Scans sample indices in order; each sample derives from (seed, index), so
// the result is the lowest-index witness for any thread count.
std::optional<MisalignWitness> find_misalignment(const SearchBudget& budget,
                                                 unsigned threads = 1);

// An overlapping pair whose giou is negative (below the giou of a merely
// touching pair), together with its eiou and a constructed touching pair.
struct GiouAnomalyWitness {
  Box target;
  Box pred;
  double giou_overlapping = 0.0;
  double eiou_overlapping = 0.0;
  Box touch_pred;  // target translated to share its right edge
  double giou_touching = 0.0;
  std::size_t sample_index = 0;
};

std::optional<GiouAnomalyWitness> find_giou_anomaly(const SearchBudget& budget,
                                                    unsigned threads = 1);

}  // namespace iou
