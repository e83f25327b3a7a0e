#include "iou/search.hpp"

#include <atomic>
#include <thread>
#include <vector>

#include "iou/errors.hpp"
#include "iou/losses.hpp"
#include "iou/rng.hpp"

namespace iou {

namespace {

void check_budget(const SearchBudget& b) {
  if (b.max_samples < 1) throw DomainError("search budget needs max_samples >= 1");
  if (!(b.range_lo < b.range_hi)) throw DomainError("empty coordinate range");
}

// Lowest sample index accepted by is_hit, or nullopt. Each index is evaluated
// independently (samples derive from (seed, index) substreams), so any worker
// partition returns the same index; workers stop once they pass the best hit.
template <typename IsHit>
std::optional<std::size_t> first_hit_index(std::size_t n, unsigned threads,
                                           const IsHit& is_hit) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) {
      if (is_hit(i)) return i;
    }
    return std::nullopt;
  }

  std::atomic<std::size_t> best{n};
  const unsigned n_workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (unsigned w = 0; w < n_workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += n_workers) {
        if (i >= best.load(std::memory_order_relaxed)) break;
        if (is_hit(i)) {
          std::size_t cur = best.load(std::memory_order_relaxed);
          while (i < cur && !best.compare_exchange_weak(cur, i)) {
          }
          break;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  const std::size_t found = best.load();
  if (found < n) return found;
  return std::nullopt;
}

struct MisalignSample {
  Box target, p1, p2;
  double l1_1, l1_2, s1, s2;
};

MisalignSample misalign_sample(const SearchBudget& b, std::size_t index) {
  SplitMix64 rng(substream_seed(b.seed, index));
  MisalignSample s;
  s.target = random_box(rng, b.range_lo, b.range_hi);
  s.p1 = random_box(rng, b.range_lo, b.range_hi);
  s.p2 = random_box(rng, b.range_lo, b.range_hi);
  s.l1_1 = smooth_l1_box(s.target, s.p1);
  s.l1_2 = smooth_l1_box(s.target, s.p2);
  s.s1 = siou(s.target, s.p1);
  s.s2 = siou(s.target, s.p2);
  return s;
}

}  // namespace

std::optional<MisalignWitness> find_misalignment(const SearchBudget& budget,
                                                 unsigned threads) {
  check_budget(budget);
  const auto hit = first_hit_index(budget.max_samples, threads, [&](std::size_t i) {
    const MisalignSample s = misalign_sample(budget, i);
    return (s.l1_1 > s.l1_2 && s.s1 > s.s2) || (s.l1_2 > s.l1_1 && s.s2 > s.s1);
  });
  if (!hit) return std::nullopt;

  const MisalignSample s = misalign_sample(budget, *hit);
  if (s.l1_1 > s.l1_2 && s.s1 > s.s2) {
    return MisalignWitness{s.target, s.p1, s.p2, s.l1_1, s.l1_2, s.s1, s.s2, *hit};
  }
  return MisalignWitness{s.target, s.p2, s.p1, s.l1_2, s.l1_1, s.s2, s.s1, *hit};
}

std::optional<GiouAnomalyWitness> find_giou_anomaly(const SearchBudget& budget,
                                                    unsigned threads) {
  check_budget(budget);
  const auto pair_at = [&](std::size_t i) {
    SplitMix64 rng(substream_seed(budget.seed, i));
    const Box target = random_box(rng, budget.range_lo, budget.range_hi);
    const Box pred = random_box(rng, budget.range_lo, budget.range_hi);
    return std::pair<Box, Box>(target, pred);
  };
  const auto hit = first_hit_index(budget.max_samples, threads, [&](std::size_t i) {
    const auto [target, pred] = pair_at(i);
    return classify_overlap(target, pred) == OverlapClass::Overlapping &&
           giou(target, pred) < 0.0;
  });
  if (!hit) return std::nullopt;

  const auto [target, pred] = pair_at(*hit);
  GiouAnomalyWitness w;
  w.target = target;
  w.pred = pred;
  w.giou_overlapping = giou(target, pred);
  w.eiou_overlapping = eiou(target, pred);
  w.touch_pred = Box{target.x2, target.y1, target.x2 + target.width(), target.y2};
  w.giou_touching = giou(target, w.touch_pred);
  w.sample_index = *hit;
  return w;
}

}  // namespace iou
