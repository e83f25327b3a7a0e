#pragma once

#include <array>
#include <string>

#include "iou/box.hpp"

namespace iou {

// Decreasing base function of EIoU from which a loss is built.
enum class LossBase { NegEiou, ReciprocalIou, NegLogIou };

// A localization loss: a base function plus the convexification parameters
// (offset by the base minimum, then raise to a power > 1). convexified=false
// selects the bare base value, kept for the oscillation comparisons.
struct LossSpec {
  LossBase base = LossBase::NegEiou;
  double base_min = -1.0;  // infimum of the base over its valid domain
  double power = 2.0;
  bool convexified = true;
};

// Parses "neg-eiou", "neg-eiou:p=1.5", "neg-eiou:raw",
// "reciprocal-iou:p=2,min=1", "neg-log-iou:p=2". Throws ParseError.
LossSpec parse_loss_spec(const std::string& text);
std::string to_string(const LossSpec& spec);

// (base_value - base_min)^power. Zero exactly at the minimum.
// Throws InvalidPowerError if power <= 1, DomainError if base_value < base_min.
double convexify(double base_value, double base_min, double power);

// (1 - I_e/U_e)^power, the convexified -EIoU loss. Range [0, 2^power).
double smooth_eiou_loss(const Box& target, const Box& pred, double power = 2.0);

// Per-coordinate smooth-l1 with the transition at |d| = 1,
// summed over the four coordinate deltas.
double smooth_l1_loss(const std::array<double, 4>& target_deltas,
                      const std::array<double, 4>& pred_deltas);

// smooth_l1_loss with both delta sets taken in the sqrt-area encoding
// anchored at the target box (target deltas are identically zero).
double smooth_l1_box(const Box& target, const Box& pred);

// Ground-truth IoU score paired with the raw head output it is trained on.
struct IoUScorePair {
  double q_g = 0.0;  // in [0, 1]
  double x = 0.0;    // unbounded logit; squashed by sigmoid
};

// KL divergence between q_g and sigmoid(x), natural log, 0*log(0) := 0.
// Nonnegative; zero iff sigmoid(x) == q_g.
double kl_iou_loss(const IoUScorePair& pair);

// (1 - I_e/U_e): the factor that down-weights well-localized pairs.
double focal_weight(const Box& target, const Box& pred);

// Base function value at a given eiou. ReciprocalIou and NegLogIou are only
// defined for eiou > 0 and throw DomainError otherwise.
double base_value(LossBase base, double eiou_value);

// Full loss of a box pair under spec (convexified or bare base).
double loss_value(const Box& target, const Box& pred, const LossSpec& spec);

}  // namespace iou
