#pragma once

#include <cstdint>
#include <functional>

#include "iou/box.hpp"
#include "iou/losses.hpp"

namespace iou {

// Partial derivatives with respect to the predicted box's four coordinates.
struct Grad4 {
  double dx1 = 0.0;
  double dy1 = 0.0;
  double dx2 = 0.0;
  double dy2 = 0.0;

  bool operator==(const Grad4& other) const = default;
};

// Piecewise-analytic gradient of the extended intersection I_e. Branch
// selection uses non-strict inequalities; on a boundary the first matching
// branch is taken.
Grad4 grad_ie(const Box& target, const Box& pred);

// Gradient of the extended union U_e: signed pred side length minus the
// matching grad_ie component.
Grad4 grad_ue(const Box& target, const Box& pred);

// Gradient of I_e/U_e via the quotient rule.
Grad4 grad_eiou(const Box& target, const Box& pred);

// Gradient of (1 - I_e/U_e)^2: per component
// 2*(1 - I_e/U_e) * (I_e*dU_e - dI_e*U_e) / U_e^2.
Grad4 grad_smooth_eiou(const Box& target, const Box& pred);

// Gradient of an arbitrary LossSpec (chain rule through the base and the
// convexification power).
Grad4 grad_loss(const Box& target, const Box& pred, const LossSpec& spec);

// Central finite differences (f(z+h) - f(z-h)) / 2h per predicted coordinate.
using BoxFn = std::function<double(const Box&)>;
Grad4 finite_diff_grad(const BoxFn& f, const Box& pred, double h);

struct GradcheckReport {
  std::size_t samples = 0;
  double max_rel_err = 0.0;
  double mean_rel_err = 0.0;
  bool pass = false;
};

// Compares the analytic gradients of I_e, U_e and the smooth loss against
// central finite differences on seeded random pairs. Points closer than
// 10 * h to any branch boundary are redrawn (the derivative genuinely jumps
// there). Per-coordinate step h = 1e-6 * max(1, |coordinate|); relative error
// is |analytic - fd| / max(1, |analytic|, |fd|). Each sample derives its own
// substream from (seed, index), so the result is identical for any thread
// count. Throws EmptySampleError when n_samples == 0.
GradcheckReport gradcheck_report(std::size_t n_samples, std::uint64_t seed, double tol,
                                 unsigned threads = 1);

// Same sampling, but checks one caller-supplied value/gradient pair. The
// default report is built from this; tests also use it to prove the harness
// flags a corrupted gradient.
using PairFn = std::function<double(const Box&, const Box&)>;
using PairGradFn = std::function<Grad4(const Box&, const Box&)>;
GradcheckReport gradcheck_function(std::size_t n_samples, std::uint64_t seed, double tol,
                                   const PairFn& value, const PairGradFn& analytic);

}  // namespace iou
