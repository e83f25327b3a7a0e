#include "iou/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "iou/errors.hpp"
#include "iou/rng.hpp"

namespace iou {

namespace {

constexpr double kMonotoneSlack = 1e-12;

// Traced loss; the bare -eiou base is shifted by +1 so both comparison arms
// plot on the same nonnegative axis.
double traced_loss(const Box& target, const Box& pred, const LossSpec& spec) {
  double v = loss_value(target, pred, spec);
  if (!spec.convexified && spec.base == LossBase::NegEiou) v += 1.0;
  return v;
}

Box apply_step(const Box& target, const Box& pred, double rate, const LossSpec& loss) {
  const Grad4 g = grad_loss(target, pred, loss);
  const Box next{pred.x1 - rate * g.dx1, pred.y1 - rate * g.dy1,
                 pred.x2 - rate * g.dx2, pred.y2 - rate * g.dy2};
  if (!(std::isfinite(next.x1) && std::isfinite(next.y1) && std::isfinite(next.x2) &&
        std::isfinite(next.y2)) ||
      !(next.x1 < next.x2 && next.y1 < next.y2)) {
    throw DegenerateStepError("gradient step produced an invalid box");
  }
  return next;
}

double step_l2(const Box& a, const Box& b) {
  const double d1 = a.x1 - b.x1;
  const double d2 = a.y1 - b.y1;
  const double d3 = a.x2 - b.x2;
  const double d4 = a.y2 - b.y2;
  return std::sqrt(d1 * d1 + d2 * d2 + d3 * d3 + d4 * d4);
}

}  // namespace

double Trace::max_eiou() const {
  double m = records.front().eiou;
  for (const TraceRecord& r : records) m = std::max(m, r.eiou);
  return m;
}

double Trace::loss_range_last(std::size_t n) const {
  const std::size_t start = records.size() > n ? records.size() - n : 0;
  double lo = records[start].loss;
  double hi = lo;
  for (std::size_t i = start; i < records.size(); ++i) {
    lo = std::min(lo, records[i].loss);
    hi = std::max(hi, records[i].loss);
  }
  return hi - lo;
}

Box step_plain(const Box& target, const Box& pred, double alpha, const LossSpec& loss) {
  validate(target);
  validate(pred);
  return apply_step(target, pred, alpha, loss);
}

Box step_sot(const Box& target, const Box& pred, double alpha, const LossSpec& loss) {
  validate(target);
  validate(pred);
  const double u_e = extended_geometry(target, pred).u_e;
  return apply_step(target, pred, alpha * u_e, loss);
}

Trace run(const Box& target, const Box& init, const OptimConfig& cfg) {
  validate(target);
  validate(init);
  if (!(cfg.alpha > 0.0)) throw DomainError("learning rate must be > 0");
  if (cfg.max_iters < 1) throw DomainError("max_iters must be >= 1");
  if (!(cfg.loss_tol >= 0.0)) throw DomainError("loss_tol must be >= 0");

  Trace trace;
  Box pred = init;
  Box prev = init;
  for (std::size_t k = 0;; ++k) {
    const ExtendedGeometry g = extended_geometry(target, pred);
    TraceRecord r;
    r.iter = k;
    r.pred = pred;
    r.i_e = g.i_e;
    r.u_e = g.u_e;
    r.eiou = g.i_e / g.u_e;
    r.loss = traced_loss(target, pred, cfg.loss);
    r.grad = grad_loss(target, pred, cfg.loss);
    r.step_norm = k == 0 ? 0.0 : step_l2(pred, prev);
    trace.records.push_back(r);

    if (r.loss <= cfg.loss_tol) {
      trace.status = RunStatus::Converged;
      break;
    }
    if (k == cfg.max_iters) {
      trace.status = RunStatus::MaxIters;
      break;
    }
    prev = pred;
    try {
      const double rate = cfg.mode == StepMode::Sot ? cfg.alpha * g.u_e : cfg.alpha;
      pred = apply_step(target, pred, rate, cfg.loss);
    } catch (const DegenerateStepError&) {
      trace.status = RunStatus::DegenerateStep;
      break;
    }
  }
  return trace;
}

std::size_t monotonicity_violations(const Trace& trace, double slack) {
  std::size_t bad = 0;
  for (std::size_t k = 1; k < trace.records.size(); ++k) {
    if (trace.records[k].loss > trace.records[k - 1].loss + slack) ++bad;
  }
  return bad;
}

SteadyDecreaseReport steady_decrease_check(std::size_t trials, std::uint64_t seed, double alpha,
                              std::size_t max_iters) {
  if (trials == 0) throw EmptySampleError("steady_decrease_check needs at least one trial");
  OptimConfig cfg;
  cfg.alpha = alpha;
  cfg.max_iters = max_iters;
  cfg.loss_tol = 1e-6;
  cfg.mode = StepMode::Sot;

  SteadyDecreaseReport report;
  report.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    SplitMix64 rng(substream_seed(seed, t));
    const Box target = random_box(rng, -2.0, 2.0);
    const Box init = random_box(rng, -2.0, 2.0);
    const Trace trace = run(target, init, cfg);
    const std::size_t bad = monotonicity_violations(trace, kMonotoneSlack);
    if (bad > 0) {
      report.violations += bad;
      if (!report.first_bad_trial) {
        report.first_bad_trial = t;
        report.offending = trace;
      }
    }
  }
  return report;
}

}  // namespace iou
