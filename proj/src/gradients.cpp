#include "iou/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "iou/errors.hpp"
#include "iou/rng.hpp"

namespace iou {

Grad4 grad_ie(const Box& target, const Box& pred) {
  const ExtendedGeometry g = extended_geometry(target, pred);
  Grad4 d;

  // d/dx1p. For x1p >= x1t the moving corner is x1 (two branches by the
  // x-extent relation). For x1p < x1t it is x0; the chain term through x0
  // cancels when the extents overlap in y and equals 2*(y1 - y2) otherwise.
  if (pred.x1 >= target.x1) {
    d.dx1 = g.x1 <= g.x2 ? g.y_min - g.y_max : 2.0 * g.y0 - g.y_max - g.y1;
  } else {
    d.dx1 = g.y1 > g.y2 ? 2.0 * (g.y1 - g.y2) : 0.0;
  }

  if (pred.y1 >= target.y1) {
    d.dy1 = g.y1 <= g.y2 ? g.x_min - g.x_max : 2.0 * g.x0 - g.x_max - g.x1;
  } else {
    d.dy1 = g.x1 > g.x2 ? 2.0 * (g.x1 - g.x2) : 0.0;
  }

  // d/dx2p and d/dy2p only act through x2/y2; nothing depends on them when
  // the target side of the min is active.
  if (pred.x2 <= target.x2) {
    d.dx2 = g.x1 <= g.x2 ? g.y2 - g.y1 : g.y2 + g.y_min - 2.0 * g.y0;
  } else {
    d.dx2 = 0.0;
  }

  if (pred.y2 <= target.y2) {
    d.dy2 = g.y1 <= g.y2 ? g.x2 - g.x1 : g.x2 + g.x_min - 2.0 * g.x0;
  } else {
    d.dy2 = 0.0;
  }
  return d;
}

Grad4 grad_ue(const Box& target, const Box& pred) {
  const Grad4 di = grad_ie(target, pred);
  return Grad4{(pred.y1 - pred.y2) - di.dx1, (pred.x1 - pred.x2) - di.dy1,
               (pred.y2 - pred.y1) - di.dx2, (pred.x2 - pred.x1) - di.dy2};
}

namespace {

// (I_e * dU_e - dI_e * U_e) / U_e^2 is -d(eiou); shared by every loss gradient.
Grad4 quotient_grad(const ExtendedGeometry& g, const Grad4& di, const Grad4& du) {
  const double inv_u2 = 1.0 / (g.u_e * g.u_e);
  return Grad4{(di.dx1 * g.u_e - g.i_e * du.dx1) * inv_u2,
               (di.dy1 * g.u_e - g.i_e * du.dy1) * inv_u2,
               (di.dx2 * g.u_e - g.i_e * du.dx2) * inv_u2,
               (di.dy2 * g.u_e - g.i_e * du.dy2) * inv_u2};
}

Grad4 scale(const Grad4& g, double s) {
  return Grad4{s * g.dx1, s * g.dy1, s * g.dx2, s * g.dy2};
}

}  // namespace

Grad4 grad_eiou(const Box& target, const Box& pred) {
  const ExtendedGeometry g = extended_geometry(target, pred);
  return quotient_grad(g, grad_ie(target, pred), grad_ue(target, pred));
}

Grad4 grad_smooth_eiou(const Box& target, const Box& pred) {
  const ExtendedGeometry g = extended_geometry(target, pred);
  const double prefactor = 2.0 * (1.0 - g.i_e / g.u_e);
  return scale(quotient_grad(g, grad_ie(target, pred), grad_ue(target, pred)),
               -prefactor);
}

Grad4 grad_loss(const Box& target, const Box& pred, const LossSpec& spec) {
  const ExtendedGeometry g = extended_geometry(target, pred);
  const double e = g.i_e / g.u_e;
  const Grad4 de = grad_eiou(target, pred);

  double db_de = 0.0;  // derivative of the base w.r.t. eiou
  switch (spec.base) {
    case LossBase::NegEiou:
      db_de = -1.0;
      break;
    case LossBase::ReciprocalIou:
      if (!(e > 0.0)) throw DomainError("reciprocal-iou base requires eiou > 0");
      db_de = -1.0 / (e * e);
      break;
    case LossBase::NegLogIou:
      if (!(e > 0.0)) throw DomainError("neg-log-iou base requires eiou > 0");
      db_de = -1.0 / e;
      break;
  }

  if (!spec.convexified) return scale(de, db_de);

  const double b = base_value(spec.base, e);
  const double offset = b - spec.base_min;
  if (offset < 0.0) throw DomainError("base value below its stated minimum");
  const double outer = spec.power == 2.0
                           ? 2.0 * offset
                           : spec.power * std::pow(offset, spec.power - 1.0);
  return scale(de, outer * db_de);
}

Grad4 finite_diff_grad(const BoxFn& f, const Box& pred, double h) {
  if (!(h > 0.0)) throw DomainError("finite difference step must be positive");
  Grad4 d;
  double* out[4] = {&d.dx1, &d.dy1, &d.dx2, &d.dy2};
  for (int i = 0; i < 4; ++i) {
    Box hi = pred;
    Box lo = pred;
    double* hz = i == 0 ? &hi.x1 : i == 1 ? &hi.y1 : i == 2 ? &hi.x2 : &hi.y2;
    double* lz = i == 0 ? &lo.x1 : i == 1 ? &lo.y1 : i == 2 ? &lo.x2 : &lo.y2;
    *hz += h;
    *lz -= h;
    *out[i] = (f(hi) - f(lo)) / (2.0 * h);
  }
  return d;
}

namespace {

constexpr double kFdStep = 1e-6;          // scaled by coordinate magnitude
constexpr double kBoundaryFactor = 10.0;  // exclusion distance in units of h

double coord_step(double z) { return kFdStep * std::max(1.0, std::fabs(z)); }

double max_step(const Box& pred) {
  return std::max(std::max(coord_step(pred.x1), coord_step(pred.y1)),
                  std::max(coord_step(pred.x2), coord_step(pred.y2)));
}

// Distance from the pair to the nearest branch boundary of the piecewise
// gradient: any tie in the min/max corner combinations.
double boundary_margin(const Box& target, const Box& pred) {
  const ExtendedGeometry g = extended_geometry(target, pred);
  double m = std::fabs(pred.x1 - target.x1);
  m = std::min(m, std::fabs(pred.y1 - target.y1));
  m = std::min(m, std::fabs(pred.x2 - target.x2));
  m = std::min(m, std::fabs(pred.y2 - target.y2));
  m = std::min(m, std::fabs(g.x1 - g.x2));
  m = std::min(m, std::fabs(g.y1 - g.y2));
  return m;
}

double rel_err(double analytic, double fd) {
  return std::fabs(analytic - fd) / std::max({1.0, std::fabs(analytic), std::fabs(fd)});
}

struct SamplePair {
  Box target;
  Box pred;
};

SamplePair sample_pair(std::uint64_t seed, std::size_t index) {
  SplitMix64 rng(substream_seed(seed, index));
  for (;;) {
    const Box target = random_box(rng, -2.0, 2.0);
    const Box pred = random_box(rng, -2.0, 2.0);
    if (boundary_margin(target, pred) >= kBoundaryFactor * max_step(pred)) {
      return SamplePair{target, pred};
    }
  }
}

double check_components(const SamplePair& s, const PairFn& value,
                        const PairGradFn& analytic) {
  const Grad4 a = analytic(s.target, s.pred);
  double worst = 0.0;
  // Central differences per coordinate, each with its own step size.
  const Box& p = s.pred;
  const double hs[4] = {coord_step(p.x1), coord_step(p.y1), coord_step(p.x2),
                        coord_step(p.y2)};
  const double an[4] = {a.dx1, a.dy1, a.dx2, a.dy2};
  for (int i = 0; i < 4; ++i) {
    Box hi = p;
    Box lo = p;
    double* hz = i == 0 ? &hi.x1 : i == 1 ? &hi.y1 : i == 2 ? &hi.x2 : &hi.y2;
    double* lz = i == 0 ? &lo.x1 : i == 1 ? &lo.y1 : i == 2 ? &lo.x2 : &lo.y2;
    *hz += hs[i];
    *lz -= hs[i];
    const double f = (value(s.target, hi) - value(s.target, lo)) / (2.0 * hs[i]);
    worst = std::max(worst, rel_err(an[i], f));
  }
  return worst;
}

}  // namespace

GradcheckReport gradcheck_function(std::size_t n_samples, std::uint64_t seed, double tol,
                                   const PairFn& value, const PairGradFn& analytic) {
  if (n_samples == 0) throw EmptySampleError("gradcheck needs at least one sample");
  GradcheckReport report;
  report.samples = n_samples;
  double sum = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const SamplePair s = sample_pair(seed, i);
    const double err = check_components(s, value, analytic);
    sum += err;
    report.max_rel_err = std::max(report.max_rel_err, err);
  }
  report.mean_rel_err = sum / static_cast<double>(n_samples);
  report.pass = report.max_rel_err < tol;
  return report;
}

GradcheckReport gradcheck_report(std::size_t n_samples, std::uint64_t seed, double tol,
                                 unsigned threads) {
  if (n_samples == 0) throw EmptySampleError("gradcheck needs at least one sample");

  const auto sample_err = [seed](std::size_t i) {
    const SamplePair s = sample_pair(seed, i);
    double err = check_components(
        s, [](const Box& t, const Box& p) { return extended_geometry(t, p).i_e; },
        [](const Box& t, const Box& p) { return grad_ie(t, p); });
    err = std::max(err, check_components(
        s, [](const Box& t, const Box& p) { return extended_geometry(t, p).u_e; },
        [](const Box& t, const Box& p) { return grad_ue(t, p); }));
    err = std::max(err, check_components(
        s, [](const Box& t, const Box& p) { return smooth_eiou_loss(t, p); },
        [](const Box& t, const Box& p) { return grad_smooth_eiou(t, p); }));
    return err;
  };

  // Per-sample errors land in an index-addressed array and are reduced
  // sequentially, so max and mean do not depend on the thread count.
  std::vector<double> errs(n_samples, 0.0);
  if (threads <= 1 || n_samples < 2) {
    for (std::size_t i = 0; i < n_samples; ++i) errs[i] = sample_err(i);
  } else {
    const unsigned n_workers =
        static_cast<unsigned>(std::min<std::size_t>(threads, n_samples));
    std::vector<std::thread> workers;
    workers.reserve(n_workers);
    for (unsigned w = 0; w < n_workers; ++w) {
      workers.emplace_back([&, w] {
        for (std::size_t i = w; i < n_samples; i += n_workers) errs[i] = sample_err(i);
      });
    }
    for (std::thread& t : workers) t.join();
  }

  GradcheckReport report;
  report.samples = n_samples;
  double sum = 0.0;
  for (const double e : errs) {
    sum += e;
    report.max_rel_err = std::max(report.max_rel_err, e);
  }
  report.mean_rel_err = sum / static_cast<double>(n_samples);
  report.pass = report.max_rel_err < tol;
  return report;
}

}  // namespace iou
