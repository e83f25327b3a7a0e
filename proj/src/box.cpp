#include "iou/box.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "iou/errors.hpp"

namespace iou {

namespace {

std::string coords_of(const Box& b) {
  return "(" + std::to_string(b.x1) + ", " + std::to_string(b.y1) + ", " +
         std::to_string(b.x2) + ", " + std::to_string(b.y2) + ")";
}

}  // namespace

Box validate(const Box& b) {
  if (!(std::isfinite(b.x1) && std::isfinite(b.y1) && std::isfinite(b.x2) &&
        std::isfinite(b.y2))) {
    throw NonFiniteError("box has a non-finite coordinate " + coords_of(b));
  }
  if (!(b.x1 < b.x2 && b.y1 < b.y2)) {
    throw DegenerateBoxError("box has non-positive width or height " + coords_of(b));
  }
  return b;
}

Box make_box(double x1, double y1, double x2, double y2) {
  return validate(Box{x1, y1, x2, y2});
}

const char* to_string(OverlapClass c) {
  switch (c) {
    case OverlapClass::Overlapping: return "overlapping";
    case OverlapClass::Touching: return "touching";
    case OverlapClass::DisjointX: return "disjoint-x";
    case OverlapClass::DisjointY: return "disjoint-y";
    case OverlapClass::DisjointBoth: return "disjoint-both";
  }
  return "?";
}

ExtendedGeometry extended_geometry(const Box& target, const Box& pred) {
  ExtendedGeometry g{};
  g.x1 = std::max(target.x1, pred.x1);
  g.y1 = std::max(target.y1, pred.y1);
  g.x2 = std::min(target.x2, pred.x2);
  g.y2 = std::min(target.y2, pred.y2);
  g.x0 = std::min(target.x1, pred.x1);
  g.y0 = std::min(target.y1, pred.y1);
  g.x_min = std::min(g.x1, g.x2);
  g.y_min = std::min(g.y1, g.y2);
  g.x_max = std::max(g.x1, g.x2);
  g.y_max = std::max(g.y1, g.y2);

  g.i_std = std::max(0.0, g.x2 - g.x1) * std::max(0.0, g.y2 - g.y1);

  // Signed extended intersection: S1 + S2 - S3 - S4, all four rectangles
  // anchored at (x0, y0). Reduces to i_std when the extents overlap on both axes.
  const double s1 = (g.x2 - g.x0) * (g.y2 - g.y0);
  const double s2 = (g.x_min - g.x0) * (g.y_min - g.y0);
  const double s3 = (g.x1 - g.x0) * (g.y_max - g.y0);
  const double s4 = (g.x_max - g.x0) * (g.y1 - g.y0);
  g.i_e = s1 + s2 - s3 - s4;

  g.s_t = target.area();
  g.s_p = pred.area();
  g.u_std = g.s_t + g.s_p - g.i_std;
  g.u_e = g.s_t + g.s_p - g.i_e;
  return g;
}

double siou(const Box& target, const Box& pred) {
  const ExtendedGeometry g = extended_geometry(target, pred);
  return g.i_std / g.u_std;
}

double eiou(const Box& target, const Box& pred) {
  const ExtendedGeometry g = extended_geometry(target, pred);
  return g.i_e / g.u_e;
}

double giou(const Box& target, const Box& pred) {
  const ExtendedGeometry g = extended_geometry(target, pred);
  const double cw = std::max(target.x2, pred.x2) - std::min(target.x1, pred.x1);
  const double ch = std::max(target.y2, pred.y2) - std::min(target.y1, pred.y1);
  const double c_area = cw * ch;
  return g.i_std / g.u_std - (c_area - g.u_std) / c_area;
}

OverlapClass classify_overlap(const Box& target, const Box& pred) {
  const ExtendedGeometry g = extended_geometry(target, pred);
  const bool dx = g.x1 > g.x2;
  const bool dy = g.y1 > g.y2;
  if (dx && dy) return OverlapClass::DisjointBoth;
  if (dx) return OverlapClass::DisjointX;
  if (dy) return OverlapClass::DisjointY;
  if (g.x1 == g.x2 || g.y1 == g.y2) return OverlapClass::Touching;
  return OverlapClass::Overlapping;
}

AnchorEncoding encode(const Box& box, const Box& anchor) {
  validate(box);
  validate(anchor);
  AnchorEncoding enc;
  enc.scale = std::sqrt(anchor.area());
  const double s = enc.scale;
  enc.normalized_anchor = Box{anchor.x1 / s, anchor.y1 / s, anchor.x2 / s, anchor.y2 / s};
  enc.deltas = {box.x1 / s - enc.normalized_anchor.x1,
                box.y1 / s - enc.normalized_anchor.y1,
                box.x2 / s - enc.normalized_anchor.x2,
                box.y2 / s - enc.normalized_anchor.y2};
  return enc;
}

Box decode(const AnchorEncoding& enc, const Box& anchor) {
  validate(anchor);
  const double s = std::sqrt(anchor.area());
  const Box normalized{anchor.x1 / s + enc.deltas[0], anchor.y1 / s + enc.deltas[1],
                       anchor.x2 / s + enc.deltas[2], anchor.y2 / s + enc.deltas[3]};
  return validate(Box{normalized.x1 * s, normalized.y1 * s, normalized.x2 * s,
                      normalized.y2 * s});
}

}  // namespace iou
