#pragma once

#include <array>

namespace iou {

// Axis-aligned rectangle with top-left corner (x1, y1) and bottom-right
// corner (x2, y2). Coordinates are unconstrained reals; a valid box has
// strictly positive width and height.
struct Box {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }

  bool operator==(const Box& other) const = default;
};

// Returns b unchanged if it is a valid box.
// Throws DegenerateBoxError when width or height <= 0,
// NonFiniteError when any coordinate is NaN or infinite.
Box validate(const Box& b);

// validate shorthand for literal coordinates.
Box make_box(double x1, double y1, double x2, double y2);

// Relative position of a box pair, following the four-case split of the
// extended intersection (Touching = overlapping extents with zero area).
enum class OverlapClass { Overlapping, Touching, DisjointX, DisjointY, DisjointBoth };

const char* to_string(OverlapClass c);

// Derived quantities for a (target, pred) pair. x1..y2 are the max/min
// corner combinations, x0/y0 the minima of the two top-left corners,
// x_min..y_max the sorted combinations. i_e is the signed extended
// intersection computed via the S1 + S2 - S3 - S4 expansion.
struct ExtendedGeometry {
  double x1, y1, x2, y2;
  double x0, y0;
  double x_min, y_min, x_max, y_max;
  double i_std;  // clamped standard intersection area, 0 when disjoint
  double i_e;    // signed extended intersection
  double s_t, s_p;
  double u_std, u_e;  // u_e = s_t + s_p - i_e, always > 0
};

ExtendedGeometry extended_geometry(const Box& target, const Box& pred);

// Standard IoU in [0, 1]; 0 for any non-overlapping pair.
double siou(const Box& target, const Box& pred);

// Extended IoU in (-1, 1]: equals siou when the boxes overlap, 0 when they
// touch, strictly negative and distance-sensitive when they are disjoint.
double eiou(const Box& target, const Box& pred);

// Generalized IoU: siou minus the enclosing-box deficit, in (-1, 1].
double giou(const Box& target, const Box& pred);

OverlapClass classify_overlap(const Box& target, const Box& pred);

// Normalization of box coordinates by the square root of the anchor area,
// so encoded offsets are invariant to the anchor scale.
struct AnchorEncoding {
  double scale = 1.0;  // sqrt of the anchor area
  Box normalized_anchor;
  std::array<double, 4> deltas{};  // normalized box minus normalized anchor
};

AnchorEncoding encode(const Box& box, const Box& anchor);
Box decode(const AnchorEncoding& enc, const Box& anchor);

}  // namespace iou
