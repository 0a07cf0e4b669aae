// SPDX-License-Identifier: Apache-2.0
//
// Axis-aligned boxes, IOU, 2D points and affine maps. Everything here is a
// pure function of its arguments.

#ifndef IPD_GEOMETRY_H_
#define IPD_GEOMETRY_H_

#include <array>
#include <optional>

namespace ipd {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

double distance(const Point2& a, const Point2& b);

// Box stored as center/size in absolute pixel units. Ground-truth boxes carry
// no confidence; predicted boxes do.
struct BBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
  std::optional<double> confidence;
  int class_id = 0;

  double x_min() const { return cx - 0.5 * w; }
  double x_max() const { return cx + 0.5 * w; }
  double y_min() const { return cy - 0.5 * h; }
  double y_max() const { return cy + 0.5 * h; }
  double area() const { return w * h; }
  double diagonal() const;

  // Builds a box from its corner coordinates.
  static BBox FromCorners(double x0, double y0, double x1, double y1);

  friend bool operator==(const BBox&, const BBox&) = default;
};

// Throws InputError when the box has non-finite fields, non-positive size or
// a confidence outside [0,1].
void validate(const BBox& b);

// Intersection area over union area. Class-agnostic; boxes that only touch
// along an edge have IOU 0.
double iou(const BBox& a, const BBox& b);

Point2 bbox_center(const BBox& b);

// Row-major 2x3 matrix, p -> A p + t.
struct AffineTransform2D {
  double a11 = 1.0;
  double a12 = 0.0;
  double a21 = 0.0;
  double a22 = 1.0;
  double tx = 0.0;
  double ty = 0.0;

  static AffineTransform2D Identity() { return {}; }
  static AffineTransform2D Translation(double tx, double ty) {
    return {1.0, 0.0, 0.0, 1.0, tx, ty};
  }

  double det() const { return a11 * a22 - a12 * a21; }
  bool is_finite() const;

  friend bool operator==(const AffineTransform2D&,
                         const AffineTransform2D&) = default;
};

Point2 apply_affine(const AffineTransform2D& t, const Point2& p);

// Returns the map p -> outer(inner(p)).
AffineTransform2D compose(const AffineTransform2D& outer,
                          const AffineTransform2D& inner);

// Relative determinant below which a source triple is treated as collinear.
inline constexpr double kSingularityThreshold = 1e-9;

// True when the triple spans the plane under the scale-invariant test
// |det| >= kSingularityThreshold * extent^2.
bool is_well_posed_triple(const std::array<Point2, 3>& pts);

// Unique affine map sending src[i] to dst[i]. Throws DegenerateSampleError when
// the source triple is collinear or coincident.
AffineTransform2D fit_affine_3pt(const std::array<Point2, 3>& src,
                                 const std::array<Point2, 3>& dst);

}  // namespace ipd

#endif  // IPD_GEOMETRY_H_
