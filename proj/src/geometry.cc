// SPDX-License-Identifier: Apache-2.0

#include "ipd/geometry.h"

#include <algorithm>
#include <cmath>

#include "ipd/errors.h"

namespace ipd {

double distance(const Point2& a, const Point2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

double BBox::diagonal() const { return std::hypot(w, h); }

BBox BBox::FromCorners(double x0, double y0, double x1, double y1) {
  BBox b;
  b.cx = 0.5 * (x0 + x1);
  b.cy = 0.5 * (y0 + y1);
  b.w = x1 - x0;
  b.h = y1 - y0;
  return b;
}

void validate(const BBox& b) {
  if (!std::isfinite(b.cx) || !std::isfinite(b.cy) || !std::isfinite(b.w) ||
      !std::isfinite(b.h)) {
    throw InputError("bounding box has a non-finite field");
  }
  if (b.w <= 0.0 || b.h <= 0.0) {
    throw InputError("bounding box width and height must be positive");
  }
  if (b.confidence) {
    const double c = *b.confidence;
    if (!std::isfinite(c) || c < 0.0 || c > 1.0) {
      throw InputError("bounding box confidence must lie in [0,1]");
    }
  }
}

double iou(const BBox& a, const BBox& b) {
  validate(a);
  validate(b);
  const double iw =
      std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min());
  if (iw <= 0.0) return 0.0;
  const double ih =
      std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min());
  if (ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

Point2 bbox_center(const BBox& b) {
  validate(b);
  return {b.cx, b.cy};
}

bool AffineTransform2D::is_finite() const {
  return std::isfinite(a11) && std::isfinite(a12) && std::isfinite(a21) &&
         std::isfinite(a22) && std::isfinite(tx) && std::isfinite(ty);
}

Point2 apply_affine(const AffineTransform2D& t, const Point2& p) {
  return {t.a11 * p.x + t.a12 * p.y + t.tx, t.a21 * p.x + t.a22 * p.y + t.ty};
}

AffineTransform2D compose(const AffineTransform2D& outer,
                          const AffineTransform2D& inner) {
  AffineTransform2D r;
  r.a11 = outer.a11 * inner.a11 + outer.a12 * inner.a21;
  r.a12 = outer.a11 * inner.a12 + outer.a12 * inner.a22;
  r.a21 = outer.a21 * inner.a11 + outer.a22 * inner.a21;
  r.a22 = outer.a21 * inner.a12 + outer.a22 * inner.a22;
  r.tx = outer.a11 * inner.tx + outer.a12 * inner.ty + outer.tx;
  r.ty = outer.a21 * inner.tx + outer.a22 * inner.ty + outer.ty;
  return r;
}

namespace {

// Edge vectors from pts[0]; the 3x3 system [x y 1] has this same determinant.
double triple_det(const std::array<Point2, 3>& p) {
  const double ux = p[1].x - p[0].x, uy = p[1].y - p[0].y;
  const double vx = p[2].x - p[0].x, vy = p[2].y - p[0].y;
  return ux * vy - vx * uy;
}

double triple_extent(const std::array<Point2, 3>& p) {
  const auto [xmin, xmax] =
      std::minmax({p[0].x, p[1].x, p[2].x});
  const auto [ymin, ymax] =
      std::minmax({p[0].y, p[1].y, p[2].y});
  return std::max(xmax - xmin, ymax - ymin);
}

}  // namespace

bool is_well_posed_triple(const std::array<Point2, 3>& pts) {
  for (const Point2& p : pts) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
  }
  const double extent = triple_extent(pts);
  if (extent <= 0.0) return false;
  return std::abs(triple_det(pts)) >=
         kSingularityThreshold * extent * extent;
}

AffineTransform2D fit_affine_3pt(const std::array<Point2, 3>& src,
                                 const std::array<Point2, 3>& dst) {
  if (!is_well_posed_triple(src)) {
    throw DegenerateSampleError("source points are collinear or coincident");
  }
  // Solve A [u v] = [u' v'] on edge vectors, then recover t from the centroid
  // so the three residuals are balanced.
  const double ux = src[1].x - src[0].x, uy = src[1].y - src[0].y;
  const double vx = src[2].x - src[0].x, vy = src[2].y - src[0].y;
  const double dux = dst[1].x - dst[0].x, duy = dst[1].y - dst[0].y;
  const double dvx = dst[2].x - dst[0].x, dvy = dst[2].y - dst[0].y;
  const double det = ux * vy - vx * uy;

  AffineTransform2D t;
  t.a11 = (dux * vy - dvx * uy) / det;
  t.a12 = (dvx * ux - dux * vx) / det;
  t.a21 = (duy * vy - dvy * uy) / det;
  t.a22 = (dvy * ux - duy * vx) / det;

  const double scx = (src[0].x + src[1].x + src[2].x) / 3.0;
  const double scy = (src[0].y + src[1].y + src[2].y) / 3.0;
  const double dcx = (dst[0].x + dst[1].x + dst[2].x) / 3.0;
  const double dcy = (dst[0].y + dst[1].y + dst[2].y) / 3.0;
  t.tx = dcx - (t.a11 * scx + t.a12 * scy);
  t.ty = dcy - (t.a21 * scx + t.a22 * scy);
  return t;
}

}  // namespace ipd
