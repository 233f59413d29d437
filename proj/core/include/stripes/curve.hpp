#pragma once

// Closed planar curves sampled at uniform arclength, with the differential
// data the rest of the library consumes: tangents, left normals, signed
// curvature, offsets, the tubular-coordinate jacobian, and fast closest-point
// projection.

#include <memory>
#include <vector>

#include "stripes/common.hpp"

namespace stripes {

// Result of projecting a point onto a curve.  `w` is the signed normal
// offset, positive on the side the left normal points to (the inside for a
// counter-clockwise curve); `nu` is the unit direction of increasing w at the
// foot, i.e. (x - foot)/|x - foot| when w != 0.
struct CurveProjection {
  Vec2 foot;
  double s = 0.0;   // arclength of the foot
  double w = 0.0;   // signed offset
  Vec2 nu;          // unit normal at the foot (gradient of w)
  int segment = 0;  // index of the segment containing the foot
};

class ClosedCurve {
 public:
  ClosedCurve();
  ~ClosedCurve();
  ClosedCurve(const ClosedCurve& o);
  ClosedCurve& operator=(const ClosedCurve& o);
  ClosedCurve(ClosedCurve&&) noexcept;
  ClosedCurve& operator=(ClosedCurve&&) noexcept;

  // Number of samples (uniform arclength spacing, closed: vertex n wraps to 0).
  int size() const { return static_cast<int>(pts_.size()); }
  double length() const { return length_; }
  double ds() const { return ds_; }
  const std::vector<Vec2>& vertices() const { return pts_; }
  const Vec2& vertex(int i) const { return pts_[wrap(i)]; }

  // Periodic linear interpolation along the chart.
  Vec2 point(double s) const;

  // Central-difference unit tangent and its left normal at a sample.
  Vec2 tangent(int i) const;
  Vec2 normal(int i) const { return rot90(tangent(i)); }
  Vec2 tangent_at(double s) const;
  Vec2 normal_at(double s) const { return rot90(tangent_at(s)); }

  // Signed curvature from the circumscribed circle of three consecutive
  // samples; positive for a counter-clockwise (left-turning) curve, zero for
  // collinear triples.
  double curvature(int i) const { return kappa_[wrap(i)]; }
  double curvature_at(double s) const;
  double max_abs_curvature() const { return max_abs_kappa_; }

  // Sum of exterior angles; +2*pi for a simple counter-clockwise curve.
  double turning_angle_sum() const;

  double signed_area() const;  // shoelace; positive when counter-clockwise

  // Closest-point projection (accelerated by a bucket grid over segments).
  CurveProjection project(const Vec2& x) const;

  // Jacobian of the normal-coordinate map (s, w) -> point(s) + w*normal(s).
  double jacobian(double s, double w) const { return 1.0 - w * curvature_at(s); }

  void bounding_box(Vec2& lo, Vec2& hi) const;

  friend ClosedCurve build_curve(const std::vector<Vec2>& points, int resample_count,
                                 bool check_simple);
  friend ClosedCurve offset_curve(const ClosedCurve& curve, double t, int resample_count);

 private:
  int wrap(int i) const {
    const int n = size();
    i %= n;
    return i < 0 ? i + n : i;
  }
  void finalize();  // recompute ds, curvature, bbox after pts_ set

  std::vector<Vec2> pts_;
  std::vector<double> kappa_;
  double length_ = 0.0;
  double ds_ = 0.0;
  double max_abs_kappa_ = 0.0;
  Vec2 bbox_lo_, bbox_hi_;

  struct Buckets;
  mutable std::unique_ptr<Buckets> buckets_;  // built lazily for project()
};

// Builds a closed curve through `points` (the closing segment is implicit),
// oriented counter-clockwise, resampled to `resample_count` uniform-arclength
// samples.  Rejects inputs with fewer than 3 distinct points and, when
// `check_simple` is set, self-intersecting loops (the error names the two
// offending segment indices).  Offset and level curves constructed internally
// skip the quadratic simplicity scan; their validity is certified by the
// jacobian precondition instead.
ClosedCurve build_curve(const std::vector<Vec2>& points, int resample_count,
                        bool check_simple = true);

// Normal offset gamma + t*nu resampled onto its own uniform chart (same sample
// count as the input when resample_count <= 0).  Requires |t| * max|kappa| < 1
// so the offset map is injective on the band.
ClosedCurve offset_curve(const ClosedCurve& curve, double t, int resample_count = 0);

// Convenience: counter-clockwise circle sampled with n points.
ClosedCurve make_circle(const Vec2& center, double radius, int n);

// Convenience: counter-clockwise axis-aligned ellipse sampled with n points.
ClosedCurve make_ellipse(const Vec2& center, double rx, double ry, int n);

}  // namespace stripes
