#pragma once

// Tubular neighbourhoods of a closed curve and the in-domain boundary
// distance whose level sets provide the stripe skeleton.

#include "stripes/common.hpp"
#include "stripes/curve.hpp"

namespace stripes {

// Closed tube of half-width delta around a counter-clockwise center curve.
// Valid only while delta * max|kappa| < 1 (normal coordinates stay injective).
class TubularDomain {
 public:
  static TubularDomain make(ClosedCurve center, double delta);

  const ClosedCurve& center() const { return center_; }
  double delta() const { return delta_; }

  // Exact: the curvature term integrates to zero across the symmetric width.
  double area() const { return 2.0 * delta_ * center_.length(); }

  // Normal-coordinate frame of x: foot on the center curve, arclength s,
  // signed offset w (positive on the left-normal side), unit direction nu of
  // increasing w.
  CurveProjection frame(const Vec2& x) const { return center_.project(x); }

  bool contains(const Vec2& x) const {
    return std::fabs(frame(x).w) < delta_;
  }

  void bounding_box(Vec2& lo, Vec2& hi) const;

 private:
  ClosedCurve center_;
  double delta_ = 0.0;
};

// Which of the two tube boundaries the distance is measured from.
enum class ReferenceBoundary { inner, outer };

// phi(x): distance to the reference boundary measured inside the tube,
// ranging over [0, 2*delta].  With the inner reference (the boundary on the
// left-normal side of the center curve) phi = delta - w, so its gradient is
// the unit normal field pointing across the tube toward the outer boundary.
class DomainDistance {
 public:
  DomainDistance(TubularDomain dom, ReferenceBoundary ref = ReferenceBoundary::inner)
      : dom_(std::move(dom)), ref_(ref) {}

  const TubularDomain& domain() const { return dom_; }
  ReferenceBoundary reference() const { return ref_; }
  double max_value() const { return 2.0 * dom_.delta(); }

  // Throws when x lies outside the closed tube (tolerance `tol` in w).
  double value(const Vec2& x, double tol = 1e-9) const;

  // Unit gradient of phi at x (the transversal direction of the stripes).
  Vec2 gradient(const Vec2& x, double tol = 1e-9) const;

  // The level set {phi = t} as a closed curve on its own arclength chart.
  // Requires 0 <= t <= 2*delta and a valid offset (automatic here since the
  // tube satisfies delta*max|kappa| < 1).
  ClosedCurve level_curve(double t, int resample_count = 0) const;

  // Signed center-curve offset w corresponding to the level value t.
  double level_offset(double t) const {
    return ref_ == ReferenceBoundary::inner ? dom_.delta() - t : t - dom_.delta();
  }

  // phi value of a point with center-frame offset w.
  double value_from_offset(double w) const {
    return ref_ == ReferenceBoundary::inner ? dom_.delta() - w : dom_.delta() + w;
  }

 private:
  TubularDomain dom_;
  ReferenceBoundary ref_;
};

}  // namespace stripes
