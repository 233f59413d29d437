#include "stripes/domain.hpp"

#include <cmath>
#include <sstream>

namespace stripes {

TubularDomain TubularDomain::make(ClosedCurve center, double delta) {
  if (delta <= 0.0) throw Error("TubularDomain: delta must be positive");
  const double bound = delta * center.max_abs_curvature();
  if (bound >= 1.0) {
    std::ostringstream os;
    os << "TubularDomain: delta*max|kappa| = " << bound
       << " >= 1; normal coordinates would fold";
    throw Error(os.str());
  }
  TubularDomain d;
  d.center_ = std::move(center);
  d.delta_ = delta;
  return d;
}

void TubularDomain::bounding_box(Vec2& lo, Vec2& hi) const {
  center_.bounding_box(lo, hi);
  lo.x -= delta_;
  lo.y -= delta_;
  hi.x += delta_;
  hi.y += delta_;
}

double DomainDistance::value(const Vec2& x, double tol) const {
  const CurveProjection f = dom_.frame(x);
  const double d = dom_.delta();
  if (std::fabs(f.w) > d + tol) {
    std::ostringstream os;
    os << "DomainDistance: point (" << x.x << ", " << x.y << ") outside the tube "
       << "(|w| = " << std::fabs(f.w) << " > delta = " << d << ")";
    throw Error(os.str());
  }
  const double w = std::clamp(f.w, -d, d);
  return ref_ == ReferenceBoundary::inner ? d - w : d + w;
}

Vec2 DomainDistance::gradient(const Vec2& x, double tol) const {
  const CurveProjection f = dom_.frame(x);
  const double d = dom_.delta();
  if (std::fabs(f.w) > d + tol) {
    std::ostringstream os;
    os << "DomainDistance: point (" << x.x << ", " << x.y << ") outside the tube "
       << "(|w| = " << std::fabs(f.w) << " > delta = " << d << ")";
    throw Error(os.str());
  }
  return ref_ == ReferenceBoundary::inner ? -f.nu : f.nu;
}

ClosedCurve DomainDistance::level_curve(double t, int resample_count) const {
  const double d = dom_.delta();
  if (t < -1e-12 || t > 2.0 * d + 1e-12) {
    std::ostringstream os;
    os << "DomainDistance: level " << t << " outside [0, " << 2.0 * d << "]";
    throw Error(os.str());
  }
  const double w = level_offset(std::clamp(t, 0.0, 2.0 * d));
  return offset_curve(dom_.center(), w, resample_count);
}

}  // namespace stripes
