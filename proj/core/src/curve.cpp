#include "stripes/curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace stripes {

namespace {

// Squared distance from x to segment [a, b]; t_out receives the clamped
// parameter of the foot.
double point_segment_dist2(const Vec2& x, const Vec2& a, const Vec2& b, double& t_out) {
  const Vec2 d = b - a;
  const double len2 = d.norm2();
  double t = len2 > 0.0 ? dot(x - a, d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  t_out = t;
  const Vec2 foot = a + d * t;
  return (x - foot).norm2();
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0))) return true;
  return false;  // touching endpoints of adjacent segments are skipped by the caller
}

}  // namespace

// Uniform bucket grid over curve segments for closest-point queries.
struct ClosedCurve::Buckets {
  double x0 = 0.0, y0 = 0.0, cell = 1.0;
  int nx = 0, ny = 0;
  std::vector<std::vector<std::int32_t>> bins;

  int clampi(int v, int hi) const { return std::clamp(v, 0, hi - 1); }

  void build(const std::vector<Vec2>& pts, const Vec2& lo, const Vec2& hi, double ds) {
    // Cell size balances ring-walk length against segments per bin: queries a
    // sizable fraction of the bounding box away (tube coordinates reach delta)
    // must not crawl through thousands of empty bins.
    const double diag = std::hypot(hi.x - lo.x, hi.y - lo.y);
    cell = std::max({ds * 2.0, diag / 64.0, 1e-12});
    const double pad = cell;
    x0 = lo.x - pad;
    y0 = lo.y - pad;
    nx = std::max(1, static_cast<int>(std::ceil((hi.x - lo.x + 2 * pad) / cell)));
    ny = std::max(1, static_cast<int>(std::ceil((hi.y - lo.y + 2 * pad) / cell)));
    bins.assign(static_cast<std::size_t>(nx) * ny, {});
    const int n = static_cast<int>(pts.size());
    for (int i = 0; i < n; ++i) {
      const Vec2& a = pts[i];
      const Vec2& b = pts[(i + 1) % n];
      const int ix0 = clampi(static_cast<int>(std::floor((std::min(a.x, b.x) - x0) / cell)), nx);
      const int ix1 = clampi(static_cast<int>(std::floor((std::max(a.x, b.x) - x0) / cell)), nx);
      const int iy0 = clampi(static_cast<int>(std::floor((std::min(a.y, b.y) - y0) / cell)), ny);
      const int iy1 = clampi(static_cast<int>(std::floor((std::max(a.y, b.y) - y0) / cell)), ny);
      for (int iy = iy0; iy <= iy1; ++iy)
        for (int ix = ix0; ix <= ix1; ++ix)
          bins[static_cast<std::size_t>(iy) * nx + ix].push_back(i);
    }
  }
};

ClosedCurve::ClosedCurve() = default;
ClosedCurve::~ClosedCurve() = default;
ClosedCurve::ClosedCurve(ClosedCurve&&) noexcept = default;
ClosedCurve& ClosedCurve::operator=(ClosedCurve&&) noexcept = default;

ClosedCurve::ClosedCurve(const ClosedCurve& o)
    : pts_(o.pts_),
      kappa_(o.kappa_),
      length_(o.length_),
      ds_(o.ds_),
      max_abs_kappa_(o.max_abs_kappa_),
      bbox_lo_(o.bbox_lo_),
      bbox_hi_(o.bbox_hi_) {}

ClosedCurve& ClosedCurve::operator=(const ClosedCurve& o) {
  if (this != &o) {
    pts_ = o.pts_;
    kappa_ = o.kappa_;
    length_ = o.length_;
    ds_ = o.ds_;
    max_abs_kappa_ = o.max_abs_kappa_;
    bbox_lo_ = o.bbox_lo_;
    bbox_hi_ = o.bbox_hi_;
    buckets_.reset();
  }
  return *this;
}

void ClosedCurve::finalize() {
  const int n = size();
  if (n < 3) throw Error("ClosedCurve: fewer than 3 samples after resampling");
  length_ = 0.0;
  bbox_lo_ = bbox_hi_ = pts_[0];
  for (int i = 0; i < n; ++i) {
    length_ += (pts_[(i + 1) % n] - pts_[i]).norm();
    bbox_lo_.x = std::min(bbox_lo_.x, pts_[i].x);
    bbox_lo_.y = std::min(bbox_lo_.y, pts_[i].y);
    bbox_hi_.x = std::max(bbox_hi_.x, pts_[i].x);
    bbox_hi_.y = std::max(bbox_hi_.y, pts_[i].y);
  }
  ds_ = length_ / n;

  kappa_.assign(n, 0.0);
  max_abs_kappa_ = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec2& p = pts_[(i + n - 1) % n];
    const Vec2& q = pts_[i];
    const Vec2& r = pts_[(i + 1) % n];
    const double a = (q - p).norm();
    const double b = (r - q).norm();
    const double c = (r - p).norm();
    const double cr = cross(q - p, r - q);
    // Collinear triples have zero curvature by convention; the relative
    // threshold keeps resampled straight runs exactly flat.
    double k = 0.0;
    if (std::fabs(cr) > 1e-13 * a * b && a > 0 && b > 0 && c > 0) {
      k = 2.0 * cr / (a * b * c);
    }
    kappa_[i] = k;
    max_abs_kappa_ = std::max(max_abs_kappa_, std::fabs(k));
  }
  buckets_.reset();
}

Vec2 ClosedCurve::point(double s) const {
  const int n = size();
  double u = std::fmod(s, length_);
  if (u < 0) u += length_;
  const double fi = u / ds_;
  int i = static_cast<int>(std::floor(fi));
  if (i >= n) i = n - 1;
  const double t = fi - i;
  return pts_[i] + (pts_[(i + 1) % n] - pts_[i]) * t;
}

Vec2 ClosedCurve::tangent(int i) const {
  const int n = size();
  const Vec2 d = pts_[(i + 1) % n] - pts_[(i + n - 1) % n];
  return normalized(d);
}

Vec2 ClosedCurve::tangent_at(double s) const {
  const int n = size();
  double u = std::fmod(s, length_);
  if (u < 0) u += length_;
  const double fi = u / ds_;
  int i = static_cast<int>(std::floor(fi));
  if (i >= n) i = n - 1;
  const double t = fi - i;
  const Vec2 t0 = tangent(i);
  const Vec2 t1 = tangent((i + 1) % n);
  return normalized(t0 * (1.0 - t) + t1 * t);
}

double ClosedCurve::curvature_at(double s) const {
  const int n = size();
  double u = std::fmod(s, length_);
  if (u < 0) u += length_;
  const double fi = u / ds_;
  int i = static_cast<int>(std::floor(fi));
  if (i >= n) i = n - 1;
  const double t = fi - i;
  return kappa_[i] * (1.0 - t) + kappa_[(i + 1) % n] * t;
}

double ClosedCurve::turning_angle_sum() const {
  const int n = size();
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec2 e0 = pts_[(i + 1) % n] - pts_[i];
    const Vec2 e1 = pts_[(i + 2) % n] - pts_[(i + 1) % n];
    sum += std::atan2(cross(e0, e1), dot(e0, e1));
  }
  return sum;
}

double ClosedCurve::signed_area() const {
  const int n = size();
  double a = 0.0;
  for (int i = 0; i < n; ++i) a += cross(pts_[i], pts_[(i + 1) % n]);
  return 0.5 * a;
}

void ClosedCurve::bounding_box(Vec2& lo, Vec2& hi) const {
  lo = bbox_lo_;
  hi = bbox_hi_;
}

CurveProjection ClosedCurve::project(const Vec2& x) const {
  const int n = size();
  if (!buckets_) {
    buckets_ = std::make_unique<Buckets>();
    buckets_->build(pts_, bbox_lo_, bbox_hi_, ds_);
  }
  const Buckets& bk = *buckets_;

  // Expanding ring search over the bucket grid.
  const int cx = bk.clampi(static_cast<int>(std::floor((x.x - bk.x0) / bk.cell)), bk.nx);
  const int cy = bk.clampi(static_cast<int>(std::floor((x.y - bk.y0) / bk.cell)), bk.ny);
  double best = std::numeric_limits<double>::infinity();
  int best_seg = -1;
  double best_t = 0.0;
  const int max_ring = std::max(bk.nx, bk.ny);
  for (int ring = 0; ring <= max_ring; ++ring) {
    // Cells farther than the current best cannot improve the result.  Ring
    // cells lie outside the previous rings' square; the distance from x to
    // that square's boundary bounds their distance from below.
    if (best_seg >= 0 && ring > 0) {
      const double in_lo_x = bk.x0 + (cx - ring + 1) * bk.cell;
      const double in_hi_x = bk.x0 + (cx + ring) * bk.cell;
      const double in_lo_y = bk.y0 + (cy - ring + 1) * bk.cell;
      const double in_hi_y = bk.y0 + (cy + ring) * bk.cell;
      const double reach = std::min(std::min(x.x - in_lo_x, in_hi_x - x.x),
                                    std::min(x.y - in_lo_y, in_hi_y - x.y));
      if (reach > 0 && reach * reach > best) break;
    }
    bool any_cell = false;
    for (int iy = cy - ring; iy <= cy + ring; ++iy) {
      if (iy < 0 || iy >= bk.ny) continue;
      for (int ix = cx - ring; ix <= cx + ring; ++ix) {
        if (ix < 0 || ix >= bk.nx) continue;
        if (std::max(std::abs(ix - cx), std::abs(iy - cy)) != ring) continue;
        any_cell = true;
        for (const int seg : bk.bins[static_cast<std::size_t>(iy) * bk.nx + ix]) {
          double t;
          const double d2 =
              point_segment_dist2(x, pts_[seg], pts_[(seg + 1) % n], t);
          if (d2 < best || (d2 == best && seg < best_seg)) {
            best = d2;
            best_seg = seg;
            best_t = t;
          }
        }
      }
    }
    if (!any_cell && best_seg >= 0) break;
  }
  if (best_seg < 0) throw Error("ClosedCurve::project: empty curve");

  const Vec2 a = pts_[best_seg];
  const Vec2 b = pts_[(best_seg + 1) % n];
  CurveProjection pr;
  pr.segment = best_seg;
  pr.foot = a + (b - a) * best_t;
  pr.s = (best_seg + best_t) * ds_;
  const double dist = std::sqrt(best);

  // Signed side: left of the segment is positive.  At a shared vertex the
  // segment choice may be ambiguous for concave corners; the bisector of the
  // adjacent edges resolves the sign there.
  Vec2 tau;
  if (best_t <= 1e-12 || best_t >= 1.0 - 1e-12) {
    const int vi = best_t >= 1.0 - 1e-12 ? (best_seg + 1) % n : best_seg;
    const Vec2 e0 = pts_[vi] - pts_[(vi + n - 1) % n];
    const Vec2 e1 = pts_[(vi + 1) % n] - pts_[vi];
    tau = normalized(normalized(e0) + normalized(e1));
  } else {
    tau = normalized(b - a);
  }
  const double side = cross(tau, x - pr.foot) >= 0.0 ? 1.0 : -1.0;
  pr.w = side * dist;
  pr.nu = dist > 1e-14 ? (x - pr.foot) * (side / dist) : rot90(tau);
  return pr;
}

ClosedCurve build_curve(const std::vector<Vec2>& points, int resample_count,
                        bool check_simple) {
  // Distinct input vertices (consecutive duplicates collapsed, closing
  // duplicate dropped).
  std::vector<Vec2> in;
  in.reserve(points.size());
  for (const Vec2& p : points) {
    if (in.empty() || (p - in.back()).norm() > 1e-14) in.push_back(p);
  }
  if (in.size() >= 2 && (in.front() - in.back()).norm() <= 1e-14) in.pop_back();
  if (in.size() < 3) {
    std::ostringstream os;
    os << "build_curve: need at least 3 distinct points, got " << in.size();
    throw Error(os.str());
  }
  if (resample_count < 3) {
    std::ostringstream os;
    os << "build_curve: resample_count must be >= 3, got " << resample_count;
    throw Error(os.str());
  }
  const int m = static_cast<int>(in.size());

  if (check_simple) {
    for (int i = 0; i < m; ++i) {
      const Vec2& a = in[i];
      const Vec2& b = in[(i + 1) % m];
      for (int j = i + 2; j < m; ++j) {
        if (i == 0 && j == m - 1) continue;  // adjacent via the closing edge
        const Vec2& c = in[j];
        const Vec2& d = in[(j + 1) % m];
        // Cheap bbox rejection first.
        if (std::min(a.x, b.x) > std::max(c.x, d.x) ||
            std::min(c.x, d.x) > std::max(a.x, b.x) ||
            std::min(a.y, b.y) > std::max(c.y, d.y) ||
            std::min(c.y, d.y) > std::max(a.y, b.y))
          continue;
        if (segments_intersect(a, b, c, d)) {
          std::ostringstream os;
          os << "build_curve: input self-intersects (segments " << i << " and " << j
             << ")";
          throw Error(os.str());
        }
      }
    }
  }

  // Orient counter-clockwise.
  double area2 = 0.0;
  for (int i = 0; i < m; ++i) area2 += cross(in[i], in[(i + 1) % m]);
  if (area2 < 0.0) std::reverse(in.begin(), in.end());

  // Cumulative chord lengths of the closed input loop.
  std::vector<double> cum(m + 1, 0.0);
  for (int i = 0; i < m; ++i) cum[i + 1] = cum[i] + (in[(i + 1) % m] - in[i]).norm();
  const double total = cum[m];
  if (total <= 0.0) throw Error("build_curve: degenerate input (zero length)");

  ClosedCurve c;
  c.pts_.resize(resample_count);
  int seg = 0;
  for (int k = 0; k < resample_count; ++k) {
    const double target = total * k / resample_count;
    while (seg + 1 < m && cum[seg + 1] < target) ++seg;
    while (seg > 0 && cum[seg] > target) --seg;
    const double seg_len = cum[seg + 1] - cum[seg];
    const double t = seg_len > 0.0 ? (target - cum[seg]) / seg_len : 0.0;
    c.pts_[k] = in[seg] + (in[(seg + 1) % m] - in[seg]) * t;
  }
  c.finalize();
  return c;
}

ClosedCurve offset_curve(const ClosedCurve& curve, double t, int resample_count) {
  const double bound = std::fabs(t) * curve.max_abs_curvature();
  if (bound >= 1.0) {
    std::ostringstream os;
    os << "offset_curve: |t|*max|kappa| = " << bound
       << " >= 1; offset leaves the injectivity band (t = " << t << ")";
    throw Error(os.str());
  }
  const int n = curve.size();
  std::vector<Vec2> shifted(n);
  for (int i = 0; i < n; ++i) shifted[i] = curve.vertex(i) + curve.normal(i) * t;

  const int target = resample_count > 0 ? resample_count : n;
  // Offsets of curves within the injectivity band stay simple; the quadratic
  // simplicity scan is skipped (the jacobian precondition certifies it).
  ClosedCurve c;
  c.pts_.resize(target);
  // Re-use build_curve's resampling on the shifted polygon without the
  // simplicity check; inline to avoid the distinctness collapse changing
  // sample counts.
  std::vector<double> cum(n + 1, 0.0);
  for (int i = 0; i < n; ++i) cum[i + 1] = cum[i] + (shifted[(i + 1) % n] - shifted[i]).norm();
  const double total = cum[n];
  if (total <= 0.0) throw Error("offset_curve: degenerate offset (zero length)");
  int seg = 0;
  for (int k = 0; k < target; ++k) {
    const double tgt = total * k / target;
    while (seg + 1 < n && cum[seg + 1] < tgt) ++seg;
    while (seg > 0 && cum[seg] > tgt) --seg;
    const double seg_len = cum[seg + 1] - cum[seg];
    const double u = seg_len > 0.0 ? (tgt - cum[seg]) / seg_len : 0.0;
    c.pts_[k] = shifted[seg] + (shifted[(seg + 1) % n] - shifted[seg]) * u;
  }
  c.finalize();
  return c;
}

ClosedCurve make_circle(const Vec2& center, double radius, int n) {
  if (radius <= 0.0) throw Error("make_circle: radius must be positive");
  std::vector<Vec2> pts(n);
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * kPi * i / n;
    pts[i] = center + Vec2{radius * std::cos(a), radius * std::sin(a)};
  }
  return build_curve(pts, n, false);
}

ClosedCurve make_ellipse(const Vec2& center, double rx, double ry, int n) {
  if (rx <= 0.0 || ry <= 0.0) throw Error("make_ellipse: radii must be positive");
  std::vector<Vec2> pts(n);
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * kPi * i / n;
    pts[i] = center + Vec2{rx * std::cos(a), ry * std::sin(a)};
  }
  return build_curve(pts, n, false);
}

}  // namespace stripes
