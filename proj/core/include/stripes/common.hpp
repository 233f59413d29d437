#pragma once

// Shared small types: 2-vectors, 2x2 matrices, the library error type and a
// few numeric helpers used across modules.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace stripes {

// All failures surface as stripes::Error with a human-readable message; the
// message names the offending quantity (index, value, tolerance) so callers
// can report it verbatim.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double xx, double yy) : x(xx), y(yy) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2 operator-() const { return {-x, -y}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  Vec2& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }

  double norm2() const { return x * x + y * y; }
  double norm() const { return std::hypot(x, y); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
// Counter-clockwise quarter turn; for a unit tangent this is the left normal.
inline Vec2 rot90(const Vec2& v) { return {-v.y, v.x}; }
inline Vec2 normalized(const Vec2& v) {
  const double n = v.norm();
  if (n == 0.0) throw Error("normalized: zero vector");
  return v / n;
}

struct Mat2 {
  // Row-major: [[a11 a12], [a21 a22]].
  double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

  Mat2() = default;
  Mat2(double m11, double m12, double m21, double m22)
      : a11(m11), a12(m12), a21(m21), a22(m22) {}

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  // Rank-one projection e e^T onto the line spanned by unit vector e.
  static Mat2 outer(const Vec2& a, const Vec2& b) {
    return {a.x * b.x, a.x * b.y, a.y * b.x, a.y * b.y};
  }

  Mat2 operator+(const Mat2& o) const {
    return {a11 + o.a11, a12 + o.a12, a21 + o.a21, a22 + o.a22};
  }
  Mat2 operator-(const Mat2& o) const {
    return {a11 - o.a11, a12 - o.a12, a21 - o.a21, a22 - o.a22};
  }
  Mat2 operator*(double s) const { return {a11 * s, a12 * s, a21 * s, a22 * s}; }
  Mat2 operator*(const Mat2& o) const {
    return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
            a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
  }
  Vec2 operator*(const Vec2& v) const {
    return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y};
  }

  Mat2 transpose() const { return {a11, a21, a12, a22}; }
  double trace() const { return a11 + a22; }
  double frobenius() const {
    return std::sqrt(a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22);
  }
  // max-abs entry norm, used for residual reporting
  double max_abs() const {
    return std::max(std::max(std::fabs(a11), std::fabs(a12)),
                    std::max(std::fabs(a21), std::fabs(a22)));
  }
};

inline double frobenius_inner(const Mat2& a, const Mat2& b) {
  return a.a11 * b.a11 + a.a12 * b.a12 + a.a21 * b.a21 + a.a22 * b.a22;
}

// Deterministic pairwise (cascade) summation: reproducible across runs and
// more accurate than naive left-to-right accumulation.  Consumes the buffer.
double pairwise_sum(std::vector<double>& v);
inline double pairwise_sum(std::vector<double>&& v) {
  std::vector<double> tmp = std::move(v);
  return pairwise_sum(tmp);
}

// Accumulator that keeps per-item terms and pairwise-sums on demand.
class SumAccumulator {
 public:
  void add(double t) { terms_.push_back(t); }
  void reserve(std::size_t n) { terms_.reserve(n); }
  double total() const {
    std::vector<double> tmp = terms_;
    return pairwise_sum(tmp);
  }
  std::size_t size() const { return terms_.size(); }

 private:
  std::vector<double> terms_;
};

constexpr double kPi = 3.14159265358979323846;

// Wrap an angle increment into (-pi, pi]; used when unwrapping angle series.
inline double wrap_angle(double a) {
  while (a > kPi) a -= 2.0 * kPi;
  while (a <= -kPi) a += 2.0 * kPi;
  return a;
}

std::string format_double(double v, int precision = 12);

// Gauss-Legendre nodes and weights on [-1, 1], cached per order.
const std::vector<std::pair<double, double>>& gauss_legendre(int n);

}  // namespace stripes
