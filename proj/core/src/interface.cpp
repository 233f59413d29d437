#include "stripes/interface.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <unordered_map>

namespace stripes {

Vec2 InterfaceLoop::edge(int i) const {
  const int n = segments();
  Vec2 d = pts[(i + 1) % n] - pts[i];
  if (periodic) {
    d.x -= period_x * std::round(d.x / period_x);
    d.y -= period_y * std::round(d.y / period_y);
  }
  return d;
}

double InterfaceLoop::length() const {
  std::vector<double> terms;
  terms.reserve(pts.size());
  for (int i = 0; i < segments(); ++i) terms.push_back(edge(i).norm());
  return pairwise_sum(terms);
}

double InterfaceSet::total_length() const {
  double L = 0.0;
  for (const InterfaceLoop& l : loops) L += l.length();
  return L;
}

namespace {

// Crossed-edge ids of the dual square between four cell centers.
enum : int { kBottom = 0, kRight = 1, kTop = 2, kLeft = 3 };

struct CaseSegment {
  int from, to;
};

// Directed contour segments per corner configuration (bit0 = bottom-left,
// bit1 = bottom-right, bit2 = top-right, bit3 = top-left), oriented with the
// u = 1 phase to the right of travel.  Saddles (5, 10) separate the high
// corners.
const std::vector<CaseSegment> kCases[16] = {
    /* 0*/ {},
    /* 1*/ {{kLeft, kBottom}},
    /* 2*/ {{kBottom, kRight}},
    /* 3*/ {{kLeft, kRight}},
    /* 4*/ {{kRight, kTop}},
    /* 5*/ {{kLeft, kBottom}, {kRight, kTop}},
    /* 6*/ {{kBottom, kTop}},
    /* 7*/ {{kLeft, kTop}},
    /* 8*/ {{kTop, kLeft}},
    /* 9*/ {{kTop, kBottom}},
    /*10*/ {{kBottom, kRight}, {kTop, kLeft}},
    /*11*/ {{kTop, kRight}},
    /*12*/ {{kRight, kLeft}},
    /*13*/ {{kRight, kBottom}},
    /*14*/ {{kBottom, kLeft}},
    /*15*/ {},
};

// Remove points whose incident edges are exactly collinear (staircase runs
// produced by the square tracing), judged on the original edge list.
void compact_collinear(InterfaceLoop& loop) {
  const int n = loop.segments();
  if (n < 4) return;
  std::vector<Vec2> kept;
  kept.reserve(n);
  for (int i = 0; i < n; ++i) {
    const Vec2 prev = loop.edge((i + n - 1) % n);
    const Vec2 next = loop.edge(i);
    if (cross(prev, next) != 0.0) kept.push_back(loop.pts[i]);
  }
  if (kept.size() >= 3) loop.pts = std::move(kept);
}

}  // namespace

InterfaceSet extract_interfaces(const BinaryPattern& p) {
  const Grid& g = p.grid;
  const bool per = g.periodic;
  const int nx = g.nx, ny = g.ny;
  const std::int64_t kx_mod = 2 * nx, ky_mod = 2 * ny;

  auto value = [&](int i, int j) -> int {
    if (per) {
      i = static_cast<int>(((i % nx) + nx) % nx);
      j = static_cast<int>(((j % ny) + ny) % ny);
    } else if (!g.in_bounds(i, j)) {
      return 0;
    }
    const int idx = g.index(i, j);
    return g.inside[idx] && p.u[idx] ? 1 : 0;
  };

  // Edge midpoints live on the half-integer lattice (2i+1, 2j) etc.; keys are
  // exact integers so chained segments share endpoints bit-for-bit.
  const std::int64_t base = ky_mod + 5;
  auto pack = [&](std::int64_t kx, std::int64_t ky) {
    if (per) {
      kx = ((kx % kx_mod) + kx_mod) % kx_mod;
      ky = ((ky % ky_mod) + ky_mod) % ky_mod;
    }
    return (kx + 2) * base + (ky + 2);
  };
  auto key_point = [&](std::int64_t kx, std::int64_t ky) {
    return Vec2{g.x0 + 0.5 * (static_cast<double>(kx) + 1.0) * g.h,
                g.y0 + 0.5 * (static_cast<double>(ky) + 1.0) * g.h};
  };

  std::unordered_map<std::int64_t, std::int64_t> next;
  std::unordered_map<std::int64_t, Vec2> pts;
  const int i_lo = per ? 0 : -1, i_hi = per ? nx : nx;  // squares [i, i+1)
  const int j_lo = per ? 0 : -1, j_hi = per ? ny : ny;
  for (int j = j_lo; j < j_hi; ++j) {
    for (int i = i_lo; i < i_hi; ++i) {
      const int code = value(i, j) | (value(i + 1, j) << 1) | (value(i + 1, j + 1) << 2) |
                       (value(i, j + 1) << 3);
      if (code == 0 || code == 15) continue;
      const std::int64_t ex[4] = {2 * i + 1, 2 * i + 2, 2 * i + 1, 2 * i + 0};
      const std::int64_t ey[4] = {2 * j + 0, 2 * j + 1, 2 * j + 2, 2 * j + 1};
      for (const CaseSegment& s : kCases[code]) {
        const std::int64_t a = pack(ex[s.from], ey[s.from]);
        const std::int64_t b = pack(ex[s.to], ey[s.to]);
        next[a] = b;
        pts.emplace(a, key_point(ex[s.from], ey[s.from]));
        pts.emplace(b, key_point(ex[s.to], ey[s.to]));
      }
    }
  }

  std::vector<std::int64_t> starts;
  starts.reserve(next.size());
  for (const auto& [k, v] : next) starts.push_back(k);
  std::sort(starts.begin(), starts.end());

  InterfaceSet out;
  std::unordered_map<std::int64_t, bool> visited;
  for (const std::int64_t start : starts) {
    if (visited[start]) continue;
    InterfaceLoop loop;
    loop.periodic = per;
    loop.period_x = g.width();
    loop.period_y = g.height();
    std::int64_t cur = start;
    do {
      visited[cur] = true;
      loop.pts.push_back(pts.at(cur));
      const auto it = next.find(cur);
      if (it == next.end()) throw Error("interface tracing hit an open chain");
      cur = it->second;
    } while (cur != start);
    compact_collinear(loop);
    out.loops.push_back(std::move(loop));
  }
  return out;
}

InterfaceSet interfaces_from_loops(std::vector<InterfaceLoop> loops) {
  InterfaceSet out;
  out.loops = std::move(loops);
  return out;
}

InterfaceSet interfaces_from_family(const StripeFamily& family) {
  InterfaceSet out;
  for (const Stripe& s : family.stripes) {
    InterfaceLoop up, low;
    up.pts = s.upper_interface;
    low.pts = s.lower_interface;
    out.loops.push_back(std::move(up));
    out.loops.push_back(std::move(low));
  }
  return out;
}

double perimeter(const InterfaceSet& is) { return is.total_length(); }

JumpMeasure jump_measure(const InterfaceSet& is, double eps) {
  JumpMeasure jm;
  std::size_t count = 0;
  for (const InterfaceLoop& l : is.loops) count += l.pts.size();
  jm.x.reserve(count);
  jm.w.reserve(count);
  jm.P.reserve(count);
  for (const InterfaceLoop& l : is.loops) {
    for (int i = 0; i < l.segments(); ++i) {
      const Vec2 e = l.edge(i);
      const double len = e.norm();
      if (len <= 0.0) continue;
      const Vec2 tau = e / len;
      jm.x.push_back(l.pts[i] + e * 0.5);
      jm.w.push_back(eps * len);
      jm.P.push_back(Mat2::outer(tau, tau));
    }
  }
  jm.total_mass = pairwise_sum(std::vector<double>(jm.w));
  return jm;
}

}  // namespace stripes
