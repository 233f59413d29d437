#include "stripes/grid.hpp"

#include <cmath>
#include <sstream>

namespace stripes {

bool Grid::neighbor(int i, int j, int di, int dj, int& ni, int& nj) const {
  ni = i + di;
  nj = j + dj;
  if (periodic) {
    ni = ((ni % nx) + nx) % nx;
    nj = ((nj % ny) + ny) % ny;
    return true;
  }
  return in_bounds(ni, nj);
}

bool Grid::locate(const Vec2& p, int& i, int& j) const {
  double fx = (p.x - x0) / h;
  double fy = (p.y - y0) / h;
  if (periodic) {
    fx -= std::floor(fx / nx) * nx;
    fy -= std::floor(fy / ny) * ny;
  }
  i = static_cast<int>(std::floor(fx));
  j = static_cast<int>(std::floor(fy));
  if (periodic) {
    i = ((i % nx) + nx) % nx;
    j = ((j % ny) + ny) % ny;
    return true;
  }
  return in_bounds(i, j);
}

int Grid::inside_count() const {
  int c = 0;
  for (const auto v : inside) c += v ? 1 : 0;
  return c;
}

Grid rasterize(const TubularDomain& dom, double h) {
  if (h <= 0.0) throw Error("rasterize: h must be positive");
  Vec2 lo, hi;
  dom.bounding_box(lo, hi);
  Grid g;
  g.h = h;
  // Snap the origin to the lattice h*Z^2 with a two-cell margin; the result
  // depends only on the domain bounding box and h.
  g.x0 = (std::floor(lo.x / h) - 2) * h;
  g.y0 = (std::floor(lo.y / h) - 2) * h;
  g.nx = static_cast<int>(std::ceil((hi.x - g.x0) / h)) + 2;
  g.ny = static_cast<int>(std::ceil((hi.y - g.y0) / h)) + 2;
  if (static_cast<long long>(g.nx) * g.ny > 80'000'000LL) {
    std::ostringstream os;
    os << "rasterize: grid " << g.nx << "x" << g.ny << " too large at h = " << h;
    throw Error(os.str());
  }
  g.inside.assign(static_cast<std::size_t>(g.nx) * g.ny, 0);
  const double delta = dom.delta();
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const CurveProjection f = dom.frame(g.center(i, j));
      if (std::fabs(f.w) < delta) g.inside[g.index(i, j)] = 1;
    }
  }
  return g;
}

Grid rect_grid(const Vec2& lo, const Vec2& hi, double h) {
  if (h <= 0.0) throw Error("rect_grid: h must be positive");
  if (hi.x <= lo.x || hi.y <= lo.y) throw Error("rect_grid: empty extent");
  Grid g;
  g.h = h;
  g.x0 = lo.x;
  g.y0 = lo.y;
  g.nx = std::max(1, static_cast<int>(std::lround((hi.x - lo.x) / h)));
  g.ny = std::max(1, static_cast<int>(std::lround((hi.y - lo.y) / h)));
  g.inside.assign(static_cast<std::size_t>(g.nx) * g.ny, 1);
  return g;
}

Grid unit_torus_grid(int n) {
  if (n < 2) throw Error("unit_torus_grid: need at least 2 cells per side");
  Grid g;
  g.h = 1.0 / n;
  g.x0 = 0.0;
  g.y0 = 0.0;
  g.nx = n;
  g.ny = n;
  g.periodic = true;
  g.inside.assign(static_cast<std::size_t>(n) * n, 1);
  return g;
}

}  // namespace stripes
