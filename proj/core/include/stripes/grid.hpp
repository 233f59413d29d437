#pragma once

// Uniform cell-centered grids with an inside mask; the sampling substrate for
// binary patterns and line fields.  Supports an optional periodic (torus)
// mode where index arithmetic wraps.

#include <cstdint>
#include <vector>

#include "stripes/common.hpp"
#include "stripes/domain.hpp"

namespace stripes {

struct Grid {
  double x0 = 0.0, y0 = 0.0;  // lower-left corner of cell (0,0)
  double h = 1.0;             // cell size (square cells)
  int nx = 0, ny = 0;
  bool periodic = false;  // torus mode: neighbours wrap, no outside
  std::vector<std::uint8_t> inside;

  int cell_count() const { return nx * ny; }
  int index(int i, int j) const { return j * nx + i; }
  Vec2 center(int i, int j) const { return {x0 + (i + 0.5) * h, y0 + (j + 0.5) * h}; }
  bool in_bounds(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }
  bool is_inside(int i, int j) const { return in_bounds(i, j) && inside[index(i, j)]; }

  // Periodic wrap (no-op bounds check when not periodic).  Returns false when
  // the neighbour falls off a non-periodic grid.
  bool neighbor(int i, int j, int di, int dj, int& ni, int& nj) const;

  // Cell containing a point; returns false when outside a non-periodic grid.
  bool locate(const Vec2& p, int& i, int& j) const;

  double width() const { return nx * h; }
  double height() const { return ny * h; }

  int inside_count() const;
  double mask_area() const { return inside_count() * h * h; }
};

// Cell-centered rasterization of a tubular domain: a cell is inside when its
// center is.  The grid origin is snapped to the lattice h*Z^2 (deterministic
// for a given domain and h) with a two-cell margin around the bounding box.
Grid rasterize(const TubularDomain& dom, double h);

// Axis-aligned rectangle with every cell inside.  The extent is rounded to a
// whole number of cells.
Grid rect_grid(const Vec2& lo, const Vec2& hi, double h);

// Periodic unit square [0,1)^2 with n x n cells, all inside.
Grid unit_torus_grid(int n);

}  // namespace stripes
