#include "ddswarm/field.hpp"

#include <numeric>

#include "ddswarm/error.hpp"

namespace ddswarm {

bool neighbor(const GridSpec& g, std::size_t idx, int axis, int dir, std::size_t& out) {
  CellIndex3 c = cell_coords(g, idx);
  int j = c[axis] + dir;
  const int n = g.extent[axis];
  if (j < 0 || j >= n) {
    if (g.boundary == Boundary::Reflecting) return false;
    j = (j + n) % n;
  }
  c[axis] = j;
  out = linear_index(g, c);
  return true;
}

double ScalarField::integral() const {
  return std::accumulate(v.begin(), v.end(), 0.0) * grid.cell_volume();
}

VectorField gradient(const ScalarField& f) {
  const GridSpec& g = f.grid;
  VectorField out(g);
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (int a = 0; a < g.dims; ++a) {
      std::size_t up = i, down = i;
      const bool has_up = neighbor(g, i, a, +1, up);
      const bool has_down = neighbor(g, i, a, -1, down);
      const double fu = has_up ? f[up] : f[i];
      const double fd = has_down ? f[down] : f[i];
      out.v[a][i] = (fu - fd) / (2.0 * g.dx);
    }
  }
  return out;
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!a.same_geometry(b)) throw Error(ErrorCode::GridMismatch, std::string(what) + ": grids differ");
}

}  // namespace ddswarm
