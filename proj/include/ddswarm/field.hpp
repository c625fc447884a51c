#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "ddswarm/units.hpp"

namespace ddswarm {

using CellIndex3 = std::array<int, 3>;

/// Linear cell index: x fastest.
inline std::size_t linear_index(const GridSpec& g, const CellIndex3& c) {
  return static_cast<std::size_t>(c[0]) +
         static_cast<std::size_t>(g.extent[0]) *
             (static_cast<std::size_t>(c[1]) + static_cast<std::size_t>(g.extent[1]) * c[2]);
}

inline CellIndex3 cell_coords(const GridSpec& g, std::size_t idx) {
  CellIndex3 c{0, 0, 0};
  c[0] = static_cast<int>(idx % g.extent[0]);
  idx /= g.extent[0];
  c[1] = static_cast<int>(idx % g.extent[1]);
  c[2] = static_cast<int>(idx / g.extent[1]);
  return c;
}

inline double cell_center(const GridSpec& g, int i) { return (i + 0.5) * g.dx; }

/// Neighbour of `idx` one cell along `axis` in direction `dir` (+1/-1).
/// Returns false at a reflecting wall.
bool neighbor(const GridSpec& g, std::size_t idx, int axis, int dir, std::size_t& out);

struct ScalarField {
  GridSpec grid;
  std::vector<double> v;

  ScalarField() = default;
  explicit ScalarField(const GridSpec& g, double fill = 0.0) : grid(g), v(g.cell_count(), fill) {}

  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }
  std::size_t size() const { return v.size(); }

  /// Sum of values times the cell volume.
  double integral() const;
};

struct VectorField {
  GridSpec grid;
  std::array<std::vector<double>, 3> v;

  VectorField() = default;
  explicit VectorField(const GridSpec& g) : grid(g) {
    for (auto& comp : v) comp.assign(g.cell_count(), 0.0);
  }
  std::size_t size() const { return v[0].size(); }
};

/// Central-difference gradient. Reflecting walls mirror the boundary cell,
/// so the outward difference is zero there.
VectorField gradient(const ScalarField& f);

/// Fills a scalar field from a function of the cell-centre position.
template <typename Fn>
ScalarField sample_field(const GridSpec& g, Fn&& fn) {
  ScalarField out(g);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const CellIndex3 c = cell_coords(g, i);
    std::array<double, 3> x{0, 0, 0};
    for (int a = 0; a < g.dims; ++a) x[a] = cell_center(g, c[a]);
    out[i] = fn(x);
  }
  return out;
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what);

}  // namespace ddswarm

namespace ddswarm {

/// Density of samples per cell. `normalized` fields integrate to 1,
/// unnormalized ones to the sample count.
struct DensityField {
  ScalarField rho;
  bool normalized = false;
};

/// Impulse density per cell (summed impulse over the cell divided by its volume).
using ImpulseField = VectorField;

}  // namespace ddswarm
