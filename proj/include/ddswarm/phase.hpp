#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ddswarm/continuum.hpp"
#include "ddswarm/field.hpp"
#include "ddswarm/units.hpp"

namespace ddswarm {

/// Relative phase per cell, accumulated from `ref_cell` along a spanning tree.
struct PhaseField {
  GridSpec grid;
  std::vector<double> phi;
  std::vector<std::uint8_t> defined;
  std::size_t ref_cell = 0;
  double k_cal = 0;
  /// Links whose arcsin argument left [-1, 1].
  std::size_t clipped_links = 0;
  /// Connected regions of defined cells; more than one means the support is
  /// split by nodes and each region has its own origin.
  std::size_t components = 0;
};

/// The constant that makes the link formula exact for lattice currents: 1/(h dx^2).
double lattice_k(const PhysicalConfig& physics, const GridSpec& grid);

/// Density below which a cell counts as a node: `samples_per_cell` samples
/// out of `n_samples`, as a normalised density.
double node_floor(std::uint64_t n_samples, const GridSpec& grid, double samples_per_cell = 10.0);

/// arcsin(k dx^3 p_ab / sqrt(rho_a rho_b)), p_ab the impulse density across
/// the face in the a -> b direction. Clipped arguments bump `clipped`.
double link_increment(double rho_a, double rho_b, double p_ab, double k_cal, double dx,
                      std::size_t* clipped = nullptr);

/// Phase of cell b minus phase of cell a for face-adjacent cells, using the
/// mean of the two cells' impulse densities. Throws NodeCell when either
/// density is at or below `floor`, InvalidConfig when the cells are not adjacent.
double link_phase(const DensityField& rho, const ImpulseField& p, std::size_t a, std::size_t b,
                  double k_cal, double floor = 0.0, std::size_t* clipped = nullptr);

/// Breadth-first accumulation of link phases over cells above `floor`.
PhaseField reconstruct_phase(const DensityField& rho, const ImpulseField& p, std::size_t ref_cell,
                             double k_cal, double floor = 0.0);

/// Ordered face-adjacent cells. A closed contour returns to its first cell.
struct Contour {
  std::vector<std::size_t> cells;
  bool closed = false;
};

/// Square loop in the x-y plane through the cells at Chebyshev distance
/// `half_width` from `center`, counter-clockwise, closed.
Contour square_contour(const GridSpec& grid, const CellIndex3& center, int half_width);

/// Straight run of cells from `from` to `to` moving first along x, then y, then z.
Contour axis_path(const GridSpec& grid, const CellIndex3& from, const CellIndex3& to, bool x_first = true);

/// Sum of link phases along the contour (including the closing link).
double contour_phase(const DensityField& rho, const ImpulseField& p, const Contour& contour,
                     double k_cal, double floor = 0.0);

struct PathIndependenceReport {
  std::size_t pairs = 0;
  /// max |difference - 2 pi w| with w the nearest winding number
  double max_residual = 0;
  /// nonzero windings seen, reported separately from the residual
  std::vector<long> windings;
};

PathIndependenceReport path_independence_check(const DensityField& rho, const ImpulseField& p,
                                               const std::vector<std::pair<Contour, Contour>>& paths,
                                               double k_cal, double floor = 0.0);

/// Closed-contour sum of dx v.e over the links, v = p / (M rho) at the face.
double circulation(const DensityField& rho, const ImpulseField& p, const Contour& contour,
                   double mass, double floor = 0.0);

struct CirculationReport {
  std::vector<double> times;
  std::vector<double> values;
  /// max |circulation(t) - circulation(0)| divided by the elapsed time
  double drift_rate = 0;
};

/// Throws NodeCrossing when a contour cell falls to the floor in any frame.
CirculationReport circulation_drift(const std::vector<ContinuumState>& frames, const Contour& contour,
                                    double mass, double floor = 0.0);

struct KCalibration {
  double k_cal = 0;
  double wavenumber = 0;
  double fitted_slope = 0;
  double residual = 0;  // |slope - K| / K
};

/// Fits k so a plane wave of wavenumber K along x reconstructs with slope K.
/// Throws CalibrationDiverged when the residual stays above 1%.
KCalibration calibrate_k(const PhysicalConfig& physics, const GridSpec& grid, double wavenumber);

/// Least-squares slope of phi along x over the first grid line.
double phase_slope_x(const PhaseField& phase);

/// Analytic plane-wave fields on `grid`: uniform density, p = rho h K along x.
std::pair<DensityField, ImpulseField> plane_wave_fields(const PhysicalConfig& physics,
                                                        const GridSpec& grid, double wavenumber);

}  // namespace ddswarm
