#pragma once

#include <vector>

#include "ddswarm/field.hpp"
#include "ddswarm/swarm.hpp"
#include "ddswarm/units.hpp"

namespace ddswarm {

/// Coefficients of the continuum pair (rho, p), with rho normalised to 1
/// and p = M rho v:
///   dp/dt   = -I grad rho - kappa rho grad V
///   drho/dt = -div p / M
struct ContinuumCoefficients {
  double intensity = 0.0;
  double kappa = 1.0;
  double mass = 1.0;
  /// g. Off by default; when on, the momentum flux is added with a donor-cell
  /// flux. Experimental: not stable over long runs.
  double inertia = 0.0;

  /// The grain coefficients I = h^2/(2 m^2 dx^3), kappa = h/(m dx) taken literally.
  static ContinuumCoefficients from_grain(const DerivedCoefficients& d, const PhysicalConfig& physics);
  /// Isothermal closure with sound speed cs: I = M cs^2, kappa = 1
  /// (V is the particle's potential energy).
  static ContinuumCoefficients isothermal(double sound_speed_sq, const PhysicalConfig& physics,
                                          double inertia = 0.0);
};

/// The continuum impulse lives on cell faces: p.v[a][i] is the impulse
/// density on the upper face of cell i along axis a. Faces on a reflecting
/// wall stay zero.
ImpulseField cell_impulse(const ImpulseField& faces);
ImpulseField face_impulse_from_cells(const ImpulseField& cells);

/// Rate of the face impulse, gradients taken across each face and rho
/// averaged onto it.
ImpulseField dpdt(const DensityField& rho, const Potential& V, const ContinuumCoefficients& coeffs);

/// -g div(p p / (M rho)) on faces. Zero when coeffs.inertia is 0.
ImpulseField inertia_rate(const DensityField& rho, const ImpulseField& p, const ContinuumCoefficients& coeffs);

/// Face-flux divergence: outward flux lowers the cell density.
ScalarField drho_dt(const ImpulseField& p, const ContinuumCoefficients& coeffs);

/// drho_dt applied to dpdt with p = 0.
ScalarField d2rho_dt2(const DensityField& rho, const Potential& V, const ContinuumCoefficients& coeffs);

/// Second derivative of rho(x) for two cells sharing one face, with the
/// gradients taken across that face and the potential term weighted by rho(x).
double two_cell_continuum_d2rho(double rho_x, double rho_x1, double v_x, double v_x1, double dx,
                                const ContinuumCoefficients& coeffs);

struct ContinuumState {
  DensityField rho;
  ImpulseField p;
  double time = 0.0;
};

/// Largest stable step for the acoustic part, times `safety`.
double continuum_stable_dt(const GridSpec& grid, const ContinuumCoefficients& coeffs,
                           double safety = 0.5);

/// One semi-implicit Euler step: p first, then rho from the new p.
/// Throws UnstableStep when a value stops being finite or mass drifts.
void continuum_step(ContinuumState& state, const Potential& V, const ContinuumCoefficients& coeffs,
                    double dt);

/// Integrates to t_end. `dt` <= 0 picks continuum_stable_dt. Returns the
/// initial state, every state whose time crosses a multiple of
/// `frame_interval` (all states when frame_interval <= 0) and the final one.
std::vector<ContinuumState> integrate_continuum(const DensityField& rho0, const ImpulseField& p0,
                                                const Potential& V,
                                                const ContinuumCoefficients& coeffs, double t_end,
                                                double dt, double frame_interval = 0.0);

double total_mass(const DensityField& rho);

}  // namespace ddswarm
