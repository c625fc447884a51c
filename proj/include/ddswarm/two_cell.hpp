#pragma once

#include <array>

#include "ddswarm/continuum.hpp"

namespace ddswarm {

/// Two neighbouring cells x and x1 of the reduced Schrodinger evolution.
/// V is the shifted potential divided by h, as it enters the system.
struct TwoCellState {
  double psi_r_x = 0, psi_i_x = 0;
  double psi_r_x1 = 0, psi_i_x1 = 0;
  double v_x = 0, v_x1 = 0;
  double gamma = 0;

  double rho_x() const { return psi_r_x * psi_r_x + psi_i_x * psi_i_x; }
  double rho_x1() const { return psi_r_x1 * psi_r_x1 + psi_i_x1 * psi_i_x1; }
};

/// Time derivatives in the order (psi_r_x, psi_i_x, psi_r_x1, psi_i_x1):
///   psi_r_t(x) = -gamma psi_i(x1) + V(x) psi_i(x)
///   psi_i_t(x) =  gamma psi_r(x1) - V(x) psi_r(x)
/// and the same with x and x1 exchanged.
std::array<double, 4> two_cell_rhs(const TwoCellState& s);

/// (d rho(x)/dt, d rho(x1)/dt); the second is the negation of the first.
std::array<double, 2> two_cell_drho_dt(const TwoCellState& s);

struct SecondDerivative {
  /// 2 gamma^2 (rho(x1) - rho(x)) + 2 gamma (V(x1) - V(x)) rho(x)
  double leading = 0;
  /// 2 gamma (psi_r psi_r1 + psi_i psi_i1 - rho(x)) (V(x1) - V(x))
  double remainder = 0;
  double total = 0;
};

SecondDerivative two_cell_d2rho_dt2(const TwoCellState& s);

/// One classical RK4 step of the two-cell system.
TwoCellState two_cell_rk4(const TwoCellState& s, double dt);

/// Continuum coefficients whose two-cell flux form reproduces the leading
/// terms: I = 2 gamma^2 M dx^2, kappa = 2 gamma M dx^2.
ContinuumCoefficients matched_two_cell_coefficients(double gamma, double mass, double dx);

struct EquivalenceReport {
  double quantum = 0;      // closed-form second derivative of rho(x)
  double continuum = 0;    // two-cell continuum flux form
  double absolute = 0;     // |quantum - continuum|
  double relative = 0;     // absolute / max(|quantum|, tiny)
  double remainder = 0;    // the small-grain remainder term
};

EquivalenceReport equivalence_report(const TwoCellState& s, const ContinuumCoefficients& coeffs,
                                     double dx);

}  // namespace ddswarm
