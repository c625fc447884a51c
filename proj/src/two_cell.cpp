#include "ddswarm/two_cell.hpp"

#include <algorithm>
#include <cmath>

namespace ddswarm {

std::array<double, 4> two_cell_rhs(const TwoCellState& s) {
  return {
      -s.gamma * s.psi_i_x1 + s.v_x * s.psi_i_x,
      s.gamma * s.psi_r_x1 - s.v_x * s.psi_r_x,
      -s.gamma * s.psi_i_x + s.v_x1 * s.psi_i_x1,
      s.gamma * s.psi_r_x - s.v_x1 * s.psi_r_x1,
  };
}

std::array<double, 2> two_cell_drho_dt(const TwoCellState& s) {
  const double d = 2.0 * s.gamma * (s.psi_i_x * s.psi_r_x1 - s.psi_r_x * s.psi_i_x1);
  return {d, -d};
}

SecondDerivative two_cell_d2rho_dt2(const TwoCellState& s) {
  const double dv = s.v_x1 - s.v_x;
  const double rho = s.rho_x();
  SecondDerivative out;
  out.leading = 2.0 * s.gamma * s.gamma * (s.rho_x1() - rho) + 2.0 * s.gamma * dv * rho;
  out.remainder =
      2.0 * s.gamma * (s.psi_r_x * s.psi_r_x1 + s.psi_i_x * s.psi_i_x1 - rho) * dv;
  out.total = out.leading + out.remainder;
  return out;
}

TwoCellState two_cell_rk4(const TwoCellState& s, double dt) {
  auto shifted = [&](const std::array<double, 4>& k, double f) {
    TwoCellState t = s;
    t.psi_r_x += f * k[0];
    t.psi_i_x += f * k[1];
    t.psi_r_x1 += f * k[2];
    t.psi_i_x1 += f * k[3];
    return t;
  };
  const auto k1 = two_cell_rhs(s);
  const auto k2 = two_cell_rhs(shifted(k1, 0.5 * dt));
  const auto k3 = two_cell_rhs(shifted(k2, 0.5 * dt));
  const auto k4 = two_cell_rhs(shifted(k3, dt));
  std::array<double, 4> k;
  for (int i = 0; i < 4; ++i) k[i] = (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
  return shifted(k, dt);
}

ContinuumCoefficients matched_two_cell_coefficients(double gamma, double mass, double dx) {
  ContinuumCoefficients c;
  c.intensity = 2.0 * gamma * gamma * mass * dx * dx;
  c.kappa = 2.0 * gamma * mass * dx * dx;
  c.mass = mass;
  return c;
}

EquivalenceReport equivalence_report(const TwoCellState& s, const ContinuumCoefficients& coeffs,
                                     double dx) {
  EquivalenceReport r;
  const SecondDerivative q = two_cell_d2rho_dt2(s);
  r.quantum = q.total;
  r.remainder = q.remainder;
  r.continuum = two_cell_continuum_d2rho(s.rho_x(), s.rho_x1(), s.v_x, s.v_x1, dx, coeffs);
  r.absolute = std::abs(r.quantum - r.continuum);
  r.relative = r.absolute / std::max(std::abs(r.quantum), 1e-300);
  return r;
}

}  // namespace ddswarm
