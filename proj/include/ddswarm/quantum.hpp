#pragma once

#include <array>
#include <complex>
#include <vector>

#include "ddswarm/field.hpp"
#include "ddswarm/swarm.hpp"
#include "ddswarm/units.hpp"

namespace ddswarm {

/// Wave function on the cells, split into real and imaginary parts.
struct WaveField {
  GridSpec grid;
  std::vector<double> psi_r;
  std::vector<double> psi_i;

  WaveField() = default;
  explicit WaveField(const GridSpec& g) : grid(g), psi_r(g.cell_count(), 0.0), psi_i(g.cell_count(), 0.0) {}

  std::size_t size() const { return psi_r.size(); }
  /// sum |psi|^2 dx^dims
  double norm() const;
  void normalize();
  DensityField density() const;
};

/// exp(-|x - center|^2 / (4 sigma^2) + i K.x), normalised; |psi|^2 has
/// standard deviation sigma along each active axis.
WaveField gaussian_packet(const GridSpec& grid, double sigma, const std::array<double, 3>& center,
                          const std::array<double, 3>& wavevector);

/// exp(i K.x) normalised over the box. K should fit the periodic box.
WaveField plane_wave(const GridSpec& grid, const std::array<double, 3>& wavevector);

/// Width of a free Gaussian packet after time t.
double free_packet_width(double sigma0, double t, double h, double mass);

/// Cell-centred impulse density h Im(psi* grad psi), central differences.
ImpulseField wave_impulse(const WaveField& psi, const PhysicalConfig& physics);

/// Probability-current impulse across the face between cell i and its
/// + neighbour along `axis`: (h/dx) Im(psi_i* psi_j). Zero at a wall.
double face_impulse(const WaveField& psi, const PhysicalConfig& physics, std::size_t i, int axis);
/// face_impulse on every upper face, in the continuum layer's layout.
ImpulseField wave_face_impulse(const WaveField& psi, const PhysicalConfig& physics);

/// V_pot + alpha. Used by the two-cell analysis only.
Potential shifted_potential(const ScalarField& v_pot, const DerivedCoefficients& coeffs);

enum class Integrator { CrankNicolson, Leapfrog };

/// Time stepper for i h dPsi/dt = -(h^2 / 2M) Lap Psi + V_pot Psi with the
/// 3/5/7-point Laplacian. Crank-Nicolson is exact in 1-D (V inside the
/// tridiagonal system) and Strang-split in higher dims. Leapfrog is the
/// staggered real/imaginary update, conditionally stable.
class SchrodingerSolver {
 public:
  SchrodingerSolver(const GridSpec& grid, const PhysicalConfig& physics, const ScalarField& v_pot,
                    double dt, Integrator integrator = Integrator::CrankNicolson);

  void set_potential(const ScalarField& v_pot);
  /// Throws NormDrift when a Crank-Nicolson step changes the norm by more than 1e-9.
  void step(WaveField& psi) const;

  double dt() const { return dt_; }
  const GridSpec& grid() const { return grid_; }
  /// <psi|H|psi> with the unshifted potential.
  double energy(const WaveField& psi) const;
  /// H applied to one real component (kinetic + pinned potential).
  void apply_h(const std::vector<double>& in, std::vector<double>& out) const;

 private:
  void step_cn_1d(WaveField& psi) const;
  void step_cn_split(WaveField& psi) const;
  void step_leapfrog(WaveField& psi) const;

  GridSpec grid_;
  PhysicalConfig physics_;
  double dt_;
  Integrator integrator_;
  ScalarField v_;     // potential with its minimum moved to zero
  double v_min_ = 0;  // the shift removed from v_
};

/// Lowest eigenvector of the discrete Hamiltonian, real and positive,
/// normalised; `energy` receives its eigenvalue (unshifted potential).
WaveField discrete_ground_state(const GridSpec& grid, const PhysicalConfig& physics,
                                const ScalarField& v_pot, double* energy = nullptr);

/// Solves a (possibly cyclic) tridiagonal system in place. `lower[i]`
/// couples row i to i-1, `upper[i]` to i+1; for cyclic systems lower[0] and
/// upper[n-1] are the corner entries. Throws LinearSolveFailed on a zero pivot.
template <typename T>
void solve_tridiagonal(const std::vector<T>& lower, const std::vector<T>& diag,
                       const std::vector<T>& upper, std::vector<T>& rhs, bool cyclic);

}  // namespace ddswarm
