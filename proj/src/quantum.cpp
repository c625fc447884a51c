#include "ddswarm/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ddswarm/error.hpp"

namespace ddswarm {

double WaveField::norm() const {
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) s += psi_r[i] * psi_r[i] + psi_i[i] * psi_i[i];
  return s * grid.cell_volume();
}

void WaveField::normalize() {
  const double n = norm();
  if (n <= 0.0) throw Error(ErrorCode::NegativeDensity, "wave function has zero norm");
  const double f = 1.0 / std::sqrt(n);
  for (std::size_t i = 0; i < size(); ++i) {
    psi_r[i] *= f;
    psi_i[i] *= f;
  }
}

DensityField WaveField::density() const {
  DensityField d{ScalarField(grid), true};
  for (std::size_t i = 0; i < size(); ++i) d.rho[i] = psi_r[i] * psi_r[i] + psi_i[i] * psi_i[i];
  return d;
}

WaveField gaussian_packet(const GridSpec& grid, double sigma, const std::array<double, 3>& center,
                          const std::array<double, 3>& wavevector) {
  WaveField psi(grid);
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const CellIndex3 c = cell_coords(grid, i);
    double amp = 0.0, phase = 0.0;
    for (int a = 0; a < grid.dims; ++a) {
      const double x = cell_center(grid, c[a]);
      amp -= (x - center[a]) * (x - center[a]) / (4.0 * sigma * sigma);
      phase += wavevector[a] * x;
    }
    psi.psi_r[i] = std::exp(amp) * std::cos(phase);
    psi.psi_i[i] = std::exp(amp) * std::sin(phase);
  }
  psi.normalize();
  return psi;
}

WaveField plane_wave(const GridSpec& grid, const std::array<double, 3>& wavevector) {
  WaveField psi(grid);
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const CellIndex3 c = cell_coords(grid, i);
    double phase = 0.0;
    for (int a = 0; a < grid.dims; ++a) phase += wavevector[a] * cell_center(grid, c[a]);
    psi.psi_r[i] = std::cos(phase);
    psi.psi_i[i] = std::sin(phase);
  }
  psi.normalize();
  return psi;
}

double free_packet_width(double sigma0, double t, double h, double mass) {
  const double tau = h * t / (2.0 * mass * sigma0 * sigma0);
  return sigma0 * std::sqrt(1.0 + tau * tau);
}

ImpulseField wave_impulse(const WaveField& psi, const PhysicalConfig& physics) {
  const GridSpec& g = psi.grid;
  ImpulseField p(g);
  for (std::size_t i = 0; i < psi.size(); ++i) {
    for (int a = 0; a < g.dims; ++a) {
      std::size_t up = i, down = i;
      const bool hu = neighbor(g, i, a, +1, up);
      const bool hd = neighbor(g, i, a, -1, down);
      const double dr = ((hu ? psi.psi_r[up] : psi.psi_r[i]) - (hd ? psi.psi_r[down] : psi.psi_r[i])) /
                        (2.0 * g.dx);
      const double di = ((hu ? psi.psi_i[up] : psi.psi_i[i]) - (hd ? psi.psi_i[down] : psi.psi_i[i])) /
                        (2.0 * g.dx);
      // Im(conj(psi) dpsi) = r di - i dr
      p.v[a][i] = physics.h * (psi.psi_r[i] * di - psi.psi_i[i] * dr);
    }
  }
  return p;
}

double face_impulse(const WaveField& psi, const PhysicalConfig& physics, std::size_t i, int axis) {
  std::size_t j;
  if (!neighbor(psi.grid, i, axis, +1, j)) return 0.0;
  const double im = psi.psi_r[i] * psi.psi_i[j] - psi.psi_i[i] * psi.psi_r[j];
  return physics.h / psi.grid.dx * im;
}

ImpulseField wave_face_impulse(const WaveField& psi, const PhysicalConfig& physics) {
  ImpulseField p(psi.grid);
  for (int a = 0; a < psi.grid.dims; ++a)
    for (std::size_t i = 0; i < psi.size(); ++i) p.v[a][i] = face_impulse(psi, physics, i, a);
  return p;
}

Potential shifted_potential(const ScalarField& v_pot, const DerivedCoefficients& coeffs) {
  ScalarField v = v_pot;
  for (double& x : v.v) x += coeffs.alpha;
  return Potential(std::move(v));
}

template <typename T>
static void thomas(const std::vector<T>& a, const std::vector<T>& b, const std::vector<T>& c,
                   std::vector<T>& r) {
  const std::size_t n = b.size();
  std::vector<T> cp(n);
  T piv = b[0];
  if (std::abs(piv) == 0.0 || !std::isfinite(std::abs(piv)))
    throw Error(ErrorCode::LinearSolveFailed, "zero pivot in tridiagonal solve");
  cp[0] = n > 1 ? c[0] / piv : T(0);
  r[0] /= piv;
  for (std::size_t i = 1; i < n; ++i) {
    piv = b[i] - a[i] * cp[i - 1];
    if (std::abs(piv) == 0.0 || !std::isfinite(std::abs(piv)))
      throw Error(ErrorCode::LinearSolveFailed, "zero pivot in tridiagonal solve");
    cp[i] = i + 1 < n ? c[i] / piv : T(0);
    r[i] = (r[i] - a[i] * r[i - 1]) / piv;
  }
  for (std::size_t i = n - 1; i-- > 0;) r[i] -= cp[i] * r[i + 1];
}

template <typename T>
void solve_tridiagonal(const std::vector<T>& lower, const std::vector<T>& diag,
                       const std::vector<T>& upper, std::vector<T>& rhs, bool cyclic) {
  const std::size_t n = diag.size();
  if (n == 0) return;
  if (!cyclic || n == 1) {
    thomas(lower, diag, upper, rhs);
    return;
  }
  if (n == 2) {
    const T a = diag[0], b = upper[0] + lower[0], c = lower[1] + upper[1], d = diag[1];
    const T det = a * d - b * c;
    if (std::abs(det) == 0.0) throw Error(ErrorCode::LinearSolveFailed, "singular 2x2 system");
    const T x0 = (d * rhs[0] - b * rhs[1]) / det;
    const T x1 = (a * rhs[1] - c * rhs[0]) / det;
    rhs[0] = x0;
    rhs[1] = x1;
    return;
  }
  // Sherman-Morrison around the plain tridiagonal part.
  const T beta = lower[0];      // A[0][n-1]
  const T alpha = upper[n - 1]; // A[n-1][0]
  const T gamma = -diag[0];
  std::vector<T> bb = diag;
  bb[0] -= gamma;
  bb[n - 1] -= alpha * beta / gamma;
  std::vector<T> z(n, T(0));
  z[0] = gamma;
  z[n - 1] = alpha;
  thomas(lower, bb, upper, rhs);
  thomas(lower, bb, upper, z);
  const T fact = (rhs[0] + beta * rhs[n - 1] / gamma) / (T(1) + z[0] + beta * z[n - 1] / gamma);
  for (std::size_t i = 0; i < n; ++i) rhs[i] -= fact * z[i];
}

template void solve_tridiagonal<double>(const std::vector<double>&, const std::vector<double>&,
                                        const std::vector<double>&, std::vector<double>&, bool);
template void solve_tridiagonal<std::complex<double>>(const std::vector<std::complex<double>>&,
                                                      const std::vector<std::complex<double>>&,
                                                      const std::vector<std::complex<double>>&,
                                                      std::vector<std::complex<double>>&, bool);

namespace {

double kinetic_diag(const PhysicalConfig& p, const GridSpec& g) {
  return p.h * p.h / (p.mass * g.dx * g.dx);
}

// Cells of every grid line along `axis`, in order.
std::vector<std::vector<std::size_t>> grid_lines(const GridSpec& g, int axis) {
  std::vector<std::vector<std::size_t>> lines;
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    const CellIndex3 c = cell_coords(g, i);
    if (c[axis] != 0) continue;
    std::vector<std::size_t> line(g.extent[axis]);
    CellIndex3 k = c;
    for (int j = 0; j < g.extent[axis]; ++j) {
      k[axis] = j;
      line[j] = linear_index(g, k);
    }
    lines.push_back(std::move(line));
  }
  return lines;
}

}  // namespace

SchrodingerSolver::SchrodingerSolver(const GridSpec& grid, const PhysicalConfig& physics,
                                     const ScalarField& v_pot, double dt, Integrator integrator)
    : grid_(grid), physics_(physics), dt_(dt), integrator_(integrator) {
  if (!(dt > 0.0)) throw Error(ErrorCode::NonPositiveScale, "reference solver needs dt > 0");
  set_potential(v_pot);
}

void SchrodingerSolver::set_potential(const ScalarField& v_pot) {
  require_same_grid(grid_, v_pot.grid, "reference potential");
  v_min_ = *std::min_element(v_pot.v.begin(), v_pot.v.end());
  v_ = v_pot;
  for (double& x : v_.v) x -= v_min_;
  if (integrator_ == Integrator::Leapfrog) {
    const double vmax = *std::max_element(v_.v.begin(), v_.v.end());
    const double emax = 2.0 * grid_.dims * kinetic_diag(physics_, grid_) + vmax;
    if (dt_ * emax / physics_.h >= 2.0)
      throw Error(ErrorCode::UnstableStep, "leapfrog step exceeds the stability bound");
  }
}

void SchrodingerSolver::apply_h(const std::vector<double>& in, std::vector<double>& out) const {
  const double td = kinetic_diag(physics_, grid_);
  const double to = -0.5 * td;
  out.resize(in.size());
  const auto n = static_cast<std::int64_t>(in.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    double acc = v_[i] * in[i];
    for (int a = 0; a < grid_.dims; ++a) {
      std::size_t up = i, down = i;
      const double fu = neighbor(grid_, i, a, +1, up) ? in[up] : in[i];
      const double fd = neighbor(grid_, i, a, -1, down) ? in[down] : in[i];
      acc += td * in[i] + to * (fu + fd);
    }
    out[i] = acc;
  }
}

double SchrodingerSolver::energy(const WaveField& psi) const {
  std::vector<double> hr, hi;
  apply_h(psi.psi_r, hr);
  apply_h(psi.psi_i, hi);
  double e = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) e += psi.psi_r[i] * hr[i] + psi.psi_i[i] * hi[i];
  return e * grid_.cell_volume() + v_min_ * psi.norm();
}

void SchrodingerSolver::step(WaveField& psi) const {
  require_same_grid(grid_, psi.grid, "reference step");
  const double before = psi.norm();
  switch (integrator_) {
    case Integrator::CrankNicolson:
      if (grid_.dims == 1) step_cn_1d(psi);
      else step_cn_split(psi);
      break;
    case Integrator::Leapfrog:
      step_leapfrog(psi);
      return;
  }
  const double after = psi.norm();
  if (!(std::abs(after - before) <= 1e-9 * before))
    throw Error(ErrorCode::NormDrift, "norm changed from " + std::to_string(before) + " to " +
                                          std::to_string(after));
}

void SchrodingerSolver::step_cn_1d(WaveField& psi) const {
  using C = std::complex<double>;
  const std::size_t n = psi.size();
  const bool cyclic = grid_.boundary == Boundary::Periodic;
  const double td = kinetic_diag(physics_, grid_);
  const double to = -0.5 * td;
  const C ib(0.0, dt_ / (2.0 * physics_.h));

  std::vector<double> hdiag(n);
  for (std::size_t i = 0; i < n; ++i) {
    hdiag[i] = td + v_[i];
    if (!cyclic && (i == 0 || i + 1 == n)) hdiag[i] += to;  // mirror ghost
  }
  std::vector<C> lower(n, ib * to), upper(n, ib * to), diag(n), rhs(n);
  if (!cyclic) {
    lower[0] = 0.0;
    upper[n - 1] = 0.0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    diag[i] = 1.0 + ib * hdiag[i];
    const C here(psi.psi_r[i], psi.psi_i[i]);
    C hpsi = hdiag[i] * here;
    const std::size_t lo = i == 0 ? n - 1 : i - 1;
    const std::size_t hi = i + 1 == n ? 0 : i + 1;
    if (cyclic || i > 0) hpsi += to * C(psi.psi_r[lo], psi.psi_i[lo]);
    if (cyclic || i + 1 < n) hpsi += to * C(psi.psi_r[hi], psi.psi_i[hi]);
    rhs[i] = here - ib * hpsi;
  }
  solve_tridiagonal(lower, diag, upper, rhs, cyclic);
  for (std::size_t i = 0; i < n; ++i) {
    psi.psi_r[i] = rhs[i].real();
    psi.psi_i[i] = rhs[i].imag();
  }
}

void SchrodingerSolver::step_cn_split(WaveField& psi) const {
  using C = std::complex<double>;
  const double half = 0.5 * dt_ / physics_.h;
  auto potential_phase = [&] {
    for (std::size_t i = 0; i < psi.size(); ++i) {
      const C z = C(psi.psi_r[i], psi.psi_i[i]) * std::polar(1.0, -v_[i] * half);
      psi.psi_r[i] = z.real();
      psi.psi_i[i] = z.imag();
    }
  };
  potential_phase();
  const bool cyclic = grid_.boundary == Boundary::Periodic;
  const double td = kinetic_diag(physics_, grid_);
  const double to = -0.5 * td;
  const C ib(0.0, dt_ / (2.0 * physics_.h));
  for (int axis = 0; axis < grid_.dims; ++axis) {
    const auto lines = grid_lines(grid_, axis);
    const std::size_t n = grid_.extent[axis];
    const auto nl = static_cast<std::int64_t>(lines.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t l = 0; l < nl; ++l) {
      const auto& line = lines[l];
      std::vector<C> lower(n, ib * to), upper(n, ib * to), diag(n), rhs(n);
      if (!cyclic) {
        lower[0] = 0.0;
        upper[n - 1] = 0.0;
      }
      for (std::size_t j = 0; j < n; ++j) {
        double hd = td;
        if (!cyclic && (j == 0 || j + 1 == n)) hd += to;
        diag[j] = 1.0 + ib * hd;
        const std::size_t i = line[j];
        const C here(psi.psi_r[i], psi.psi_i[i]);
        C hpsi = hd * here;
        const std::size_t lo = line[j == 0 ? n - 1 : j - 1];
        const std::size_t hi = line[j + 1 == n ? 0 : j + 1];
        if (cyclic || j > 0) hpsi += to * C(psi.psi_r[lo], psi.psi_i[lo]);
        if (cyclic || j + 1 < n) hpsi += to * C(psi.psi_r[hi], psi.psi_i[hi]);
        rhs[j] = here - ib * hpsi;
      }
      solve_tridiagonal(lower, diag, upper, rhs, cyclic);
      for (std::size_t j = 0; j < n; ++j) {
        psi.psi_r[line[j]] = rhs[j].real();
        psi.psi_i[line[j]] = rhs[j].imag();
      }
    }
  }
  potential_phase();
}

void SchrodingerSolver::step_leapfrog(WaveField& psi) const {
  const double f = dt_ / physics_.h;
  std::vector<double> tmp;
  apply_h(psi.psi_i, tmp);
  for (std::size_t i = 0; i < psi.size(); ++i) psi.psi_r[i] += f * tmp[i];
  apply_h(psi.psi_r, tmp);
  for (std::size_t i = 0; i < psi.size(); ++i) psi.psi_i[i] -= f * tmp[i];
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Conjugate gradients for (H + shift) x = b.
void cg_solve(const SchrodingerSolver& h, double shift, const std::vector<double>& b,
              std::vector<double>& x) {
  const std::size_t n = b.size();
  std::vector<double> r = b, p, ap;
  x.assign(n, 0.0);
  p = r;
  double rr = dot(r, r);
  const double stop = 1e-28 * rr;
  for (std::size_t it = 0; it < 20 * n + 100 && rr > stop; ++it) {
    h.apply_h(p, ap);
    for (std::size_t i = 0; i < n; ++i) ap[i] += shift * p[i];
    const double alpha = rr / dot(p, ap);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    const double rr_new = dot(r, r);
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
}

}  // namespace

WaveField discrete_ground_state(const GridSpec& grid, const PhysicalConfig& physics,
                                const ScalarField& v_pot, double* energy) {
  // Inverse iteration on the real symmetric Hamiltonian with a small
  // positive shift so the pinned operator stays definite.
  const SchrodingerSolver h(grid, physics, v_pot, 1.0);
  double lmax = 0.0;
  for (int a = 0; a < grid.dims; ++a) lmax = std::max(lmax, grid.length(a));
  const double shift = 1e-3 * physics.h * physics.h / (physics.mass * lmax * lmax);
  const std::size_t n = grid.cell_count();
  const bool cyclic = grid.boundary == Boundary::Periodic;

  std::vector<double> x(n, 1.0), y, hx;
  double e_prev = std::numeric_limits<double>::infinity();
  const double td = kinetic_diag(physics, grid);
  ScalarField pinned = v_pot;
  const double vmin = *std::min_element(v_pot.v.begin(), v_pot.v.end());
  for (double& v : pinned.v) v -= vmin;

  for (int it = 0; it < 2000; ++it) {
    if (grid.dims == 1) {
      std::vector<double> lower(n, -0.5 * td), upper(n, -0.5 * td), diag(n);
      for (std::size_t i = 0; i < n; ++i) {
        diag[i] = td + pinned[i] + shift;
        if (!cyclic && (i == 0 || i + 1 == n)) diag[i] -= 0.5 * td;
      }
      if (!cyclic) {
        lower[0] = 0.0;
        upper[n - 1] = 0.0;
      }
      y = x;
      solve_tridiagonal(lower, diag, upper, y, cyclic);
    } else {
      cg_solve(h, shift, x, y);
    }
    const double len = std::sqrt(dot(y, y));
    for (double& v : y) v /= len;
    h.apply_h(y, hx);
    const double e = dot(y, hx);
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) diff = std::max(diff, std::abs(y[i] - x[i]));
    x.swap(y);
    if (std::abs(e - e_prev) <= 1e-15 * std::max(1.0, std::abs(e)) && diff < 1e-13) break;
    e_prev = e;
  }
  double sum = 0.0;
  for (double v : x) sum += v;
  if (sum < 0.0)
    for (double& v : x) v = -v;

  WaveField psi(grid);
  psi.psi_r = x;
  psi.normalize();
  if (energy) *energy = h.energy(psi);
  return psi;
}

}  // namespace ddswarm
