#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "ddswarm/field.hpp"
#include "ddswarm/rng.hpp"
#include "ddswarm/units.hpp"

namespace ddswarm {

/// Discrete speed of a sample: at rest, or moving with speed c along one axis.
enum class SpeedTag : std::uint8_t {
  Zero = 0,
  PlusX = 1,
  MinusX = 2,
  PlusY = 3,
  MinusY = 4,
  PlusZ = 5,
  MinusZ = 6,
};

constexpr bool is_moving(SpeedTag t) { return t != SpeedTag::Zero; }
/// Axis 0..2 of a moving tag; -1 for Zero.
constexpr int axis_of(SpeedTag t) { return t == SpeedTag::Zero ? -1 : (static_cast<int>(t) - 1) / 2; }
/// +1, -1, or 0 for Zero.
constexpr int sign_of(SpeedTag t) {
  return t == SpeedTag::Zero ? 0 : ((static_cast<int>(t) - 1) % 2 == 0 ? 1 : -1);
}
constexpr SpeedTag moving_tag(int axis, int sign) {
  return static_cast<SpeedTag>(1 + 2 * axis + (sign > 0 ? 0 : 1));
}
constexpr SpeedTag opposite(SpeedTag t) {
  return t == SpeedTag::Zero ? SpeedTag::Zero : moving_tag(axis_of(t), -sign_of(t));
}
const char* to_string(SpeedTag t);

struct Sample {
  std::array<double, 3> pos{0, 0, 0};
  SpeedTag speed = SpeedTag::Zero;
  std::uint64_t id = 0;
};

/// Per-cell speed census.
struct CellStats {
  std::uint32_t n = 0;
  std::uint32_t n_zero = 0;
  std::array<std::uint32_t, 3> n_plus{0, 0, 0};
  std::array<std::uint32_t, 3> n_minus{0, 0, 0};
  /// Size of a maximal zero-sum subset of the moving samples:
  /// 2 * sum over axes of min(n_plus, n_minus).
  std::uint32_t s = 0;

  std::int64_t net(int axis) const {
    return static_cast<std::int64_t>(n_plus[axis]) - static_cast<std::int64_t>(n_minus[axis]);
  }
};

CellStats tally(std::span<const SpeedTag> speeds);

/// Swarm storage, structure-of-arrays. After `sort_by_cell` samples are
/// grouped by cell and `cell_start[c] .. cell_start[c+1]` is cell c's range.
struct SwarmState {
  std::array<std::vector<double>, 3> pos;
  std::vector<SpeedTag> speed;
  std::vector<std::uint64_t> id;
  std::vector<std::uint32_t> cell_start;
  double time = 0.0;
  std::uint64_t step = 0;
  std::uint64_t seed = 0;

  std::size_t size() const { return speed.size(); }
  Sample sample(std::size_t i) const;
  void push_back(const Sample& s);
  void reserve(std::size_t n);
};

/// Cell containing a position. Throws PositionOutOfDomain outside the grid.
std::size_t cell_of(const GridSpec& grid, const std::array<double, 3>& pos);

/// Counts per cell. Does not reorder the swarm.
std::vector<CellStats> bin_samples(const SwarmState& swarm, const GridSpec& grid);

/// Stable counting sort of the samples by cell; rebuilds `cell_start`.
void sort_by_cell(SwarmState& swarm, const GridSpec& grid, int workers = 1);

/// rho = n / dx^dims per cell, plus the same field divided by the total count.
struct SwarmDensity {
  DensityField counts;
  DensityField normalized;
  std::uint64_t total = 0;
};
SwarmDensity density(const std::vector<CellStats>& stats, const GridSpec& grid);

/// Summed impulse per cell divided by the cell volume, in particle units
/// (each sample carries mass M / n).
ImpulseField impulse_density(const std::vector<CellStats>& stats, const GridSpec& grid,
                             const PhysicalConfig& physics);

/// Reaction of change. A moving opposite pair comes to rest; a resting pair
/// gets opposite speeds along an axis drawn uniformly from the active axes.
/// Throws PairNotOpposite or PairTooFar when the preconditions fail.
std::pair<Sample, Sample> reaction_of_change(const Sample& a, const Sample& b, double dx, int dims,
                                             KeyedRng& rng);

enum class RoundingPolicy { Stochastic, Nearest };

struct BalanceOutcome {
  std::uint32_t pairs_created = 0;
  std::uint32_t pairs_annihilated = 0;
};

/// Target number of opposite pairs along one axis for a cell of `n` samples
/// with net moving count `net` along that axis. With no net flow this is
/// the pair count that realises s / n_zero = d; with flow the net movers
/// are accounted for so that the cell's momentum flux stays n (cs^2 + v^2).
double balanced_pair_target(std::uint32_t n, std::int64_t net, double moving_ratio, int dims);

/// Rebalancing inside one cell by reactions of change.
BalanceOutcome step1_balance(std::span<SpeedTag> speeds, int dims, double moving_ratio,
                             RoundingPolicy rounding, KeyedRng& rng);

struct KickOutcome {
  std::array<std::uint32_t, 3> granted{0, 0, 0};
  bool saturated = false;
};

/// Grants speed -sign(dV/du) c to stationary samples so that the expected
/// impulse handed out over `dt` equals the force n_cell * |dV/du| / n_total
/// integrated over the step. Once the stationary samples run out, samples
/// moving against the force are stopped instead; `saturated` means both
/// pools ran dry. `grad_potential` is the gradient of the particle's
/// potential energy at the cell centre.
KickOutcome step2_potential_kick(std::span<SpeedTag> speeds, int dims,
                                 const std::array<double, 3>& grad_potential, double dt,
                                 const PhysicalConfig& physics, KeyedRng& rng);

/// Galilean move of every sample by v dt, then periodic wrap or reflection.
void step3_advect(SwarmState& swarm, const GridSpec& grid, double c, int workers = 1);

/// External potential energy on the cells and its central-difference gradient.
struct Potential {
  ScalarField values;
  VectorField grad;

  Potential() = default;
  explicit Potential(ScalarField v) : values(std::move(v)) { refresh(); }
  static Potential zero(const GridSpec& g) { return Potential(ScalarField(g, 0.0)); }
  void refresh() { grad = gradient(values); }
};

/// Step 4 of the mechanism. Called after advection with the new positions;
/// may rewrite the potential (it must call `refresh`).
using PotentialHook = std::function<void(const SwarmState&, Potential&)>;

struct SwarmParams {
  double moving_ratio = 0.1;  // d
  RoundingPolicy rounding = RoundingPolicy::Stochastic;
  int workers = 1;
};

struct StepDiagnostics {
  std::uint64_t pairs_created = 0;
  std::uint64_t pairs_annihilated = 0;
  std::array<std::uint64_t, 3> kicks{0, 0, 0};
  std::uint64_t saturated_cells = 0;
};

/// One full step: balance, kick, advect, refresh hook. Advances time by dt.
StepDiagnostics full_step(SwarmState& swarm, Potential& potential, const ValidatedConfig& config,
                          const SwarmParams& params, const PotentialHook& hook = {});

class SwarmEngine {
 public:
  SwarmEngine(ValidatedConfig config, SwarmParams params, Potential potential)
      : config_(std::move(config)), params_(params), potential_(std::move(potential)) {}

  void set_potential_hook(PotentialHook hook) { hook_ = std::move(hook); }
  StepDiagnostics step(SwarmState& swarm) { return full_step(swarm, potential_, config_, params_, hook_); }

  const ValidatedConfig& config() const { return config_; }
  const SwarmParams& params() const { return params_; }
  SwarmParams& params() { return params_; }
  const Potential& potential() const { return potential_; }
  Potential& potential() { return potential_; }

 private:
  ValidatedConfig config_;
  SwarmParams params_;
  Potential potential_;
  PotentialHook hook_;
};

/// Initial swarm drawn from a probability density on the grid: multinomial
/// cell counts, uniform jitter inside each cell. If `phase_velocity` is given,
/// each cell receives net movers so its mean impulse matches
/// m n(r) v(r) under stochastic rounding; otherwise every sample is at rest.
SwarmState sample_initial_swarm(const ScalarField& density0, const VectorField* phase_velocity,
                                std::uint64_t n, double c, std::uint64_t seed);

}  // namespace ddswarm
