#include "ddswarm/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

#include "ddswarm/continuum.hpp"
#include "ddswarm/error.hpp"
#include "ddswarm/io.hpp"
#include "ddswarm/phase.hpp"

namespace ddswarm {

using json = nlohmann::json;

unsigned parse_layers(const std::string& text) {
  unsigned out = 0;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "swarm") out |= kLayerSwarm;
    else if (item == "continuum") out |= kLayerContinuum;
    else if (item == "reference") out |= kLayerReference;
    else if (!item.empty()) throw Error(ErrorCode::InvalidConfig, "unknown layer " + item);
  }
  if (out == 0) throw Error(ErrorCode::InvalidConfig, "no layers selected");
  return out;
}

std::string layers_to_string(unsigned layers) {
  std::string s;
  auto add = [&](unsigned bit, const char* name) {
    if (!(layers & bit)) return;
    if (!s.empty()) s += ',';
    s += name;
  };
  add(kLayerSwarm, "swarm");
  add(kLayerContinuum, "continuum");
  add(kLayerReference, "reference");
  return s;
}

StatisticalFloor statistical_floor(const std::vector<double>& probabilities, std::uint64_t n_samples,
                                   std::uint64_t seed, int replicates) {
  StatisticalFloor f;
  if (n_samples == 0) throw Error(ErrorCode::InvalidConfig, "statistical floor needs samples");
  double total = 0.0;
  for (double p : probabilities) total += p;
  const double n = static_cast<double>(n_samples);
  for (double p : probabilities) {
    const double q = p / total;
    f.closed_form += std::sqrt(q * (1.0 - q) / n);
  }
  f.closed_form *= std::sqrt(2.0 / std::numbers::pi);

  if (replicates <= 0) return f;
  std::mt19937_64 gen(mix64(seed ^ kStreamBootstrap));
  double acc = 0.0;
  for (int r = 0; r < replicates; ++r) {
    std::uint64_t left = n_samples;
    double mass_left = total;
    double l1 = 0.0;
    for (double p : probabilities) {
      std::uint64_t k = 0;
      if (left > 0 && p > 0.0) {
        const double q = std::clamp(p / mass_left, 0.0, 1.0);
        k = q >= 1.0 ? left : std::binomial_distribution<std::uint64_t>(left, q)(gen);
      }
      left -= k;
      mass_left -= p;
      l1 += std::abs(static_cast<double>(k) / n - p / total);
    }
    acc += l1;
  }
  f.bootstrap = acc / replicates;
  return f;
}

StatisticalFloor statistical_floor_uniform(std::uint64_t n_samples, std::size_t occupied_cells,
                                           std::uint64_t seed, int replicates) {
  return statistical_floor(std::vector<double>(occupied_cells, 1.0), n_samples, seed, replicates);
}

double l1_distance(const std::vector<double>& a, const std::vector<double>& b, double volume) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s * volume;
}

double l2_distance(const std::vector<double>& a, const std::vector<double>& b, double volume) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s * volume);
}

namespace {

json vec3(const std::array<double, 3>& v) { return json::array({v[0], v[1], v[2]}); }

json record_json(const ObservableRecord& r) {
  return {{"time", r.time},       {"impulse", vec3(r.impulse)},   {"kinetic", r.kinetic},
          {"potential", r.potential}, {"angular", vec3(r.angular)}, {"mean_position", vec3(r.mean_position)}};
}

template <typename T>
void put_opt(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

json frame_json(const FrameMetrics& f) {
  json j = {{"index", f.index}, {"time", f.time}, {"step", f.step}};
  put_opt(j, "swarm_reference_l1", f.swarm_reference_l1);
  put_opt(j, "swarm_reference_l2", f.swarm_reference_l2);
  put_opt(j, "swarm_initial_l1", f.swarm_initial_l1);
  put_opt(j, "continuum_reference_l1", f.continuum_reference_l1);
  if (f.swarm_reference_l1 || f.swarm_initial_l1)
    j["floor"] = {{"closed_form", f.floor.closed_form}, {"bootstrap", f.floor.bootstrap}};
  if (f.swarm) j["swarm"] = record_json(*f.swarm);
  if (f.reference) j["reference"] = record_json(*f.reference);
  put_opt(j, "moving_fraction", f.moving_fraction);
  put_opt(j, "reference_norm", f.reference_norm);
  put_opt(j, "continuum_mass", f.continuum_mass);
  put_opt(j, "phase_clipped_links", f.phase_clipped_links);
  return j;
}

json grid_json(const GridSpec& g) {
  return {{"dx", g.dx},
          {"dt", g.dt},
          {"extent", {g.extent[0], g.extent[1], g.extent[2]}},
          {"boundary", to_string(g.boundary)},
          {"dims", g.dims}};
}

json physics_json(const PhysicalConfig& p) {
  return {{"h", p.h}, {"mass", p.mass}, {"charge", p.charge}, {"c", p.c}, {"n_samples", p.n_samples}, {"dims", p.dims}};
}

std::string frame_name(const char* layer, std::size_t index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "frames/%s_%05zu.csv", layer, index);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double moving_fraction_of(const std::vector<CellStats>& stats) {
  std::uint64_t n = 0, zero = 0;
  for (const auto& st : stats) {
    n += st.n;
    zero += st.n_zero;
  }
  return n ? 1.0 - static_cast<double>(zero) / static_cast<double>(n) : 0.0;
}

std::array<std::int64_t, 3> net_counts(const std::vector<CellStats>& stats) {
  std::array<std::int64_t, 3> net{0, 0, 0};
  for (const auto& st : stats)
    for (int a = 0; a < 3; ++a) net[a] += st.net(a);
  return net;
}

}  // namespace

RunReport run_scenario(const Scenario& scenario, const ValidatedConfig& config, const RunOptions& options) {
  const auto t_start = std::chrono::steady_clock::now();
  check_scenario(scenario, config);
  const GridSpec& g = config.grid;
  const PhysicalConfig& phys = config.physics;
  const double vol = g.cell_volume();
  const bool use_swarm = options.layers & kLayerSwarm;
  const bool use_cont = options.layers & kLayerContinuum;
  const bool use_ref = options.layers & kLayerReference;
  const bool writing = !options.out_dir.empty();

  RunReport rep;
  rep.scenario = scenario.name;
  rep.layers = options.layers;
  rep.seed = options.seed;
  rep.n_samples = phys.n_samples;
  rep.warnings = config.warnings;
  rep.sound_speed_sq = scenario_sound_speed_sq(scenario, config);

  const WaveField psi0 = initial_wave(scenario, config);
  const DensityField rho0 = psi0.density();
  const ImpulseField p0 = wave_impulse(psi0, phys);
  ScalarField v_now = potential_at(scenario.potential, g, 0.0);
  const bool static_v = potential_is_static(scenario.potential);

  // Swarm layer.
  std::optional<SwarmState> swarm;
  std::optional<SwarmEngine> engine;
  if (use_swarm) {
    if (scenario.moving_ratio) {
      rep.moving_ratio = *scenario.moving_ratio;
    } else {
      CalibrationOptions copt;
      copt.target_sound_speed_sq = rep.sound_speed_sq;
      copt.refine = options.refine_calibration;
      copt.rounding = options.rounding;
      copt.workers = options.workers;
      rep.calibration = calibrate_diffusion(config, copt);
      rep.moving_ratio = rep.calibration->moving_ratio;
      for (const auto& w : rep.calibration->warnings) rep.warnings.push_back(w);
    }
    VectorField velocity(g);
    for (std::size_t i = 0; i < rho0.rho.size(); ++i)
      if (rho0.rho[i] > 0.0)
        for (int a = 0; a < g.dims; ++a) velocity.v[a][i] = p0.v[a][i] / (phys.mass * rho0.rho[i]);
    swarm = sample_initial_swarm(rho0.rho, &velocity, phys.n_samples, phys.c, options.seed);
    SwarmParams params;
    params.moving_ratio = rep.moving_ratio;
    params.rounding = options.rounding;
    params.workers = options.workers;
    engine.emplace(config, params, Potential(v_now));
    if (!static_v) {
      const PotentialSpec spec = scenario.potential;
      const double dt = g.dt;
      engine->set_potential_hook([spec, dt](const SwarmState& s, Potential& v) {
        v.values = potential_at(spec, v.values.grid, s.time + dt);
        v.refresh();
      });
    }
    if (options.write_phase) rep.k_cal = calibrate_k(phys, g, 0.2 / g.dx).k_cal;
  }

  // Continuum layer.
  std::optional<ContinuumState> cont;
  ContinuumCoefficients ccoef = ContinuumCoefficients::isothermal(rep.sound_speed_sq, phys, scenario.inertia);
  Potential cont_v(v_now);
  int cont_substeps = 1;
  if (use_cont) {
    cont = ContinuumState{rho0, wave_face_impulse(psi0, phys), 0.0};
    cont_substeps = std::max(1, static_cast<int>(std::ceil(g.dt / continuum_stable_dt(g, ccoef, 0.5))));
  }

  // Reference layer.
  std::optional<WaveField> psi;
  std::optional<SchrodingerSolver> solver;
  if (use_ref) {
    psi = psi0;
    solver.emplace(g, phys, static_v ? v_now : potential_at(scenario.potential, g, 0.5 * g.dt), g.dt);
  }

  const auto frame_steps = static_cast<std::uint64_t>(std::llround(scenario.frame_interval / g.dt));
  const auto total_steps = static_cast<std::uint64_t>(std::llround(scenario.duration / g.dt));
  const double norm0 = psi0.norm();
  const double mass0 = total_mass(rho0);
  std::vector<double> initial_probs(rho0.rho.v);
  for (double& p : initial_probs) p *= vol;
  const StatisticalFloor initial_floor =
      use_swarm ? statistical_floor(initial_probs, phys.n_samples, options.seed, options.bootstrap_replicates)
                : StatisticalFloor{};
  std::uint64_t count0 = 0;
  std::array<std::int64_t, 3> net0{0, 0, 0};

  json manifest = {{"scenario", scenario.name},
                   {"seed", options.seed},
                   {"layers", layers_to_string(options.layers)},
                   {"grid", grid_json(g)},
                   {"physics", physics_json(phys)},
                   {"moving_ratio", rep.moving_ratio},
                   {"sound_speed_sq", rep.sound_speed_sq},
                   {"frames", json::array()}};
  std::string metrics_lines;

  auto record_frame = [&](std::size_t index, std::uint64_t step) {
    FrameMetrics fm;
    fm.index = index;
    fm.step = step;
    fm.time = static_cast<double>(step) * g.dt;
    json files = json::object();
    std::optional<DensityField> ref_rho;
    if (psi) {
      ref_rho = psi->density();
      fm.reference_norm = psi->norm();
      ObservableRecord r = observe_wave(*psi, phys, v_now, scenario.potential.center);
      r.time = fm.time;
      fm.reference = r;
      rep.norm_drift = std::max(rep.norm_drift, std::abs(*fm.reference_norm - norm0) / norm0);
      if (writing) {
        const std::string name = frame_name("reference", index);
        write_wave_frame(options.out_dir / name, *psi);
        files["reference"] = name;
      }
    }
    if (swarm) {
      const auto stats = bin_samples(*swarm, g);
      const SwarmDensity dens = density(stats, g);
      fm.moving_fraction = moving_fraction_of(stats);
      ObservableRecord r = observe_swarm(*swarm, g, phys, v_now, scenario.potential.center);
      fm.swarm = r;
      if (step == 0) {
        count0 = dens.total;
        net0 = net_counts(stats);
      }
      rep.count_error = std::max<std::uint64_t>(rep.count_error, dens.total > count0 ? dens.total - count0 : count0 - dens.total);
      const auto net = net_counts(stats);
      for (int a = 0; a < 3; ++a) rep.impulse_count_error[a] = net[a] - net0[a];

      fm.swarm_initial_l1 = l1_distance(dens.normalized.rho.v, rho0.rho.v, vol);
      if (ref_rho) {
        fm.swarm_reference_l1 = l1_distance(dens.normalized.rho.v, ref_rho->rho.v, vol);
        fm.swarm_reference_l2 = l2_distance(dens.normalized.rho.v, ref_rho->rho.v, vol);
        std::vector<double> probs(ref_rho->rho.v);
        for (double& p : probs) p *= vol;
        fm.floor = statistical_floor(probs, phys.n_samples, options.seed + index, options.bootstrap_replicates);
        rep.max_floor_ratio = std::max(rep.max_floor_ratio, *fm.swarm_reference_l1 / fm.floor.closed_form);
      } else {
        fm.floor = initial_floor;
        rep.max_floor_ratio = std::max(rep.max_floor_ratio, *fm.swarm_initial_l1 / fm.floor.closed_form);
      }
      if (writing) {
        const std::string name = frame_name("swarm", index);
        write_density_frame(options.out_dir / name, stats, g);
        files["swarm"] = name;
        if (options.write_samples) {
          const std::string sname = frame_name("samples", index);
          write_samples(options.out_dir / sname, *swarm);
          files["samples"] = sname;
        }
      }
      if (options.write_phase) {
        const ImpulseField p = impulse_density(stats, g, phys);
        const auto peak = std::max_element(dens.normalized.rho.v.begin(), dens.normalized.rho.v.end());
        const PhaseField phase =
            reconstruct_phase(dens.normalized, p, static_cast<std::size_t>(peak - dens.normalized.rho.v.begin()),
                              rep.k_cal, node_floor(phys.n_samples, g));
        fm.phase_clipped_links = phase.clipped_links;
        if (writing) {
          const std::string name = frame_name("phase", index);
          write_phase_frame(options.out_dir / name, phase);
          files["phase"] = name;
        }
      }
    }
    if (cont) {
      fm.continuum_mass = total_mass(cont->rho);
      rep.mass_drift = std::max(rep.mass_drift, std::abs(*fm.continuum_mass - mass0) / mass0);
      if (ref_rho) fm.continuum_reference_l1 = l1_distance(cont->rho.rho.v, ref_rho->rho.v, vol);
      if (writing) {
        const std::string name = frame_name("continuum", index);
        write_continuum_frame(options.out_dir / name, cont->rho, cell_impulse(cont->p));
        files["continuum"] = name;
      }
    }
    manifest["frames"].push_back({{"index", index}, {"time", fm.time}, {"files", files}});
    metrics_lines += frame_json(fm).dump() + "\n";
    rep.frames.push_back(std::move(fm));
  };

  record_frame(0, 0);
  std::size_t frame_index = 1;
  for (std::uint64_t step = 1; step <= total_steps; ++step) {
    const double t_prev = static_cast<double>(step - 1) * g.dt;
    if (swarm) {
      const auto t0 = std::chrono::steady_clock::now();
      engine->step(*swarm);
      rep.swarm_seconds += seconds_since(t0);
      rep.sample_steps += static_cast<double>(swarm->size());
    }
    if (cont) {
      if (!static_v) {
        cont_v.values = potential_at(scenario.potential, g, t_prev + 0.5 * g.dt);
        cont_v.refresh();
      }
      const double h = g.dt / cont_substeps;
      for (int k = 0; k < cont_substeps; ++k) continuum_step(*cont, cont_v, ccoef, h);
    }
    if (psi) {
      if (!static_v) solver->set_potential(potential_at(scenario.potential, g, t_prev + 0.5 * g.dt));
      solver->step(*psi);
    }
    if (!static_v) v_now = potential_at(scenario.potential, g, static_cast<double>(step) * g.dt);
    if (step % frame_steps == 0 || step == total_steps) record_frame(frame_index++, step);
  }

  rep.agreement = use_swarm && rep.max_floor_ratio <= 3.0;
  rep.wall_seconds = seconds_since(t_start);
  rep.throughput = rep.swarm_seconds > 0 ? rep.sample_steps / rep.swarm_seconds : 0.0;

  if (writing) {
    write_text(options.out_dir / "manifest.json", manifest.dump(2) + "\n");
    write_text(options.out_dir / "metrics.jsonl", metrics_lines);
    write_text(options.out_dir / "report.json", report_json(rep, false) + "\n");
    json timing = {{"wall_seconds", rep.wall_seconds},
                   {"swarm_seconds", rep.swarm_seconds},
                   {"sample_steps", rep.sample_steps},
                   {"throughput", rep.throughput},
                   {"workers", options.workers}};
    write_text(options.out_dir / "timing.json", timing.dump(2) + "\n");
  }
  return rep;
}

std::string report_json(const RunReport& r, bool include_timing) {
  json j = {{"scenario", r.scenario},
            {"layers", layers_to_string(r.layers)},
            {"seed", r.seed},
            {"n_samples", r.n_samples},
            {"moving_ratio", r.moving_ratio},
            {"sound_speed_sq", r.sound_speed_sq},
            {"k_cal", r.k_cal},
            {"max_floor_ratio", r.max_floor_ratio},
            {"agreement", r.agreement},
            {"conservation",
             {{"count_error", r.count_error},
              {"impulse_count_error", {r.impulse_count_error[0], r.impulse_count_error[1], r.impulse_count_error[2]}},
              {"norm_drift", r.norm_drift},
              {"mass_drift", r.mass_drift}}},
            {"warnings", r.warnings},
            {"frames", json::array()}};
  if (r.calibration) {
    const auto& c = *r.calibration;
    j["calibration"] = {{"moving_ratio", c.moving_ratio},
                        {"analytic_ratio", c.analytic_ratio},
                        {"measured_sound_speed_sq", c.measured_sound_speed_sq},
                        {"residual", c.residual},
                        {"iterations", c.iterations},
                        {"clipped", c.clipped}};
  }
  for (const auto& f : r.frames) j["frames"].push_back(frame_json(f));
  if (include_timing)
    j["timing"] = {{"wall_seconds", r.wall_seconds},
                   {"swarm_seconds", r.swarm_seconds},
                   {"sample_steps", r.sample_steps},
                   {"throughput", r.throughput}};
  return j.dump(2);
}

SweepReport grain_sweep(const Scenario& scenario, const std::vector<double>& grains,
                        const ValidatedConfig& base, const RunOptions& options) {
  if (grains.size() < 2) throw Error(ErrorCode::InvalidConfig, "a sweep needs at least two grains");
  SweepReport rep;
  for (std::size_t i = 0; i < grains.size(); ++i) {
    const double dx = grains[i];
    GridSpec g = base.grid;
    PhysicalConfig p = base.physics;
    g.dx = dx;
    p.c = base.physics.c * dx / base.grid.dx;
    for (int a = 0; a < g.dims; ++a)
      g.extent[a] = std::max(2, static_cast<int>(std::lround(base.grid.length(a) / dx)));
    const ValidatedConfig cfg = validate(p, g, base.seed);
    Scenario s = scenario;
    s.moving_ratio.reset();
    RunOptions o = options;
    if (!options.out_dir.empty()) o.out_dir = options.out_dir / ("grain_" + std::to_string(i));
    const RunReport run = run_scenario(s, cfg, o);

    SweepEntry e;
    e.dx = dx;
    e.c = p.c;
    e.dt = g.dt;
    e.extent = g.extent;
    e.coefficients = cfg.coefficients();
    e.moving_ratio = run.moving_ratio;
    e.moving_fraction = moving_fraction(run.moving_ratio);
    e.k_cal = run.k_cal;
    e.max_floor_ratio = run.max_floor_ratio;
    for (const auto& f : run.frames) {
      const auto l1 = f.swarm_reference_l1 ? f.swarm_reference_l1 : f.swarm_initial_l1;
      if (l1) e.max_l1 = std::max(e.max_l1, *l1);
    }
    rep.entries.push_back(e);
  }
  std::vector<SweepEntry> by_grain = rep.entries;
  std::sort(by_grain.begin(), by_grain.end(), [](const auto& a, const auto& b) { return a.dx > b.dx; });
  rep.moving_fraction_increases = true;
  for (std::size_t i = 1; i < by_grain.size(); ++i)
    if (!(by_grain[i].moving_fraction > by_grain[i - 1].moving_fraction)) rep.moving_fraction_increases = false;
  return rep;
}

std::string sweep_json(const SweepReport& r) {
  json j = {{"moving_fraction_increases", r.moving_fraction_increases}, {"entries", json::array()}};
  for (const auto& e : r.entries) {
    j["entries"].push_back({{"dx", e.dx},
                            {"c", e.c},
                            {"dt", e.dt},
                            {"extent", {e.extent[0], e.extent[1], e.extent[2]}},
                            {"intensity", e.coefficients.intensity},
                            {"kappa", e.coefficients.kappa},
                            {"gamma", e.coefficients.gamma},
                            {"alpha", e.coefficients.alpha},
                            {"moving_ratio", e.moving_ratio},
                            {"moving_fraction", e.moving_fraction},
                            {"k_cal", e.k_cal},
                            {"max_l1", e.max_l1},
                            {"max_floor_ratio", e.max_floor_ratio}});
  }
  return j.dump(2);
}

}  // namespace ddswarm
