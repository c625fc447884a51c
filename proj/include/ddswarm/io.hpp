#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ddswarm/continuum.hpp"
#include "ddswarm/phase.hpp"
#include "ddswarm/quantum.hpp"
#include "ddswarm/swarm.hpp"

namespace ddswarm {

/// Shortest round-trip decimal form of a double.
std::string format_double(double x);

/// `ix,iy,iz,count,rho` with rho the unnormalised sample density.
void write_density_frame(const std::filesystem::path& path, const std::vector<CellStats>& stats,
                         const GridSpec& grid);
/// `ix,iy,iz,rho,px,py,pz`
void write_continuum_frame(const std::filesystem::path& path, const DensityField& rho,
                           const ImpulseField& p);
/// `ix,iy,iz,psi_r,psi_i,rho`
void write_wave_frame(const std::filesystem::path& path, const WaveField& psi);
/// `ix,iy,iz,phi,defined_flag`
void write_phase_frame(const std::filesystem::path& path, const PhaseField& phase);
/// `id,x,y,z,speed_tag`
void write_samples(const std::filesystem::path& path, const SwarmState& swarm);

/// Reads a `ix,iy,iz,psi_r,psi_i[,rho]` table into a wave field on `grid`.
WaveField read_wave_frame(const std::filesystem::path& path, const GridSpec& grid);
/// Reads `ix,iy,iz,V` into a scalar field on `grid`.
ScalarField read_scalar_table(const std::filesystem::path& path, const GridSpec& grid);

/// Binary checkpoint: magic, format version, then the full swarm state.
void save_checkpoint(const std::filesystem::path& path, const SwarmState& swarm);
SwarmState load_checkpoint(const std::filesystem::path& path);

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace ddswarm
