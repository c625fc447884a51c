#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "ddswarm/units.hpp"

namespace ddswarm {

/// Contents of a `key = value` configuration file before validation.
struct RawConfig {
  PhysicalConfig physics;
  GridSpec grid;
  std::uint64_t seed = 0;
};

/// Recognised keys: h, mass, charge, c, n_samples, dx, dt, extent_x,
/// extent_y, extent_z, dims, boundary, seed. `#` starts a comment.
/// Unknown keys and malformed lines raise InvalidConfig.
RawConfig parse_config_text(const std::string& text);
RawConfig parse_config_file(const std::filesystem::path& path);

std::string format_config(const RawConfig& config);

}  // namespace ddswarm
