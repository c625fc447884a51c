#include "ddswarm/config_file.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ddswarm/error.hpp"

namespace ddswarm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_line(int line_no, const std::string& msg) {
  std::ostringstream os;
  os << "line " << line_no << ": " << msg;
  throw Error(ErrorCode::InvalidConfig, os.str());
}

double parse_double(const std::string& v, int line_no) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) bad_line(line_no, "trailing characters in number '" + v + "'");
    return x;
  } catch (const std::logic_error&) {
    bad_line(line_no, "not a number: '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& v, int line_no) {
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    // Accept integral values written in floating notation, e.g. 1e6.
    const double d = parse_double(v, line_no);
    if (d < 0 || d != static_cast<double>(static_cast<std::uint64_t>(d)))
      bad_line(line_no, "not a non-negative integer: '" + v + "'");
    return static_cast<std::uint64_t>(d);
  }
  return x;
}

int parse_int(const std::string& v, int line_no) {
  const std::uint64_t x = parse_u64(v, line_no);
  if (x > 1u << 30) bad_line(line_no, "integer out of range: '" + v + "'");
  return static_cast<int>(x);
}

}  // namespace

RawConfig parse_config_text(const std::string& text) {
  RawConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) bad_line(line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty()) bad_line(line_no, "empty value for '" + key + "'");

    if (key == "h") cfg.physics.h = parse_double(value, line_no);
    else if (key == "mass") cfg.physics.mass = parse_double(value, line_no);
    else if (key == "charge") cfg.physics.charge = parse_double(value, line_no);
    else if (key == "c") cfg.physics.c = parse_double(value, line_no);
    else if (key == "n_samples") cfg.physics.n_samples = parse_u64(value, line_no);
    else if (key == "dx") cfg.grid.dx = parse_double(value, line_no);
    else if (key == "dt") cfg.grid.dt = parse_double(value, line_no);
    else if (key == "extent_x") cfg.grid.extent[0] = parse_int(value, line_no);
    else if (key == "extent_y") cfg.grid.extent[1] = parse_int(value, line_no);
    else if (key == "extent_z") cfg.grid.extent[2] = parse_int(value, line_no);
    else if (key == "dims") cfg.physics.dims = parse_int(value, line_no);
    else if (key == "seed") cfg.seed = parse_u64(value, line_no);
    else if (key == "boundary") {
      if (value == "periodic") cfg.grid.boundary = Boundary::Periodic;
      else if (value == "reflecting") cfg.grid.boundary = Boundary::Reflecting;
      else bad_line(line_no, "boundary must be 'periodic' or 'reflecting'");
    } else {
      bad_line(line_no, "unknown key '" + key + "'");
    }
  }
  cfg.grid.dims = cfg.physics.dims;
  // Unused axes collapse to a single cell.
  for (int a = std::max(cfg.grid.dims, 1); a < 3; ++a) cfg.grid.extent[a] = 1;
  return cfg;
}

RawConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string format_config(const RawConfig& config) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "h = " << config.physics.h << "\n"
     << "mass = " << config.physics.mass << "\n"
     << "charge = " << config.physics.charge << "\n"
     << "c = " << config.physics.c << "\n"
     << "n_samples = " << config.physics.n_samples << "\n"
     << "dx = " << config.grid.dx << "\n"
     << "dt = " << config.grid.dt << "\n"
     << "extent_x = " << config.grid.extent[0] << "\n"
     << "extent_y = " << config.grid.extent[1] << "\n"
     << "extent_z = " << config.grid.extent[2] << "\n"
     << "dims = " << config.physics.dims << "\n"
     << "boundary = " << to_string(config.grid.boundary) << "\n"
     << "seed = " << config.seed << "\n";
  return os.str();
}

}  // namespace ddswarm
