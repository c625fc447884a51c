#include "ddswarm/io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ddswarm/error.hpp"

namespace ddswarm {

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

// from_chars, unlike stod, accepts subnormals.
double to_double(const std::string& text) {
  double x = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
  if (ec != std::errc{} || ptr != text.data() + text.size()) throw std::invalid_argument(text);
  return x;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

void coords(std::ostream& os, const GridSpec& g, std::size_t i) {
  const CellIndex3 c = cell_coords(g, i);
  os << c[0] << ',' << c[1] << ',' << c[2];
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    rows.push_back(std::move(cols));
  }
  return rows;
}

std::size_t row_cell(const std::vector<std::string>& row, const GridSpec& g,
                     const std::filesystem::path& path) {
  try {
    CellIndex3 c{std::stoi(row.at(0)), std::stoi(row.at(1)), std::stoi(row.at(2))};
    for (int a = 0; a < 3; ++a)
      if (c[a] < 0 || c[a] >= g.extent[a]) throw std::out_of_range("cell");
    return linear_index(g, c);
  } catch (const std::exception&) {
    throw Error(ErrorCode::ScenarioGridMismatch, path.string() + ": row outside the grid");
  }
}

}  // namespace

void write_density_frame(const std::filesystem::path& path, const std::vector<CellStats>& stats,
                         const GridSpec& grid) {
  auto out = open_out(path);
  out << "ix,iy,iz,count,rho\n";
  const double vol = grid.cell_volume();
  for (std::size_t i = 0; i < stats.size(); ++i) {
    coords(out, grid, i);
    out << ',' << stats[i].n << ',' << format_double(stats[i].n / vol) << '\n';
  }
}

void write_continuum_frame(const std::filesystem::path& path, const DensityField& rho,
                           const ImpulseField& p) {
  auto out = open_out(path);
  out << "ix,iy,iz,rho,px,py,pz\n";
  const GridSpec& g = rho.rho.grid;
  for (std::size_t i = 0; i < rho.rho.size(); ++i) {
    coords(out, g, i);
    out << ',' << format_double(rho.rho[i]);
    for (int a = 0; a < 3; ++a) out << ',' << format_double(p.v[a][i]);
    out << '\n';
  }
}

void write_wave_frame(const std::filesystem::path& path, const WaveField& psi) {
  auto out = open_out(path);
  out << "ix,iy,iz,psi_r,psi_i,rho\n";
  for (std::size_t i = 0; i < psi.size(); ++i) {
    coords(out, psi.grid, i);
    const double r = psi.psi_r[i], im = psi.psi_i[i];
    out << ',' << format_double(r) << ',' << format_double(im) << ',' << format_double(r * r + im * im)
        << '\n';
  }
}

void write_phase_frame(const std::filesystem::path& path, const PhaseField& phase) {
  auto out = open_out(path);
  out << "ix,iy,iz,phi,defined_flag\n";
  for (std::size_t i = 0; i < phase.phi.size(); ++i) {
    coords(out, phase.grid, i);
    out << ',' << format_double(phase.phi[i]) << ',' << int(phase.defined[i]) << '\n';
  }
}

void write_samples(const std::filesystem::path& path, const SwarmState& swarm) {
  auto out = open_out(path);
  out << "id,x,y,z,speed_tag\n";
  for (std::size_t i = 0; i < swarm.size(); ++i) {
    out << swarm.id[i];
    for (int a = 0; a < 3; ++a) out << ',' << format_double(swarm.pos[a].empty() ? 0.0 : swarm.pos[a][i]);
    out << ',' << to_string(swarm.speed[i]) << '\n';
  }
}

WaveField read_wave_frame(const std::filesystem::path& path, const GridSpec& grid) {
  WaveField psi(grid);
  for (const auto& row : read_csv(path)) {
    const std::size_t i = row_cell(row, grid, path);
    try {
      psi.psi_r[i] = to_double(row.at(3));
      psi.psi_i[i] = to_double(row.at(4));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidConfig, path.string() + ": malformed wave row");
    }
  }
  psi.normalize();
  return psi;
}

ScalarField read_scalar_table(const std::filesystem::path& path, const GridSpec& grid) {
  ScalarField f(grid);
  for (const auto& row : read_csv(path)) {
    const std::size_t i = row_cell(row, grid, path);
    try {
      f[i] = to_double(row.at(3));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidConfig, path.string() + ": malformed value row");
    }
  }
  return f;
}

namespace {

constexpr char kMagic[8] = {'D', 'D', 'S', 'W', 'C', 'K', 'P', 'T'};

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
void get(std::istream& is, T& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw Error(ErrorCode::Io, "truncated checkpoint");
}

template <typename T>
void put_vec(std::ostream& os, const std::vector<T>& v) {
  put<std::uint64_t>(os, v.size());
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
void get_vec(std::istream& is, std::vector<T>& v) {
  std::uint64_t n = 0;
  get(is, n);
  v.resize(n);
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
  if (!is) throw Error(ErrorCode::Io, "truncated checkpoint");
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const SwarmState& swarm) {
  auto out = open_out(path);
  out.write(kMagic, sizeof kMagic);
  put(out, kCheckpointVersion);
  put(out, swarm.time);
  put(out, swarm.step);
  put(out, swarm.seed);
  for (const auto& p : swarm.pos) put_vec(out, p);
  put_vec(out, swarm.speed);
  put_vec(out, swarm.id);
  put_vec(out, swarm.cell_start);
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

SwarmState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw Error(ErrorCode::Io, path.string() + " is not a checkpoint");
  std::uint32_t version = 0;
  get(in, version);
  if (version != kCheckpointVersion)
    throw Error(ErrorCode::Io, "unsupported checkpoint version " + std::to_string(version));
  SwarmState s;
  get(in, s.time);
  get(in, s.step);
  get(in, s.seed);
  for (auto& p : s.pos) get_vec(in, p);
  get_vec(in, s.speed);
  get_vec(in, s.id);
  get_vec(in, s.cell_start);
  return s;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ddswarm
