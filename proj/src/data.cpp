// Copyright 2026 The LatentLens Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "latentlens/data.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "bytes.hpp"
#include "json_util.hpp"
#include "latentlens/error.hpp"

namespace latentlens {
namespace {

using detail::json;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_nyquist(double highest, double sample_rate, const std::string& what) {
  if (!(highest < 0.5 * sample_rate)) {
    throw ContractViolation(what + ": highest frequency St=" + std::to_string(highest) +
                            " is not below the Nyquist frequency " +
                            std::to_string(0.5 * sample_rate));
  }
}

// Modified Gram-Schmidt in the Euclidean inner product, in column order.
void orthonormalize(Matrix& patterns) {
  for (Eigen::Index k = 0; k < patterns.cols(); ++k) {
    for (Eigen::Index j = 0; j < k; ++j) {
      patterns.col(k) -= patterns.col(j).dot(patterns.col(k)) * patterns.col(j);
    }
    const double norm = patterns.col(k).norm();
    if (norm < 1e-12) throw ContractViolation("generate_laminar: spatial patterns are degenerate on this grid");
    patterns.col(k) /= norm;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Configs

LaminarSurrogateConfig LaminarSurrogateConfig::from_json(std::string_view text) {
  const std::string what = "laminar config";
  const json doc = detail::parse_json(text, what);
  detail::check_keys(doc,
                     {"nx", "ny", "lx", "ly", "n_pairs", "fundamental_st", "energies", "dt", "n_t",
                      "integer_periods", "seed"},
                     {}, what);
  LaminarSurrogateConfig c;
  c.nx = detail::get<std::size_t>(doc, "nx", what);
  c.ny = detail::get<std::size_t>(doc, "ny", what);
  c.lx = detail::get<double>(doc, "lx", what);
  c.ly = detail::get<double>(doc, "ly", what);
  c.n_pairs = detail::get<std::size_t>(doc, "n_pairs", what);
  c.fundamental_st = detail::get<double>(doc, "fundamental_st", what);
  c.energies = detail::get<std::vector<double>>(doc, "energies", what);
  c.dt = detail::get<double>(doc, "dt", what);
  c.n_t = detail::get<std::size_t>(doc, "n_t", what);
  c.integer_periods = detail::get<bool>(doc, "integer_periods", what);
  c.seed = detail::get<std::uint64_t>(doc, "seed", what);
  return c;
}

std::string LaminarSurrogateConfig::to_json() const {
  json doc{{"nx", nx},
           {"ny", ny},
           {"lx", lx},
           {"ly", ly},
           {"n_pairs", n_pairs},
           {"fundamental_st", fundamental_st},
           {"energies", energies},
           {"dt", dt},
           {"n_t", n_t},
           {"integer_periods", integer_periods},
           {"seed", seed}};
  return doc.dump(2);
}

void LaminarSurrogateConfig::validate() const {
  require(nx >= 2 && ny >= 2, "laminar config: grid must be at least 2x2");
  require(lx > 0 && ly > 0, "laminar config: domain extents must be positive");
  require(n_pairs >= 1, "laminar config: n_pairs must be at least 1");
  require(2 * n_pairs <= nx * ny, "laminar config: more modes than grid points");
  require(energies.size() == n_pairs, "laminar config: need one energy per pair");
  double sum = 0.0;
  for (std::size_t k = 0; k < energies.size(); ++k) {
    require(energies[k] > 0.0, "laminar config: energies must be positive");
    if (k > 0) require(energies[k] < energies[k - 1], "laminar config: energies must be strictly decreasing");
    sum += energies[k];
  }
  require(sum <= 1.0 + 1e-12, "laminar config: energies must sum to at most 1");
  require(fundamental_st > 0 && dt > 0, "laminar config: frequency and dt must be positive");
  require(n_t >= 2, "laminar config: n_t must be at least 2");
  check_nyquist(static_cast<double>(n_pairs) * fundamental_st, 1.0 / dt, "laminar config");
  if (integer_periods) {
    const double periods = static_cast<double>(n_t) * dt * fundamental_st;
    require(std::abs(periods - std::round(periods)) < 1e-9 && std::round(periods) >= 1.0,
            "laminar config: n_t*dt*fundamental_st = " + std::to_string(periods) +
                " is not an integer number of periods (set integer_periods=false to allow leakage)");
  }
}

TurbulentSurrogateConfig TurbulentSurrogateConfig::from_json(std::string_view text) {
  const std::string what = "turbulent config";
  const json doc = detail::parse_json(text, what);
  detail::check_keys(doc,
                     {"n_radial", "n_azimuthal", "radius", "band_st", "band_energy", "linewidth",
                      "noise_floor", "fs", "n_t", "seed"},
                     {}, what);
  TurbulentSurrogateConfig c;
  c.n_radial = detail::get<std::size_t>(doc, "n_radial", what);
  c.n_azimuthal = detail::get<std::size_t>(doc, "n_azimuthal", what);
  c.radius = detail::get<double>(doc, "radius", what);
  c.band_st = detail::get<std::vector<double>>(doc, "band_st", what);
  c.band_energy = detail::get<std::vector<double>>(doc, "band_energy", what);
  c.linewidth = detail::get<double>(doc, "linewidth", what);
  c.noise_floor = detail::get<double>(doc, "noise_floor", what);
  c.fs = detail::get<double>(doc, "fs", what);
  c.n_t = detail::get<std::size_t>(doc, "n_t", what);
  c.seed = detail::get<std::uint64_t>(doc, "seed", what);
  return c;
}

std::string TurbulentSurrogateConfig::to_json() const {
  json doc{{"n_radial", n_radial},       {"n_azimuthal", n_azimuthal}, {"radius", radius},
           {"band_st", band_st},         {"band_energy", band_energy}, {"linewidth", linewidth},
           {"noise_floor", noise_floor}, {"fs", fs},                   {"n_t", n_t},
           {"seed", seed}};
  return doc.dump(2);
}

void TurbulentSurrogateConfig::validate() const {
  require(n_radial >= 2, "turbulent config: n_radial must be at least 2");
  require(n_azimuthal >= 3, "turbulent config: n_azimuthal must be at least 3");
  require(radius > 0, "turbulent config: radius must be positive");
  require(band_st.size() == 3 && band_energy.size() == 3,
          "turbulent config: band_st and band_energy need exactly 3 entries");
  for (int k = 0; k < 3; ++k) {
    require(band_st[k] > 0, "turbulent config: band frequencies must be positive");
    require(band_energy[k] >= 0, "turbulent config: band energies must be non-negative");
  }
  require(linewidth >= 0 && linewidth < 1, "turbulent config: linewidth must be in [0, 1)");
  require(noise_floor >= 0, "turbulent config: noise_floor must be non-negative");
  require(fs > 0, "turbulent config: fs must be positive");
  require(n_t >= 2, "turbulent config: n_t must be at least 2");
  check_nyquist(std::max({band_st[0], band_st[1], band_st[2]}), fs, "turbulent config");
}

// ---------------------------------------------------------------------------
// Generators

SnapshotMatrix generate_laminar(const LaminarSurrogateConfig& cfg) {
  cfg.validate();
  SeededRng rng(cfg.seed);

  std::vector<double> x(cfg.nx), y(cfg.ny);
  for (std::size_t i = 0; i < cfg.nx; ++i) x[i] = cfg.lx * (static_cast<double>(i) + 0.5) / static_cast<double>(cfg.nx);
  for (std::size_t j = 0; j < cfg.ny; ++j) {
    y[j] = -0.5 * cfg.ly + cfg.ly * (static_cast<double>(j) + 0.5) / static_cast<double>(cfg.ny);
  }

  // Structures convect at 0.8 U, so the wavelength of pair k is
  // 0.8 / (k St); the envelope grows downstream and widens with k.
  const auto n = static_cast<Eigen::Index>(cfg.nx * cfg.ny);
  const auto n_modes = static_cast<Eigen::Index>(2 * cfg.n_pairs);
  Matrix patterns(n, n_modes);
  for (std::size_t k = 1; k <= cfg.n_pairs; ++k) {
    const double wavenumber = kTwoPi * static_cast<double>(k) * cfg.fundamental_st / 0.8;
    const double width = 0.6 + 0.15 * static_cast<double>(k);
    for (std::size_t i = 0; i < cfg.nx; ++i) {
      const double growth = 1.0 - std::exp(-x[i] / 1.2);
      for (std::size_t j = 0; j < cfg.ny; ++j) {
        const double envelope = growth * std::exp(-(y[j] * y[j]) / (width * width));
        const auto row = static_cast<Eigen::Index>(i * cfg.ny + j);
        patterns(row, static_cast<Eigen::Index>(2 * k - 2)) = envelope * std::cos(wavenumber * x[i]);
        patterns(row, static_cast<Eigen::Index>(2 * k - 1)) = envelope * std::sin(wavenumber * x[i]);
      }
    }
  }
  orthonormalize(patterns);

  const auto nt = static_cast<Eigen::Index>(cfg.n_t);
  Matrix coeffs(n_modes, nt);
  for (std::size_t k = 1; k <= cfg.n_pairs; ++k) {
    const double amplitude = std::sqrt(cfg.energies[k - 1]);
    const double phase = kTwoPi * rng.uniform();
    const double omega = kTwoPi * static_cast<double>(k) * cfg.fundamental_st;
    for (Eigen::Index t = 0; t < nt; ++t) {
      const double arg = omega * static_cast<double>(t) * cfg.dt + phase;
      coeffs(static_cast<Eigen::Index>(2 * k - 2), t) = amplitude * std::cos(arg);
      coeffs(static_cast<Eigen::Index>(2 * k - 1), t) = amplitude * std::sin(arg);
    }
  }

  SnapshotMatrix q;
  q.values = patterns * coeffs;
  q.grid = GridMeta::cartesian(std::move(x), std::move(y));
  q.dt = cfg.dt;
  return remove_mean(std::move(q));
}

GridMeta polar_sensor_grid(std::size_t n_radial, std::size_t n_azimuthal, double radius) {
  std::vector<double> r(n_radial), theta(n_azimuthal), area(n_radial * n_azimuthal);
  const double dr = radius / static_cast<double>(n_radial);
  const double dtheta = kTwoPi / static_cast<double>(n_azimuthal);
  for (std::size_t k = 0; k < n_radial; ++k) r[k] = (static_cast<double>(k) + 0.5) * dr;
  for (std::size_t j = 0; j < n_azimuthal; ++j) theta[j] = static_cast<double>(j) * dtheta;
  for (std::size_t k = 0; k < n_radial; ++k) {
    const double outer = static_cast<double>(k + 1) * dr;
    const double inner = static_cast<double>(k) * dr;
    for (std::size_t j = 0; j < n_azimuthal; ++j) {
      area[k * n_azimuthal + j] = 0.5 * dtheta * (outer * outer - inner * inner);
    }
  }
  return GridMeta::polar(std::move(r), std::move(theta), std::move(area));
}

SnapshotMatrix generate_turbulent(const TurbulentSurrogateConfig& cfg) {
  cfg.validate();
  const SeededRng master(cfg.seed);
  GridMeta grid = polar_sensor_grid(cfg.n_radial, cfg.n_azimuthal, cfg.radius);
  const Vector w = grid.weights();
  const auto n = static_cast<Eigen::Index>(grid.point_count());

  // Spatial patterns with unit weighted norm: an m=1 pair growing linearly
  // with radius and an m=0 profile changing sign across the base.
  Matrix patterns(n, 3);
  for (std::size_t k = 0; k < cfg.n_radial; ++k) {
    const double rho = grid.coords[0][k] / cfg.radius;
    for (std::size_t j = 0; j < cfg.n_azimuthal; ++j) {
      const auto row = static_cast<Eigen::Index>(k * cfg.n_azimuthal + j);
      const double th = grid.coords[1][j];
      patterns(row, 0) = rho * std::cos(th);
      patterns(row, 1) = rho * std::sin(th);
      patterns(row, 2) = 1.0 - 2.0 * rho * rho;
    }
  }
  for (Eigen::Index c = 0; c < 3; ++c) {
    patterns.col(c) /= std::sqrt((w.array() * patterns.col(c).array().square()).sum());
  }

  // Phase-diffusing oscillators: a Lorentzian line of half-width
  // linewidth*f needs phase diffusion D = 4*pi*linewidth*f.
  const auto nt = static_cast<Eigen::Index>(cfg.n_t);
  const double dt = 1.0 / cfg.fs;
  auto oscillator = [&](double st, std::uint64_t stream) {
    SeededRng rng = master.split(stream);
    const double diffusion = 2.0 * kTwoPi * cfg.linewidth * st;
    const double step_std = std::sqrt(diffusion * dt);
    std::vector<double> phase(static_cast<std::size_t>(nt));
    double p = kTwoPi * rng.uniform();
    for (auto& value : phase) {
      value = p;
      p += kTwoPi * st * dt + step_std * rng.normal();
    }
    return phase;
  };
  const std::vector<double> plane = oscillator(cfg.band_st[0], 1);
  const std::vector<double> pulsation = oscillator(cfg.band_st[1], 2);
  const std::vector<double> shedding = oscillator(cfg.band_st[2], 3);

  const double asym = std::sqrt(cfg.band_energy[0]);
  const double shed = std::sqrt(2.0 * cfg.band_energy[2]);
  const double pulse = std::sqrt(2.0 * cfg.band_energy[1]);
  Matrix coeffs(3, nt);
  for (Eigen::Index t = 0; t < nt; ++t) {
    const auto s = static_cast<std::size_t>(t);
    const double m1 = asym + shed * std::cos(shedding[s]);
    coeffs(0, t) = m1 * std::cos(plane[s]);
    coeffs(1, t) = m1 * std::sin(plane[s]);
    coeffs(2, t) = pulse * std::cos(pulsation[s]);
  }

  SnapshotMatrix q;
  q.values = patterns * coeffs;
  if (cfg.noise_floor > 0.0) {
    SeededRng noise = master.split(4);
    const double sigma = std::sqrt(cfg.noise_floor / w.sum());
    for (Eigen::Index t = 0; t < nt; ++t) {
      for (Eigen::Index i = 0; i < n; ++i) q.values(i, t) += sigma * noise.normal();
    }
  }
  q.grid = std::move(grid);
  q.dt = dt;
  return remove_mean(std::move(q));
}

// ---------------------------------------------------------------------------
// Pre-processing

SnapshotMatrix remove_mean(SnapshotMatrix q) {
  require(q.nt() >= 2, "remove_mean: need at least 2 snapshots");
  Vector mean = q.values.rowwise().mean();
  q.values.colwise() -= mean;
  if (q.mean) mean += *q.mean;
  q.mean = std::move(mean);
  return q;
}

SnapshotMatrix restore_mean(const SnapshotMatrix& q) {
  SnapshotMatrix out = q;
  if (out.mean) {
    out.values.colwise() += *out.mean;
    out.mean.reset();
  }
  return out;
}

double rms_scale(const Matrix& q) {
  require(q.size() > 0, "rms_scale: empty matrix");
  return std::sqrt(q.squaredNorm() / static_cast<double>(q.size()));
}

// ---------------------------------------------------------------------------
// Binary container

std::size_t dataset_header_size(const GridMeta& grid) {
  std::size_t size = 8 + 4 + 8 + 8 + 8 + 1;
  switch (grid.kind) {
    case GridKind::kCartesian2d:
      size += 16 + 8 * (grid.dims[0] + grid.dims[1]);
      break;
    case GridKind::kPolar:
      size += 16 + 8 * (grid.dims[0] + grid.dims[1] + grid.point_count());
      break;
    case GridKind::kUnstructured:
      break;
  }
  return size;
}

std::vector<std::uint8_t> encode_dataset(const SnapshotMatrix& q) {
  require(q.n() >= 1 && q.nt() >= 1, "save_dataset: snapshot matrix is empty");
  q.grid.validate(q.n());
  detail::ByteWriter w;
  w.raw(kSnapshotMagic, 8);
  w.little<std::uint32_t>(kSnapshotVersion);
  w.little<std::uint64_t>(q.n());
  w.little<std::uint64_t>(q.nt());
  w.little<double>(q.dt);
  w.little<std::uint8_t>(static_cast<std::uint8_t>(q.grid.kind));
  if (q.grid.kind != GridKind::kUnstructured) {
    w.little<std::uint64_t>(q.grid.dims[0]);
    w.little<std::uint64_t>(q.grid.dims[1]);
    w.doubles(q.grid.coords[0].data(), q.grid.coords[0].size());
    w.doubles(q.grid.coords[1].data(), q.grid.coords[1].size());
    if (q.grid.kind == GridKind::kPolar) w.doubles(q.grid.cell_areas.data(), q.grid.cell_areas.size());
  }
  w.doubles(q.values.data(), static_cast<std::size_t>(q.values.size()));
  return w.take();
}

SnapshotMatrix decode_dataset(const std::vector<std::uint8_t>& bytes) {
  detail::ByteReader r(bytes, "dataset");
  r.need(8, "magic");
  if (std::memcmp(bytes.data(), kSnapshotMagic, 8) != 0) {
    throw FormatError("dataset: bad magic at offset 0 (expected AESNAP01)");
  }
  for (int i = 0; i < 8; ++i) r.little<std::uint8_t>("magic");
  const auto version = r.little<std::uint32_t>("version");
  if (version != kSnapshotVersion) {
    throw FormatError("dataset: unsupported version " + std::to_string(version) + " at offset 8");
  }
  const auto n = r.little<std::uint64_t>("N");
  const auto nt = r.little<std::uint64_t>("N_t");
  if (n == 0 || nt == 0) {
    throw FormatError("dataset: empty payload (N=" + std::to_string(n) + ", N_t=" + std::to_string(nt) + ")");
  }
  SnapshotMatrix q;
  q.dt = r.little<double>("dt");
  const auto kind = r.little<std::uint8_t>("grid kind");
  if (kind > 2) throw FormatError("dataset: unknown grid kind " + std::to_string(kind) + " at offset 36");
  q.grid.kind = static_cast<GridKind>(kind);
  if (q.grid.kind == GridKind::kUnstructured) {
    q.grid.dims = {n};
  } else {
    const auto d0 = r.little<std::uint64_t>("grid dims");
    const auto d1 = r.little<std::uint64_t>("grid dims");
    if (d0 == 0 || d1 == 0 || d0 > n || d1 > n) throw FormatError("dataset: implausible grid dimensions");
    q.grid.dims = {d0, d1};
    q.grid.coords = {r.doubles(d0, "grid coordinates"), r.doubles(d1, "grid coordinates")};
    if (q.grid.kind == GridKind::kPolar) q.grid.cell_areas = r.doubles(n, "cell areas");
  }
  q.grid.validate(n);

  if (nt > (std::numeric_limits<std::uint64_t>::max() / 8) / n) throw FormatError("dataset: N*N_t overflows");
  const std::uint64_t payload = n * nt * 8;
  const std::uint64_t expected_end = r.pos() + payload;
  if (bytes.size() < expected_end) {
    throw FormatError("dataset: truncated payload: expected " + std::to_string(expected_end) +
                      " bytes, file ends at offset " + std::to_string(bytes.size()) +
                      " (payload starts at offset " + std::to_string(r.pos()) + ")");
  }
  if (bytes.size() > expected_end) {
    throw FormatError("dataset: " + std::to_string(bytes.size() - expected_end) +
                      " trailing bytes after offset " + std::to_string(expected_end));
  }
  q.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(nt));
  r.doubles_into(q.values.data(), n * nt, "payload");
  return q;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "' for reading");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write to '" + path.string() + "' failed");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::string read_text(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

void save_dataset(const SnapshotMatrix& q, const std::filesystem::path& path) {
  write_file(path, encode_dataset(q));
}

SnapshotMatrix load_dataset(const std::filesystem::path& path) {
  try {
    return decode_dataset(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// CSV

CsvLayout parse_csv_layout(std::string_view text) {
  if (text == "rows=space") return CsvLayout::kRowsAreSpace;
  if (text == "rows=time") return CsvLayout::kRowsAreTime;
  throw ContractViolation("unknown CSV layout '" + std::string(text) + "' (use rows=space or rows=time)");
}

namespace {

// Splits one logical record starting at `pos`; advances `pos` past the line
// terminator. Quoted fields may contain commas, doubled quotes and newlines.
std::vector<std::string> next_record(std::string_view text, std::size_t& pos, std::size_t& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  while (pos < text.size()) {
    const char c = text[pos++];
    if (quoted) {
      if (c == '"') {
        if (pos < text.size() && text[pos] == '"') {
          field.push_back('"');
          ++pos;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\r') {
      // tolerated before '\n'
    } else if (c == '\n') {
      break;
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw FormatError("csv: unterminated quoted field at line " + std::to_string(line));
  fields.push_back(std::move(field));
  return fields;
}

double parse_number(const std::string& cell, std::size_t line, std::size_t column) {
  std::size_t b = 0, e = cell.size();
  while (b < e && (cell[b] == ' ' || cell[b] == '\t')) ++b;
  while (e > b && (cell[e - 1] == ' ' || cell[e - 1] == '\t')) --e;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data() + b, cell.data() + e, value);
  if (b == e || ec != std::errc() || ptr != cell.data() + e) {
    throw FormatError("csv: line " + std::to_string(line) + ", column " + std::to_string(column) +
                      ": '" + cell + "' is not a number");
  }
  return value;
}

}  // namespace

CsvTable parse_csv(std::string_view text, bool has_header) {
  CsvTable table;
  std::vector<std::vector<double>> rows;
  std::size_t pos = 0;
  std::size_t line = 1;
  std::size_t width = 0;
  bool first = true;
  while (pos < text.size()) {
    const std::size_t record_line = line;
    auto fields = next_record(text, pos, line);
    ++line;
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (first && has_header) {
      table.header = std::move(fields);
      width = table.header.size();
      first = false;
      continue;
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw FormatError("csv: ragged row at line " + std::to_string(record_line) + ": expected " +
                        std::to_string(width) + " fields, found " + std::to_string(fields.size()));
    }
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) row[c] = parse_number(fields[c], record_line, c + 1);
    rows.push_back(std::move(row));
    first = false;
  }
  table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path, bool has_header) {
  try {
    return parse_csv(read_text(path), has_header);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string format_csv(const Matrix& values, const std::vector<std::string>& header) {
  std::string out;
  if (!header.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c) out += ',';
      const bool quote = header[c].find_first_of(",\"\n") != std::string::npos;
      if (quote) {
        out += '"';
        for (char ch : header[c]) {
          if (ch == '"') out += '"';
          out += ch;
        }
        out += '"';
      } else {
        out += header[c];
      }
    }
    out += '\n';
  }
  char buf[64];
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      if (c) out += ',';
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), values(r, c));
      out.append(buf, ptr);
    }
    out += '\n';
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const Matrix& values,
               const std::vector<std::string>& header) {
  write_text(path, format_csv(values, header));
}

SnapshotMatrix csv_import(const std::filesystem::path& path, CsvLayout layout, bool has_header,
                          double dt) {
  require(dt > 0, "csv_import: dt must be positive");
  CsvTable table = read_csv(path, has_header);
  SnapshotMatrix q;
  q.values = layout == CsvLayout::kRowsAreSpace ? std::move(table.values)
                                                : Matrix(table.values.transpose());
  if (q.values.size() == 0) throw FormatError(path.string() + ": csv contains no data");
  q.grid = GridMeta::unstructured(q.n());
  q.dt = dt;
  return q;
}

std::vector<std::string> numbered(std::string_view prefix, std::size_t n) {
  std::vector<std::string> names;
  names.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) names.push_back(std::string(prefix) + "_" + std::to_string(i));
  return names;
}

}  // namespace latentlens
