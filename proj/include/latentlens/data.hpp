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

#pragma once

// Surrogate datasets, snapshot persistence and pre-processing.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "latentlens/pod.hpp"

namespace latentlens {

/// Periodic laminar wake: n_pairs travelling-wave mode pairs, pair k
/// oscillating at k * fundamental_st. Spatial patterns are Gaussian-windowed
/// convecting sinusoids orthonormalised on the grid.
struct LaminarSurrogateConfig {
  std::size_t nx = 32;
  std::size_t ny = 16;
  double lx = 4.5;  // streamwise extent, in diameters
  double ly = 5.0;  // cross-stream extent
  std::size_t n_pairs = 3;
  double fundamental_st = 0.23;
  std::vector<double> energies{0.9, 0.07, 0.03};  // per pair, decreasing
  double dt = 0.125;
  std::size_t n_t = 800;
  bool integer_periods = true;  // require n_t * dt * St to be an integer
  std::uint64_t seed = 0;

  /// Every key must be present; unknown keys are rejected.
  static LaminarSurrogateConfig from_json(std::string_view text);
  std::string to_json() const;
  void validate() const;
};

/// Stochastic pressure field on a polar sensor grid. Three narrow bands:
/// band 0 is the drift of the m=1 symmetry plane, band 1 the m=0 pulsation,
/// band 2 the m=1 shedding. Bands 0 and 2 share one antisymmetric mode pair,
/// band 1 drives one axisymmetric mode.
struct TurbulentSurrogateConfig {
  std::size_t n_radial = 8;
  std::size_t n_azimuthal = 8;
  double radius = 0.5;
  std::vector<double> band_st{0.002, 0.06, 0.2};
  std::vector<double> band_energy{0.25, 0.2, 0.45};
  double linewidth = 0.02;    // relative half-width of each band
  double noise_floor = 0.1;   // weighted variance of white sensor noise
  double fs = 1.0;            // samples per unit time
  std::size_t n_t = 16384;
  std::uint64_t seed = 0;

  static TurbulentSurrogateConfig from_json(std::string_view text);
  std::string to_json() const;
  void validate() const;
};

SnapshotMatrix generate_laminar(const LaminarSurrogateConfig& cfg);
SnapshotMatrix generate_turbulent(const TurbulentSurrogateConfig& cfg);

/// Polar sensor grid with annular-sector cells centred on the sensors.
GridMeta polar_sensor_grid(std::size_t n_radial, std::size_t n_azimuthal, double radius);

/// Subtracts the temporal mean of every row and stores it for restore_mean.
SnapshotMatrix remove_mean(SnapshotMatrix q);
SnapshotMatrix restore_mean(const SnapshotMatrix& q);

/// Root-mean-square over all entries; the train-time normalisation scale.
double rms_scale(const Matrix& q);

// ---------------------------------------------------------------------------
// Binary container "AESNAP01" (all integers and floats little-endian):
//   magic[8] | version u32 | N u64 | N_t u64 | dt f64 | grid-kind u8 |
//   grid payload | N*N_t f64, column-major
// Grid payloads:
//   cartesian-2d: nx u64, ny u64, x f64[nx], y f64[ny]
//   polar:        n_r u64, n_theta u64, r f64[n_r], theta f64[n_theta],
//                 cell_area f64[N]
//   unstructured: (empty)

inline constexpr char kSnapshotMagic[8] = {'A', 'E', 'S', 'N', 'A', 'P', '0', '1'};
inline constexpr std::uint32_t kSnapshotVersion = 1;

std::vector<std::uint8_t> encode_dataset(const SnapshotMatrix& q);
SnapshotMatrix decode_dataset(const std::vector<std::uint8_t>& bytes);
/// Size of the header plus grid payload for the given grid.
std::size_t dataset_header_size(const GridMeta& grid);

void save_dataset(const SnapshotMatrix& q, const std::filesystem::path& path);
SnapshotMatrix load_dataset(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// CSV

enum class CsvLayout {
  kRowsAreSpace,  // one row per grid point, one column per snapshot
  kRowsAreTime,   // one row per snapshot
};

CsvLayout parse_csv_layout(std::string_view text);  // "rows=space" | "rows=time"

struct CsvTable {
  std::vector<std::string> header;  // empty if the file had none
  Matrix values;                    // rows x columns as they appear in the file
};

/// RFC-4180 style reader (quoted fields, CRLF tolerated). Ragged rows and
/// non-numeric cells raise FormatError naming the line.
CsvTable read_csv(const std::filesystem::path& path, bool has_header);
CsvTable parse_csv(std::string_view text, bool has_header);
void write_csv(const std::filesystem::path& path, const Matrix& values,
               const std::vector<std::string>& header);
std::string format_csv(const Matrix& values, const std::vector<std::string>& header);

SnapshotMatrix csv_import(const std::filesystem::path& path, CsvLayout layout,
                          bool has_header, double dt);

/// Numbered column names: prefix_1 .. prefix_n.
std::vector<std::string> numbered(std::string_view prefix, std::size_t n);

}  // namespace latentlens
