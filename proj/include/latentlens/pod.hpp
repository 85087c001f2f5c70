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

// Weighted proper orthogonal decomposition of snapshot matrices.
//
// Conventions used throughout the library:
//   * a snapshot matrix Q is N x N_t, one snapshot per column;
//   * the POD weight matrix is W_p = diag(sqrt(w_j)), with w_j the cell area
//     on polar grids and 1 otherwise, so C = W_p Q Q^T W_p / (N_t - 1);
//   * time coefficients A = Phi^T Q are stored modes x time (row i is the
//     time series of mode i), and reconstructions read Q~ = Phi A.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "latentlens/numerics.hpp"

namespace latentlens {

enum class GridKind : std::uint8_t {
  kCartesian2d = 0,
  kPolar = 1,
  kUnstructured = 2,
};

/// Spatial layout of the rows of a snapshot matrix.
///
/// Cartesian grids store point (ix, iy) at row ix * ny + iy. Polar grids store
/// point (ir, itheta) at row ir * n_theta + itheta and carry one cell area per
/// point. Unstructured grids only know their point count.
struct GridMeta {
  GridKind kind = GridKind::kUnstructured;
  std::vector<std::size_t> dims;            // {nx, ny} or {n_r, n_theta} or {n}
  std::vector<std::vector<double>> coords;  // per-axis coordinates
  std::vector<double> cell_areas;           // polar only, one per point

  static GridMeta cartesian(std::vector<double> x, std::vector<double> y);
  static GridMeta polar(std::vector<double> radii, std::vector<double> thetas,
                        std::vector<double> areas);
  static GridMeta unstructured(std::size_t n);

  std::size_t point_count() const;
  /// POD weights w_j: cell areas for polar grids, ones otherwise.
  Vector weights() const;
  /// Throws FormatError if the metadata is inconsistent with `n` rows.
  void validate(std::size_t n) const;

  bool operator==(const GridMeta&) const = default;
};

struct SnapshotMatrix {
  Matrix values;                // N x N_t
  GridMeta grid;
  double dt = 1.0;              // sampling interval, in time units of the St axis
  std::optional<Vector> mean;   // set by remove_mean

  std::size_t n() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t nt() const { return static_cast<std::size_t>(values.cols()); }
  Vector weights() const { return grid.weights(); }
};

struct PodBasis {
  Matrix modes;       // Phi, N x N_r
  Vector eigenvalues; // Lambda, descending, N_r
  Matrix coeffs;      // A, N_r x N_t
  Vector weights;     // w_j used to build W_p

  std::size_t rank() const { return static_cast<std::size_t>(modes.cols()); }
};

/// Eigenvalues below this fraction of the leading one are discarded (with
/// uniform weights) or stored as zero (otherwise; see compute_pod).
inline constexpr double kPodRankTolerance = 1e-12;

PodBasis compute_pod(const Matrix& q, const Vector& weights);
PodBasis compute_pod(const SnapshotMatrix& q);

/// Sum of the first `n_modes` rank-one contributions Phi_:,i A_i,:.
Matrix reconstruct(const PodBasis& basis, std::size_t n_modes);

struct EnergySpectrum {
  Vector percent;
  Vector cumulative;

  /// Smallest number of modes whose cumulative energy reaches `percent_target`.
  std::size_t modes_for(double percent_target) const;
};

EnergySpectrum energy_spectrum(const PodBasis& basis);
EnergySpectrum energy_spectrum(const Vector& eigenvalues);

}  // namespace latentlens
