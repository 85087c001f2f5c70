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

#include "latentlens/pod.hpp"

#include <cmath>
#include <string>

#include "latentlens/error.hpp"

namespace latentlens {

GridMeta GridMeta::cartesian(std::vector<double> x, std::vector<double> y) {
  GridMeta g;
  g.kind = GridKind::kCartesian2d;
  g.dims = {x.size(), y.size()};
  g.coords = {std::move(x), std::move(y)};
  return g;
}

GridMeta GridMeta::polar(std::vector<double> radii, std::vector<double> thetas,
                         std::vector<double> areas) {
  GridMeta g;
  g.kind = GridKind::kPolar;
  g.dims = {radii.size(), thetas.size()};
  g.coords = {std::move(radii), std::move(thetas)};
  g.cell_areas = std::move(areas);
  return g;
}

GridMeta GridMeta::unstructured(std::size_t n) {
  GridMeta g;
  g.kind = GridKind::kUnstructured;
  g.dims = {n};
  return g;
}

std::size_t GridMeta::point_count() const {
  std::size_t n = dims.empty() ? 0 : 1;
  for (std::size_t d : dims) n *= d;
  return n;
}

Vector GridMeta::weights() const {
  const auto n = static_cast<Eigen::Index>(point_count());
  if (kind == GridKind::kPolar) {
    return Eigen::Map<const Vector>(cell_areas.data(), static_cast<Eigen::Index>(cell_areas.size()));
  }
  return Vector::Ones(n);
}

void GridMeta::validate(std::size_t n) const {
  const std::size_t expected_axes = kind == GridKind::kUnstructured ? 1 : 2;
  if (dims.size() != expected_axes) throw FormatError("grid: wrong number of axes");
  if (point_count() != n) {
    throw FormatError("grid: " + std::to_string(point_count()) +
                      " points but snapshot matrix has " + std::to_string(n) + " rows");
  }
  if (kind != GridKind::kUnstructured) {
    if (coords.size() != 2 || coords[0].size() != dims[0] || coords[1].size() != dims[1]) {
      throw FormatError("grid: coordinate arrays do not match dimensions");
    }
  }
  if (kind == GridKind::kPolar) {
    if (cell_areas.size() != n) throw FormatError("grid: polar cell area count mismatch");
    for (double a : cell_areas) {
      if (!(a > 0.0) || !std::isfinite(a)) throw FormatError("grid: polar cell areas must be positive");
    }
  }
}

PodBasis compute_pod(const Matrix& q, const Vector& weights) {
  const Eigen::Index n = q.rows();
  const Eigen::Index nt = q.cols();
  require(nt >= 2, "compute_pod: need at least 2 snapshots, got " + std::to_string(nt));
  require(n >= 1, "compute_pod: empty snapshot matrix");
  require(weights.size() == n, "compute_pod: weight count does not match rows");
  require(weights.allFinite() && (weights.array() >= 0.0).all(),
          "compute_pod: weights must be finite and non-negative");
  require(all_finite(q), "compute_pod: snapshot matrix has non-finite entries");
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mean = q.row(i).mean();
    const double rms = std::sqrt(q.row(i).squaredNorm() / static_cast<double>(nt));
    require(std::abs(mean) <= 1e-8 * rms + 1e-300,
            "compute_pod: row " + std::to_string(i) + " is not mean-removed (mean " +
                std::to_string(mean) + ")");
  }

  const Vector root_w = weights.cwiseSqrt();
  const Matrix qw = root_w.asDiagonal() * q;
  Matrix c = (qw * qw.transpose()) / static_cast<double>(nt - 1);
  c = 0.5 * (c + c.transpose()).eval();

  const SymEig eig = sym_eig(c);
  Eigen::Index rank = 0;
  const double lead = eig.values.size() > 0 ? eig.values(0) : 0.0;
  if (lead > 0.0) {
    while (rank < eig.values.size() && eig.values(rank) >= kPodRankTolerance * lead) ++rank;
  }
  // A = Phi^T Q is not the weighted projection, so with unequal weights Q
  // has components along the zero-energy modes. Keep them (as exact zeros
  // in Lambda) so the full basis still reconstructs Q.
  const bool uniform = weights.maxCoeff() == weights.minCoeff();
  const Eigen::Index kept = uniform || lead <= 0.0 ? rank : n;

  PodBasis basis;
  basis.weights = weights;
  basis.eigenvalues = Vector::Zero(kept);
  basis.eigenvalues.head(rank) = eig.values.head(rank);
  basis.modes = eig.vectors.leftCols(kept);
  for (Eigen::Index k = 0; k < kept; ++k) {
    Eigen::Index arg = 0;
    basis.modes.col(k).cwiseAbs().maxCoeff(&arg);
    if (basis.modes(arg, k) < 0.0) basis.modes.col(k) *= -1.0;
  }
  basis.coeffs = basis.modes.transpose() * q;
  return basis;
}

PodBasis compute_pod(const SnapshotMatrix& q) { return compute_pod(q.values, q.weights()); }

Matrix reconstruct(const PodBasis& basis, std::size_t n_modes) {
  require(n_modes >= 1 && n_modes <= basis.rank(),
          "reconstruct: n_modes " + std::to_string(n_modes) + " outside [1, " +
              std::to_string(basis.rank()) + "]");
  const auto k = static_cast<Eigen::Index>(n_modes);
  return basis.modes.leftCols(k) * basis.coeffs.topRows(k);
}

std::size_t EnergySpectrum::modes_for(double percent_target) const {
  for (Eigen::Index i = 0; i < cumulative.size(); ++i) {
    if (cumulative(i) >= percent_target) return static_cast<std::size_t>(i + 1);
  }
  return static_cast<std::size_t>(cumulative.size());
}

EnergySpectrum energy_spectrum(const Vector& eigenvalues) {
  require(eigenvalues.size() > 0, "energy_spectrum: no eigenvalues");
  const double total = eigenvalues.sum();
  require(total > 0.0, "energy_spectrum: total energy is zero");
  EnergySpectrum out;
  out.percent = 100.0 * eigenvalues / total;
  out.cumulative.resize(eigenvalues.size());
  double running = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    running += out.percent(i);
    out.cumulative(i) = running;
  }
  return out;
}

EnergySpectrum energy_spectrum(const PodBasis& basis) { return energy_spectrum(basis.eigenvalues); }

}  // namespace latentlens
