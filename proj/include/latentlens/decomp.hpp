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

// Decoder decomposition: projection of decoder outputs onto POD modes,
// sensitivity of those projections to each latent variable, their average
// rate of change, equivalent energies, and latent ranking/filtering.
//
// Indices are 0-based. B is stored modes x time so that Y_hat = Phi B.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "latentlens/autonet.hpp"
#include "latentlens/numerics.hpp"
#include "latentlens/pod.hpp"

namespace latentlens {

/// Latents whose sigma falls below this fraction of the largest are treated
/// as constant.
inline constexpr double kDegenerateSigma = 1e-12;

/// Latent matrix Z (N_z x N_t) with per-variable standard deviations
/// (population form, divisor N_t).
struct LatentSeries {
  Matrix z;
  Vector sigma;
  std::vector<std::size_t> degenerate;  // sigma <= kDegenerateSigma * max sigma

  static LatentSeries from(Matrix z);
  std::size_t latent_dim() const { return static_cast<std::size_t>(z.rows()); }
  std::size_t nt() const { return static_cast<std::size_t>(z.cols()); }
};

/// B = Phi^T Y_hat over the first `n_modes` modes (0 = all retained modes).
Matrix decoder_coefficients(const Matrix& y_hat, const PodBasis& basis, std::size_t n_modes = 0);

enum class SensitivityMethod { kReverse, kCentralDifference };

/// Per-latent factor applied to dB/dZ_i. kInverseStd divides by sigma(Z_i)
/// as the averaging algorithm prescribes; kStd multiplies by it, which
/// makes epsilon invariant to rescaling a latent variable.
enum class LatentNormalization { kInverseStd, kStd, kNone };

std::string_view to_string(SensitivityMethod m);
std::string_view to_string(LatentNormalization n);
SensitivityMethod parse_sensitivity_method(std::string_view text);
LatentNormalization parse_latent_normalization(std::string_view text);

struct SensitivityOptions {
  SensitivityMethod method = SensitivityMethod::kReverse;
  double dz_fraction = 1e-4;  // central-difference step as a fraction of sigma(Z_i)
  LatentNormalization normalization = LatentNormalization::kInverseStd;
  std::size_t n_modes = 0;    // 0 = all retained modes
  bool keep_tensor = true;    // store dB/dZ for every snapshot
};

struct SensitivityReport {
  SensitivityOptions options;
  std::size_t n_modes = 0;
  std::size_t latent_dim = 0;
  std::size_t nt = 0;
  /// dB_j/dZ_i at snapshot t is tensor(j + n_modes * i, t); empty unless kept.
  Matrix tensor;
  Matrix epsilon;  // N_z x n_modes
  Vector sigma;
  std::vector<std::size_t> excluded;  // degenerate latents, epsilon row zero
  std::vector<std::string> warnings;

  double dbdz(std::size_t mode, std::size_t latent, std::size_t t) const;
};

/// Sensitivities of the decoder coefficients to every latent variable,
/// evaluated at each column of `latents`.
SensitivityReport sensitivities(const Network& net, const LatentSeries& latents, const PodBasis& basis,
                                const SensitivityOptions& options = {});

/// epsilon_{i,j} = (1/N_t) sum_t |dB_j/dZ_i| recomputed from a stored tensor.
Matrix average_rate_of_change(const SensitivityReport& report);

/// Largest elementwise |a - b| / max(|a|, |b|), ignoring entries where both
/// are below `floor` times the largest magnitude in either matrix.
double max_relative_gap(const Matrix& a, const Matrix& b, double floor = 1e-9);

struct EquivalentEnergy {
  Vector energy;   // Lambda_hat diagonal
  Vector percent;  // 100 * energy / reference eigenvalue
};

/// Weighted form: diag(Phi^T W_p Y Y^T W_p Phi) / (N_t - 1).
EquivalentEnergy equivalent_energy(const Matrix& y_hat, const PodBasis& basis, std::size_t n_modes = 0);

/// Coefficient form: diag(B B^T) / (N_t - 1), for unweighted bases.
EquivalentEnergy equivalent_energy_from_coefficients(const Matrix& b, const Vector& reference);

/// Sum of epsilon over the target modes, one score per latent.
Vector latent_scores(const Matrix& epsilon, const std::vector<std::size_t>& target_modes);

/// Latents ordered by descending score; ties keep the lower index first.
std::vector<std::size_t> rank_latents(const Matrix& epsilon, const std::vector<std::size_t>& target_modes);

/// Zeroes every latent row not listed in `keep`.
Matrix mask_latents(const Matrix& z, const std::vector<std::size_t>& keep);

struct FilteredOutput {
  Matrix z;
  Matrix y;
};

FilteredOutput filter_latents(const Network& net, const Matrix& z, const std::vector<std::size_t>& keep);

}  // namespace latentlens
