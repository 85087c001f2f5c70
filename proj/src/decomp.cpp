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

#include "latentlens/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "latentlens/error.hpp"

namespace latentlens {
namespace {

std::size_t resolve_modes(const PodBasis& basis, std::size_t n_modes, const char* what) {
  require(basis.rank() >= 1, std::string(what) + ": basis is empty");
  if (n_modes == 0) return basis.rank();
  require(n_modes <= basis.rank(), std::string(what) + ": requested " + std::to_string(n_modes) +
                                       " modes but the basis has " + std::to_string(basis.rank()));
  return n_modes;
}

double normalization_factor(LatentNormalization n, double sigma) {
  switch (n) {
    case LatentNormalization::kInverseStd: return 1.0 / sigma;
    case LatentNormalization::kStd: return sigma;
    case LatentNormalization::kNone: return 1.0;
  }
  return 1.0;
}

}  // namespace

LatentSeries LatentSeries::from(Matrix z) {
  require(z.rows() >= 1 && z.cols() >= 1, "latent series: empty matrix");
  require(all_finite(z), "latent series: non-finite entries");
  LatentSeries s;
  const Vector mean = z.rowwise().mean();
  s.sigma = ((z.colwise() - mean).array().square().rowwise().mean()).sqrt().matrix();
  const double cutoff = kDegenerateSigma * s.sigma.maxCoeff();
  for (Eigen::Index i = 0; i < s.sigma.size(); ++i) {
    if (!(s.sigma(i) > cutoff)) s.degenerate.push_back(static_cast<std::size_t>(i));
  }
  s.z = std::move(z);
  return s;
}

Matrix decoder_coefficients(const Matrix& y_hat, const PodBasis& basis, std::size_t n_modes) {
  const std::size_t k = resolve_modes(basis, n_modes, "decoder_coefficients");
  require(y_hat.rows() == basis.modes.rows(),
          "decoder_coefficients: output has " + std::to_string(y_hat.rows()) + " rows, basis has " +
              std::to_string(basis.modes.rows()));
  return basis.modes.leftCols(static_cast<Eigen::Index>(k)).transpose() * y_hat;
}

std::string_view to_string(SensitivityMethod m) {
  return m == SensitivityMethod::kReverse ? "reverse" : "fd";
}

std::string_view to_string(LatentNormalization n) {
  switch (n) {
    case LatentNormalization::kInverseStd: return "inverse-std";
    case LatentNormalization::kStd: return "std";
    case LatentNormalization::kNone: return "none";
  }
  return "?";
}

SensitivityMethod parse_sensitivity_method(std::string_view text) {
  if (text == "reverse") return SensitivityMethod::kReverse;
  if (text == "fd") return SensitivityMethod::kCentralDifference;
  throw ContractViolation("unknown sensitivity method '" + std::string(text) + "' (use reverse or fd)");
}

LatentNormalization parse_latent_normalization(std::string_view text) {
  if (text == "inverse-std") return LatentNormalization::kInverseStd;
  if (text == "std") return LatentNormalization::kStd;
  if (text == "none") return LatentNormalization::kNone;
  throw ContractViolation("unknown latent normalization '" + std::string(text) +
                          "' (use inverse-std, std or none)");
}

double SensitivityReport::dbdz(std::size_t mode, std::size_t latent, std::size_t t) const {
  require(tensor.size() > 0, "dbdz: sensitivity tensor was not kept");
  require(mode < n_modes && latent < latent_dim && t < nt, "dbdz: index out of range");
  return tensor(static_cast<Eigen::Index>(mode + n_modes * latent), static_cast<Eigen::Index>(t));
}

SensitivityReport sensitivities(const Network& net, const LatentSeries& latents, const PodBasis& basis,
                                const SensitivityOptions& options) {
  const std::size_t k = resolve_modes(basis, options.n_modes, "sensitivities");
  const std::size_t nz = latents.latent_dim();
  const std::size_t nt = latents.nt();
  require(nz == net.latent_dim(), "sensitivities: latent series has " + std::to_string(nz) +
                                      " variables, decoder expects " + std::to_string(net.latent_dim()));
  require(static_cast<std::size_t>(basis.modes.rows()) == net.data_width(),
          "sensitivities: basis and decoder output widths differ");
  if (options.method == SensitivityMethod::kCentralDifference) {
    require(options.dz_fraction > 0, "sensitivities: central-difference step must be positive");
  }

  SensitivityReport report;
  report.options = options;
  report.n_modes = k;
  report.latent_dim = nz;
  report.nt = nt;
  report.sigma = latents.sigma;
  report.excluded = latents.degenerate;
  for (std::size_t i : report.excluded) {
    report.warnings.push_back("latent " + std::to_string(i + 1) + " is constant; excluded from sensitivities");
  }
  const auto ek = static_cast<Eigen::Index>(k);
  const auto enz = static_cast<Eigen::Index>(nz);
  const auto ent = static_cast<Eigen::Index>(nt);
  const Matrix phi = basis.modes.leftCols(ek);
  std::vector<bool> active(nz, true);
  for (std::size_t i : report.excluded) active[i] = false;
  Vector factor = Vector::Zero(enz);
  for (std::size_t i = 0; i < nz; ++i) {
    if (active[i]) factor(static_cast<Eigen::Index>(i)) = normalization_factor(options.normalization, latents.sigma(static_cast<Eigen::Index>(i)));
  }

  report.epsilon = Matrix::Zero(enz, ek);
  if (options.keep_tensor) report.tensor = Matrix::Zero(ek * enz, ent);

  if (options.method == SensitivityMethod::kReverse) {
    for (Eigen::Index t = 0; t < ent; ++t) {
      // Row i of J^T Phi holds dB_j/dZ_i for all modes j.
      const Matrix g = net.decoder_vjp(latents.z.col(t), phi);
      for (Eigen::Index i = 0; i < enz; ++i) {
        if (!active[static_cast<std::size_t>(i)]) continue;
        const auto row = (g.row(i) * factor(i)).eval();
        report.epsilon.row(i) += row.cwiseAbs();
        if (options.keep_tensor) report.tensor.block(i * ek, t, ek, 1) = row.transpose();
      }
    }
  } else {
    for (Eigen::Index i = 0; i < enz; ++i) {
      if (!active[static_cast<std::size_t>(i)]) continue;
      const double dz = options.dz_fraction * latents.sigma(i);
      Matrix plus = latents.z, minus = latents.z;
      plus.row(i).array() += dz;
      minus.row(i).array() -= dz;
      const Matrix d = (phi.transpose() * (net.decode(plus) - net.decode(minus))) * (factor(i) / (2.0 * dz));
      report.epsilon.row(i) = d.cwiseAbs().rowwise().sum().transpose();
      if (options.keep_tensor) report.tensor.block(i * ek, 0, ek, ent) = d;
    }
  }
  report.epsilon /= static_cast<double>(nt);
  if (!all_finite(report.epsilon)) throw NumericalError("sensitivities: non-finite average rate of change");
  return report;
}

Matrix average_rate_of_change(const SensitivityReport& report) {
  require(report.tensor.size() > 0, "average_rate_of_change: sensitivity tensor was not kept");
  const auto ek = static_cast<Eigen::Index>(report.n_modes);
  Matrix eps(static_cast<Eigen::Index>(report.latent_dim), ek);
  for (Eigen::Index i = 0; i < eps.rows(); ++i) {
    eps.row(i) = report.tensor.middleRows(i * ek, ek).cwiseAbs().rowwise().mean().transpose();
  }
  return eps;
}

double max_relative_gap(const Matrix& a, const Matrix& b, double floor) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "max_relative_gap: shape mismatch");
  const double scale = std::max(max_abs(a), max_abs(b));
  if (scale == 0.0) return 0.0;
  double gap = 0.0;
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      const double m = std::max(std::abs(a(r, c)), std::abs(b(r, c)));
      if (m <= floor * scale) continue;
      gap = std::max(gap, std::abs(a(r, c) - b(r, c)) / m);
    }
  }
  return gap;
}

namespace {

// Zero-energy data modes have no meaningful percentage; report 0.
Vector percent_of(const Vector& energy, const Vector& reference) {
  Vector out = Vector::Zero(energy.size());
  for (Eigen::Index j = 0; j < energy.size(); ++j) {
    if (reference(j) > 0.0) out(j) = 100.0 * energy(j) / reference(j);
  }
  return out;
}

}  // namespace

EquivalentEnergy equivalent_energy(const Matrix& y_hat, const PodBasis& basis, std::size_t n_modes) {
  const std::size_t k = resolve_modes(basis, n_modes, "equivalent_energy");
  require(y_hat.rows() == basis.modes.rows() && basis.weights.size() == basis.modes.rows(),
          "equivalent_energy: output and basis dimensions differ");
  require(y_hat.cols() >= 2, "equivalent_energy: need at least 2 snapshots");
  const Vector sqrt_w = basis.weights.cwiseSqrt();
  const Matrix p = basis.modes.leftCols(static_cast<Eigen::Index>(k)).transpose() * (sqrt_w.asDiagonal() * y_hat);
  EquivalentEnergy e;
  e.energy = p.rowwise().squaredNorm() / static_cast<double>(y_hat.cols() - 1);
  e.percent = percent_of(e.energy, basis.eigenvalues.head(static_cast<Eigen::Index>(k)));
  return e;
}

EquivalentEnergy equivalent_energy_from_coefficients(const Matrix& b, const Vector& reference) {
  require(b.cols() >= 2, "equivalent_energy: need at least 2 snapshots");
  require(reference.size() >= b.rows(), "equivalent_energy: reference has fewer modes than B");
  EquivalentEnergy e;
  e.energy = b.rowwise().squaredNorm() / static_cast<double>(b.cols() - 1);
  e.percent = percent_of(e.energy, reference.head(b.rows()));
  return e;
}

Vector latent_scores(const Matrix& epsilon, const std::vector<std::size_t>& target_modes) {
  require(!target_modes.empty(), "rank_latents: target mode set is empty");
  Vector score = Vector::Zero(epsilon.rows());
  for (std::size_t j : target_modes) {
    require(j < static_cast<std::size_t>(epsilon.cols()),
            "rank_latents: target mode " + std::to_string(j + 1) + " exceeds the " +
                std::to_string(epsilon.cols()) + " modes in epsilon");
    score += epsilon.col(static_cast<Eigen::Index>(j));
  }
  return score;
}

std::vector<std::size_t> rank_latents(const Matrix& epsilon, const std::vector<std::size_t>& target_modes) {
  const Vector score = latent_scores(epsilon, target_modes);
  std::vector<std::size_t> order(static_cast<std::size_t>(score.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return score(static_cast<Eigen::Index>(a)) > score(static_cast<Eigen::Index>(b));
  });
  return order;
}

Matrix mask_latents(const Matrix& z, const std::vector<std::size_t>& keep) {
  Matrix out = Matrix::Zero(z.rows(), z.cols());
  for (std::size_t i : keep) {
    require(i < static_cast<std::size_t>(z.rows()),
            "filter: latent " + std::to_string(i + 1) + " does not exist (N_z = " + std::to_string(z.rows()) + ")");
    out.row(static_cast<Eigen::Index>(i)) = z.row(static_cast<Eigen::Index>(i));
  }
  return out;
}

FilteredOutput filter_latents(const Network& net, const Matrix& z, const std::vector<std::size_t>& keep) {
  FilteredOutput out;
  out.z = mask_latents(z, keep);
  out.y = net.decode(out.z);
  return out;
}

}  // namespace latentlens
