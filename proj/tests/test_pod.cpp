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

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "latentlens/data.hpp"
#include "latentlens/error.hpp"
#include "latentlens/pod.hpp"
#include "testutil.hpp"

using namespace latentlens;

namespace {

// Independent route: left singular vectors of W^(1/2) Q / sqrt(N_t - 1).
struct Oracle {
  Vector eigenvalues;
  Matrix modes;
};

Oracle svd_oracle(const Matrix& q, const Vector& w) {
  const Matrix scaled = w.cwiseSqrt().asDiagonal() * q / std::sqrt(static_cast<double>(q.cols() - 1));
  Eigen::JacobiSVD<Matrix> svd(scaled, Eigen::ComputeThinU);
  return {svd.singularValues().array().square(), svd.matrixU()};
}

Vector random_weights(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(0.5, 2.0);
  Vector w(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = dist(gen);
  return w;
}

}  // namespace

TEST_CASE("weighted POD matches the SVD oracle on random matrices") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const std::size_t n = 8 + 9 * seed, nt = 60 + 70 * seed;
    const Matrix q = testutil::centred(testutil::random_matrix(n, nt, seed));
    const Vector w = random_weights(n, seed + 100);
    const PodBasis b = compute_pod(q, w);
    const Oracle o = svd_oracle(q, w);
    REQUIRE(b.rank() == n);
    for (Eigen::Index i = 0; i < b.eigenvalues.size(); ++i) {
      CHECK(std::abs(b.eigenvalues(i) - o.eigenvalues(i)) <= 1e-8 * o.eigenvalues(i));
    }
    for (Eigen::Index k = 1; k <= 4; ++k) {
      if (o.eigenvalues(k - 1) - o.eigenvalues(k) < 1e-6 * o.eigenvalues(0)) continue;
      const auto angles = principal_angles(b.modes.leftCols(k), o.modes.leftCols(k));
      CHECK(angles.back() < 1e-6);
    }
  }
}

TEST_CASE("POD modes are orthonormal and coefficients are the projection onto them") {
  const Matrix q = testutil::centred(testutil::random_matrix(12, 90, 5));
  const PodBasis b = compute_pod(q, random_weights(12, 6));
  CHECK((b.modes.transpose() * b.modes - Matrix::Identity(12, 12)).norm() < 1e-12);
  CHECK((b.coeffs - b.modes.transpose() * q).norm() < 1e-12 * q.norm());
  for (Eigen::Index k = 0; k < b.modes.cols(); ++k) {
    Eigen::Index arg = 0;
    b.modes.col(k).cwiseAbs().maxCoeff(&arg);
    CHECK(b.modes(arg, k) > 0.0);
  }
}

TEST_CASE("full-rank reconstruction is exact") {
  SUBCASE("weighted random matrix") {
    const Matrix q = testutil::centred(testutil::random_matrix(20, 150, 9));
    const PodBasis b = compute_pod(q, random_weights(20, 10));
    CHECK((reconstruct(b, b.rank()) - q).norm() <= 1e-10 * q.norm());
  }
  SUBCASE("laminar surrogate") {
    const SnapshotMatrix q = generate_laminar(LaminarSurrogateConfig{});
    const PodBasis b = compute_pod(q);
    CHECK((reconstruct(b, b.rank()) - q.values).norm() <= 1e-10 * q.values.norm());
  }
  SUBCASE("turbulent surrogate") {
    TurbulentSurrogateConfig cfg;
    cfg.n_t = 2048;
    const SnapshotMatrix q = generate_turbulent(cfg);
    const PodBasis b = compute_pod(q);
    CHECK(b.rank() == 64);
    CHECK((reconstruct(b, b.rank()) - q.values).norm() <= 1e-10 * q.values.norm());
  }
  SUBCASE("rank-deficient data with unequal weights keeps the zero-energy modes") {
    const Matrix basis = testutil::random_matrix(10, 2, 11);
    const Matrix q = testutil::centred(basis * testutil::random_matrix(2, 80, 12));
    const PodBasis b = compute_pod(q, random_weights(10, 13));
    CHECK(b.rank() == 10);
    CHECK(b.eigenvalues.tail(8).cwiseAbs().maxCoeff() == 0.0);
    CHECK((b.coeffs.bottomRows(8)).norm() > 1e-6 * q.norm());
    CHECK((reconstruct(b, b.rank()) - q).norm() <= 1e-10 * q.norm());
    CHECK(compute_pod(q, Vector::Ones(10)).rank() == 2);
  }
}

TEST_CASE("eigenvalues sum to the weighted variance") {
  const Matrix q = testutil::centred(testutil::random_matrix(16, 80, 11));
  const Vector w = random_weights(16, 12);
  const PodBasis b = compute_pod(q, w);
  double variance = 0.0;
  for (Eigen::Index i = 0; i < q.rows(); ++i) variance += w(i) * q.row(i).squaredNorm();
  variance /= static_cast<double>(q.cols() - 1);
  CHECK(std::abs(b.eigenvalues.sum() - variance) <= 1e-9 * variance);
}

TEST_CASE("rank-deficient data keeps only the nonzero modes") {
  // Single travelling wave: exactly two modes.
  const std::size_t n = 30, nt = 200;
  Matrix q(n, nt);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < nt; ++t) {
      q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) =
          std::cos(2 * std::numbers::pi * (0.1 * static_cast<double>(i) - 0.05 * static_cast<double>(t)));
    }
  }
  q = testutil::centred(q);
  const PodBasis b = compute_pod(q, Vector::Ones(n));
  CHECK(b.rank() == 2);
  CHECK(b.eigenvalues(0) == doctest::Approx(b.eigenvalues(1)).epsilon(1e-6));
  CHECK((reconstruct(b, 2) - q).norm() <= 1e-10 * q.norm());
}

TEST_CASE("truncated reconstruction error equals the discarded energy") {
  const Matrix q = testutil::centred(testutil::random_matrix(10, 400, 13));
  const PodBasis b = compute_pod(q, Vector::Ones(10));
  const Matrix r = reconstruct(b, 3);
  const double discarded = b.eigenvalues.tail(7).sum() * static_cast<double>(q.cols() - 1);
  CHECK((q - r).squaredNorm() == doctest::Approx(discarded).epsilon(1e-10));
}

TEST_CASE("compute_pod rejects bad input") {
  Matrix q = testutil::random_matrix(4, 10, 1);
  CHECK_THROWS_WITH_AS(compute_pod(q, Vector::Ones(4)), doctest::Contains("not mean-removed"), ContractViolation);
  q = testutil::centred(q);
  CHECK_THROWS_AS(compute_pod(q, Vector::Ones(3)), ContractViolation);
  CHECK_THROWS_AS(compute_pod(q.leftCols(1), Vector::Ones(4)), ContractViolation);
  q(0, 0) = std::nan("");
  CHECK_THROWS_AS(compute_pod(q, Vector::Ones(4)), ContractViolation);
  CHECK_THROWS_AS(reconstruct(compute_pod(testutil::centred(testutil::random_matrix(4, 10, 2)), Vector::Ones(4)), 5),
                  ContractViolation);
}

TEST_CASE("energy spectrum bookkeeping") {
  Vector eig(4);
  eig << 4.0, 3.0, 2.0, 1.0;
  const EnergySpectrum e = energy_spectrum(eig);
  CHECK(e.percent(0) == doctest::Approx(40.0));
  CHECK(e.cumulative(3) == doctest::Approx(100.0));
  CHECK(e.modes_for(70.0) == 2);
  CHECK(e.modes_for(71.0) == 3);
  const SnapshotMatrix lam = generate_laminar(LaminarSurrogateConfig{});
  const PodBasis b = compute_pod(lam);
  const EnergySpectrum le = energy_spectrum(b);
  CHECK(std::abs(le.cumulative(1) / 100.0 - (b.eigenvalues(0) + b.eigenvalues(1)) / b.eigenvalues.sum()) < 1e-6);
}
