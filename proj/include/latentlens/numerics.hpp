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

// Dense real linear algebra and deterministic pseudo-randomness shared by all
// modules. Storage is Eigen's column-major double matrix.

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace latentlens {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct SymEig {
  Vector values;   // descending
  Matrix vectors;  // column i pairs with values(i), orthonormal
};

/// Eigendecomposition of a real symmetric matrix by Householder
/// tridiagonalisation followed by implicit QL iteration with Wilkinson shifts.
/// Throws ContractViolation for non-square or asymmetric input and
/// NumericalError if an eigenvalue fails to converge within
/// `max_iterations_per_value` QL sweeps.
SymEig sym_eig(const Matrix& c, int max_iterations_per_value = 60);

struct Svd {
  Matrix u;  // N x k
  Vector s;  // k, non-negative, descending
  Matrix v;  // M x k
};

/// Thin singular value decomposition. Kept independent of sym_eig so that it
/// can serve as a cross-check for the POD route.
Svd svd(const Matrix& q);

/// Principal angles (radians, ascending) between the column spans of `a` and
/// `b`. Both inputs are orthonormalised internally.
std::vector<double> principal_angles(const Matrix& a, const Matrix& b);

/// Largest |entry|; zero for an empty matrix.
double max_abs(const Matrix& m);

bool all_finite(const Matrix& m);

/// Seeded generator built on std::mt19937_64, whose output sequence is fixed
/// by the C++ standard. Uniform and normal variates are derived here rather
/// than through <random> distributions, which are implementation-defined, so
/// a given seed yields the same stream on every platform.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via the Box-Muller transform.
  double normal();
  /// Unbiased integer on [0, bound).
  std::uint64_t below(std::uint64_t bound);
  void shuffle(std::span<std::size_t> values);

  /// Independent child stream. Child seeds are SplitMix64(seed ^ golden*stream)
  /// so every stream of an experiment derives from one master seed.
  SeededRng split(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace latentlens
