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
#include <cstring>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "latentlens/data.hpp"
#include "latentlens/error.hpp"
#include "latentlens/spectral.hpp"
#include "testutil.hpp"

using namespace latentlens;

namespace {

Vector row_std(const Matrix& a, Eigen::Index i) {
  const Vector r = a.row(i).transpose();
  return Vector::Constant(1, std::sqrt((r.array() - r.mean()).square().mean()));
}

// Norm of the azimuthally averaged (m=0) part of a mode on a polar grid,
// relative to the mode norm.
double axisymmetric_fraction(const Vector& mode, std::size_t n_r, std::size_t n_theta) {
  double m0 = 0.0;
  for (std::size_t r = 0; r < n_r; ++r) {
    const double avg = mode.segment(static_cast<Eigen::Index>(r * n_theta), static_cast<Eigen::Index>(n_theta)).mean();
    m0 += static_cast<double>(n_theta) * avg * avg;
  }
  return std::sqrt(m0) / mode.norm();
}

std::vector<std::uint8_t> le64(std::uint64_t v) {
  std::vector<std::uint8_t> b(8);
  for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v >> (8 * i));
  return b;
}

}  // namespace

TEST_CASE("laminar surrogate with one pair is exactly rank two") {
  LaminarSurrogateConfig cfg;
  cfg.n_pairs = 1;
  cfg.energies = {0.9};
  const PodBasis b = compute_pod(generate_laminar(cfg));
  REQUIRE(b.rank() == 2);
  CHECK(b.eigenvalues(1) == doctest::Approx(b.eigenvalues(0)).epsilon(1e-6));
  const SymEig full = sym_eig(generate_laminar(cfg).values * generate_laminar(cfg).values.transpose());
  CHECK(full.values(2) < 1e-10 * full.values(0));
}

TEST_CASE("laminar surrogate pair energies follow the configuration") {
  const LaminarSurrogateConfig cfg;
  const PodBasis b = compute_pod(generate_laminar(cfg));
  REQUIRE(b.rank() == 6);
  const double total = b.eigenvalues.sum();
  const double sum_e = cfg.energies[0] + cfg.energies[1] + cfg.energies[2];
  for (std::size_t k = 0; k < 3; ++k) {
    const auto i = static_cast<Eigen::Index>(2 * k);
    const double pair = 100.0 * (b.eigenvalues(i) + b.eigenvalues(i + 1)) / total;
    const double want = 100.0 * cfg.energies[k] / sum_e;
    CHECK(std::abs(pair - want) <= 0.02 * want);
  }
}

TEST_CASE("laminar surrogate coefficient 1 peaks at the fundamental") {
  const LaminarSurrogateConfig cfg;
  const SnapshotMatrix q = generate_laminar(cfg);
  const PodBasis b = compute_pod(q);
  const Spectrum s = fft_magnitude(b.coeffs.topRows(1), q.dt);
  const double f = s.frequency(static_cast<Eigen::Index>(dominant_bin(s)));
  CHECK(std::abs(f - cfg.fundamental_st) <= s.resolution());
  for (std::size_t k = 1; k <= 3; ++k) {
    const Spectrum sk = fft_magnitude(b.coeffs.row(static_cast<Eigen::Index>(2 * k - 2)), q.dt);
    CHECK(std::abs(sk.frequency(static_cast<Eigen::Index>(dominant_bin(sk))) - k * cfg.fundamental_st) <=
          sk.resolution());
  }
}

TEST_CASE("laminar phase portrait of the leading pair is a circle") {
  const SnapshotMatrix q = generate_laminar(LaminarSurrogateConfig{});
  const PodBasis b = compute_pod(q);
  const double s1 = row_std(b.coeffs, 0)(0), s2 = row_std(b.coeffs, 1)(0);
  Vector r(b.coeffs.cols());
  for (Eigen::Index t = 0; t < r.size(); ++t) r(t) = std::hypot(b.coeffs(0, t) / s1, b.coeffs(1, t) / s2);
  CHECK((r.array() - r.mean()).abs().maxCoeff() < 0.02 * r.mean());
}

TEST_CASE("laminar surrogate is mean-free, deterministic and validates Nyquist") {
  LaminarSurrogateConfig cfg;
  const SnapshotMatrix a = generate_laminar(cfg), b = generate_laminar(cfg);
  CHECK(a.values == b.values);
  CHECK(a.values.rowwise().mean().cwiseAbs().maxCoeff() < 1e-12 * a.values.cwiseAbs().maxCoeff());
  CHECK(a.grid.kind == GridKind::kCartesian2d);
  CHECK(a.n() == cfg.nx * cfg.ny);
  cfg.seed = 7;
  CHECK(generate_laminar(cfg).values != a.values);
  cfg.dt = 1.0;
  cfg.integer_periods = false;
  CHECK_THROWS_WITH_AS(generate_laminar(cfg), doctest::Contains("St="), ContractViolation);
  LaminarSurrogateConfig bad;
  bad.energies = {0.5, 0.6, 0.1};
  CHECK_THROWS_AS(generate_laminar(bad), ContractViolation);
}

TEST_CASE("noise-free turbulent surrogate has rank three") {
  TurbulentSurrogateConfig cfg;
  cfg.noise_floor = 0.0;
  cfg.n_t = 4096;
  const SnapshotMatrix q = generate_turbulent(cfg);
  const PodBasis b = compute_pod(q);
  CHECK(b.rank() >= 3);
  CHECK((b.eigenvalues.size() < 4 || b.eigenvalues(3) < 1e-10 * b.eigenvalues(0)));
}

TEST_CASE("turbulent surrogate modal structure") {
  TurbulentSurrogateConfig cfg;
  const SnapshotMatrix q = generate_turbulent(cfg);
  REQUIRE(q.n() == 64);
  REQUIRE(q.grid.kind == GridKind::kPolar);
  const PodBasis b = compute_pod(q);
  CHECK(axisymmetric_fraction(b.modes.col(0), cfg.n_radial, cfg.n_azimuthal) < 0.05);
  CHECK(axisymmetric_fraction(b.modes.col(1), cfg.n_radial, cfg.n_azimuthal) < 0.05);
  CHECK(axisymmetric_fraction(b.modes.col(2), cfg.n_radial, cfg.n_azimuthal) > 0.95);

  const Spectrum s3 = premultiply(welch_psd(b.coeffs.row(2), cfg.fs, 1024, 512));
  const double f3 = s3.frequency(static_cast<Eigen::Index>(dominant_bin(s3)));
  CHECK(std::abs(f3 - 0.06) <= s3.resolution());
  const Spectrum s1 = premultiply(welch_psd(b.coeffs.topRows(2), cfg.fs, 1024, 512));
  const std::size_t shed = peak_in_band(s1, 0.1, 0.4);
  CHECK(std::abs(s1.frequency(static_cast<Eigen::Index>(shed)) - 0.2) <= 0.2 * cfg.linewidth + s1.resolution());
  // Drift and shedding share the pair: 0.25 of its 0.7 band energy sits near St 0.002.
  const Spectrum slow = welch_psd(b.coeffs.topRows(2), cfg.fs, 8192, 4096);
  CHECK(band_power(slow, 0.0005, 0.005) > 0.2 * band_power(slow, 0.0, 0.5));

  CHECK(generate_turbulent(cfg).values == q.values);
  cfg.fs = 0.3;
  CHECK_THROWS_AS(generate_turbulent(cfg), ContractViolation);
}

TEST_CASE("polar sensor grid cell areas tile the disk") {
  const GridMeta g = polar_sensor_grid(8, 8, 0.5);
  double total = 0.0;
  for (double a : g.cell_areas) {
    CHECK(a > 0.0);
    total += a;
  }
  CHECK(total == doctest::Approx(std::numbers::pi * 0.25).epsilon(1e-12));
  CHECK(g.weights().size() == 64);
}

TEST_CASE("remove_mean") {
  SUBCASE("constant field") {
    SnapshotMatrix q;
    q.values = Matrix::Constant(3, 5, 2.5);
    q.grid = GridMeta::unstructured(3);
    CHECK(remove_mean(q).values.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("mean-free input is unchanged") {
    SnapshotMatrix q;
    q.values = testutil::centred(testutil::random_matrix(4, 50, 3));
    q.grid = GridMeta::unstructured(4);
    CHECK((remove_mean(q).values - q.values).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SUBCASE("round trip") {
    SnapshotMatrix q;
    q.values = testutil::random_matrix(6, 40, 4).array() + 3.0;
    q.grid = GridMeta::unstructured(6);
    const SnapshotMatrix f = remove_mean(q);
    CHECK(f.values.rowwise().mean().cwiseAbs().maxCoeff() < 1e-12 * q.values.cwiseAbs().maxCoeff());
    REQUIRE(f.mean.has_value());
    CHECK((restore_mean(f).values - q.values).cwiseAbs().maxCoeff() <= 1e-14 * q.values.cwiseAbs().maxCoeff());
  }
  SUBCASE("needs two snapshots") {
    SnapshotMatrix q;
    q.values = Matrix::Ones(3, 1);
    q.grid = GridMeta::unstructured(3);
    CHECK_THROWS_AS(remove_mean(q), ContractViolation);
  }
}

TEST_CASE("dataset container round trip is byte-identical") {
  testutil::TempDir dir("data");
  SnapshotMatrix q;
  q.values.resize(2, 3);
  q.values << 1.0, -2.0, 3.5, 0.25, 1e-300, -7.0;
  q.grid = GridMeta::unstructured(2);
  q.dt = 0.125;
  save_dataset(q, dir / "a.snap");
  const SnapshotMatrix back = load_dataset(dir / "a.snap");
  CHECK(back.values == q.values);
  CHECK(back.dt == q.dt);
  save_dataset(back, dir / "b.snap");
  CHECK(read_file(dir / "a.snap") == read_file(dir / "b.snap"));

  for (const SnapshotMatrix& s : {generate_laminar(LaminarSurrogateConfig{}), [] {
         TurbulentSurrogateConfig c;
         c.n_t = 256;
         return generate_turbulent(c);
       }()}) {
    const auto bytes = encode_dataset(s);
    const SnapshotMatrix d = decode_dataset(bytes);
    CHECK(d.values == s.values);
    CHECK(d.grid == s.grid);
    CHECK(encode_dataset(d) == bytes);
    CHECK(bytes.size() == dataset_header_size(s.grid) + 8 * s.n() * s.nt());
  }
}

TEST_CASE("dataset container rejects malformed files") {
  SnapshotMatrix q;
  q.values = testutil::random_matrix(3, 4, 1);
  q.grid = GridMeta::unstructured(3);
  auto bytes = encode_dataset(q);

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_WITH_AS(decode_dataset(bad_magic), doctest::Contains("offset 0"), FormatError);

  auto truncated = bytes;
  truncated.resize(bytes.size() - 5);
  CHECK_THROWS_WITH_AS(decode_dataset(truncated), doctest::Contains("truncated"), FormatError);

  auto trailing = bytes;
  trailing.push_back(0);
  CHECK_THROWS_AS(decode_dataset(trailing), FormatError);

  // Header claims N=0, N_t=0.
  std::vector<std::uint8_t> empty(kSnapshotMagic, kSnapshotMagic + 8);
  empty.insert(empty.end(), {1, 0, 0, 0});
  for (auto v : {le64(0), le64(0), le64(0)}) empty.insert(empty.end(), v.begin(), v.end());
  empty.push_back(2);
  CHECK_THROWS_WITH_AS(decode_dataset(empty), doctest::Contains("empty"), FormatError);
}

TEST_CASE("truncated large payload reports the expected end offset") {
  const std::uint64_t n = 64, nt = 420000;
  std::vector<std::uint8_t> bytes(kSnapshotMagic, kSnapshotMagic + 8);
  bytes.insert(bytes.end(), {1, 0, 0, 0});
  for (auto v : {le64(n), le64(nt)}) bytes.insert(bytes.end(), v.begin(), v.end());
  double dt = 1.0;
  std::uint64_t dt_bits = 0;
  std::memcpy(&dt_bits, &dt, 8);
  const auto dtb = le64(dt_bits);
  bytes.insert(bytes.end(), dtb.begin(), dtb.end());
  bytes.push_back(2);  // unstructured
  const std::size_t header = bytes.size();
  bytes.resize(header + 1000, 0);
  const std::uint64_t expected_end = header + n * nt * 8;
  CHECK(header == 37);
  CHECK_THROWS_WITH_AS(decode_dataset(bytes),
                       doctest::Contains(("expected " + std::to_string(expected_end) + " bytes").c_str()),
                       FormatError);
}

TEST_CASE("csv parsing and import") {
  testutil::TempDir dir("csv");
  const std::string text = "a,\"b,c\",d\r\n1,2,3\r\n4,5e-1,-6\n";
  const CsvTable t = parse_csv(text, true);
  CHECK(t.header == std::vector<std::string>{"a", "b,c", "d"});
  REQUIRE(t.values.rows() == 2);
  CHECK(t.values(1, 1) == 0.5);

  CHECK_THROWS_WITH_AS(parse_csv("1,2\n3\n", false), doctest::Contains("line 2"), FormatError);
  CHECK_THROWS_WITH_AS(parse_csv("1,2\n3,x\n", false), doctest::Contains("line 2"), FormatError);
  CHECK_THROWS_AS(parse_csv("\"1,2\n", false), FormatError);

  const Matrix m = testutil::random_matrix(3, 5, 8);
  write_csv(dir / "m.csv", m, numbered("c", 5));
  const CsvTable back = read_csv(dir / "m.csv", true);
  CHECK(back.values == m);
  CHECK(back.header.front() == "c_1");

  const SnapshotMatrix space = csv_import(dir / "m.csv", CsvLayout::kRowsAreSpace, true, 0.5);
  CHECK(space.values == m);
  const SnapshotMatrix time = csv_import(dir / "m.csv", CsvLayout::kRowsAreTime, true, 0.5);
  CHECK(time.values == m.transpose());
  CHECK(time.dt == 0.5);
  CHECK(parse_csv_layout("rows=time") == CsvLayout::kRowsAreTime);
  CHECK_THROWS_AS(parse_csv_layout("cols"), ContractViolation);
}

TEST_CASE("surrogate configs round-trip through JSON and reject unknown keys") {
  LaminarSurrogateConfig lc;
  lc.seed = 11;
  lc.n_t = 400;
  const LaminarSurrogateConfig lb = LaminarSurrogateConfig::from_json(lc.to_json());
  CHECK(lb.seed == 11);
  CHECK(lb.n_t == 400);
  CHECK(lb.to_json() == lc.to_json());
  TurbulentSurrogateConfig tc;
  CHECK(TurbulentSurrogateConfig::from_json(tc.to_json()).to_json() == tc.to_json());
  CHECK_THROWS_AS(LaminarSurrogateConfig::from_json("{\"nx\": 4}"), FormatError);
  std::string extra = lc.to_json();
  extra.insert(1, "\"bogus\": 1,");
  CHECK_THROWS_AS(LaminarSurrogateConfig::from_json(extra), FormatError);
}
