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

// Acceptance run. Each criterion prints one PASS/FAIL line with the measured
// numbers; the exit status is nonzero if any selected criterion fails.
//
//   acceptance                 run everything
//   acceptance --criterion 5   run one (repeatable)
//   acceptance --list

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "CLI11.hpp"
#include "latentlens/data.hpp"
#include "latentlens/decomp.hpp"
#include "latentlens/hash.hpp"
#include "latentlens/pod.hpp"
#include "latentlens/presets.hpp"
#include "latentlens/spectral.hpp"
#include "latentlens/training.hpp"

using namespace latentlens;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void progress(const std::string& text) { std::fprintf(stderr, "  .. %s\n", text.c_str()); }

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(gen);
  }
  return m;
}

Matrix centred(Matrix m) {
  m.colwise() -= m.rowwise().mean();
  return m;
}

Vector random_weights(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(0.5, 2.0);
  Vector w(n);
  for (Eigen::Index i = 0; i < n; ++i) w(i) = dist(gen);
  return w;
}

Matrix orthonormal_columns(const Matrix& a) {
  return a.householderQr().householderQ() * Matrix::Identity(a.rows(), a.cols());
}

// Largest principal angle (radians) between two column spans, from the
// singular values of the product of orthonormal bases.
double largest_angle(const Matrix& a, const Matrix& b) {
  const Matrix qa = orthonormal_columns(a), qb = orthonormal_columns(b);
  Eigen::JacobiSVD<Matrix> svd(qa.transpose() * qb);
  return std::acos(std::clamp(svd.singularValues().minCoeff(), -1.0, 1.0));
}

// Independent weighted POD: SVD of W^{1/2} Q / sqrt(N_t - 1).
struct SvdPod {
  Vector eigenvalues;
  Matrix modes;
};

SvdPod svd_pod(const Matrix& q, const Vector& w) {
  const Matrix scaled = w.cwiseSqrt().asDiagonal() * q / std::sqrt(static_cast<double>(q.cols() - 1));
  Eigen::JacobiSVD<Matrix> svd(scaled, Eigen::ComputeThinU);
  return {svd.singularValues().array().square(), svd.matrixU()};
}

struct RandomCase {
  Matrix q;
  Vector w;
};

std::vector<RandomCase> random_cases() {
  std::vector<RandomCase> out;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Eigen::Index n = 6 + static_cast<Eigen::Index>((s * 7) % 40);
    const Eigen::Index nt = n + 20 + 13 * static_cast<Eigen::Index>(s);
    out.push_back({centred(random_matrix(n, nt, 1000 + s)), random_weights(n, 2000 + s)});
  }
  return out;
}

Matrix rank3_dataset() {
  const Matrix basis = orthonormal_columns(random_matrix(32, 3, 41));
  Matrix coeffs = random_matrix(3, 600, 42);
  for (Eigen::Index i = 0; i < 3; ++i) coeffs.row(i) *= 3.0 - static_cast<double>(i);
  return centred(basis * coeffs);
}

const SnapshotMatrix& laminar() {
  static const SnapshotMatrix q = generate_laminar(LaminarSurrogateConfig{});
  return q;
}

constexpr std::size_t kTurbulentSnapshots = 8192;
// Two complete cosine cycles (50 + 100 epochs) of the turbulent presets.
constexpr std::size_t kTurbulentEpochs = 150;

const SnapshotMatrix& turbulent() {
  static const SnapshotMatrix q = [] {
    TurbulentSurrogateConfig cfg;
    cfg.n_t = kTurbulentSnapshots;
    return generate_turbulent(cfg);
  }();
  return q;
}

ArchitectureConfig preset(const std::string& name) { return ArchitectureConfig::from_json(preset_json(name)); }

struct Trained {
  Network net;
  TrainReport report;
};

// Runs of the same preset and seed are shared between criteria in one process.
const Trained& trained(const std::string& preset_name, std::uint64_t seed, const SnapshotMatrix& q,
                       std::size_t epochs = 0) {
  static std::map<std::string, Trained> cache;
  const std::string key = preset_name + "/" + std::to_string(seed) + "/" + std::to_string(q.nt()) + "/" +
                          std::to_string(epochs);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  ArchitectureConfig cfg = preset(preset_name);
  cfg.train.seed = seed;
  if (epochs > 0) cfg.train.epochs = epochs;
  const auto t0 = std::chrono::steady_clock::now();
  Network net = initialise_network(cfg, q.n());
  TrainReport report = train(net, q.values, cfg.train);
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  progress(preset_name + " seed " + std::to_string(seed) + ": relative mse " +
           num(report.final_mse / report.field_variance) + " in " + num(sec) + " s");
  return cache.emplace(key, Trained{std::move(net), std::move(report)}).first->second;
}

double relative_mse(const TrainReport& r) { return r.final_mse / r.field_variance; }

// ---------------------------------------------------------------------------

// sin of the largest principal angle between the spans of two matrices with
// orthonormal columns.
double largest_angle_sine(const Matrix& qa, const Matrix& qb) {
  Eigen::JacobiSVD<Matrix> svd(qb - qa * (qa.transpose() * qb));
  return std::min(1.0, svd.singularValues()(0));
}

Outcome pod_matches_svd() {
  double eig_err = 0.0, angle = 0.0;
  std::size_t subspaces = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (const RandomCase& c : random_cases()) {
    const PodBasis b = compute_pod(c.q, c.w);
    const SvdPod o = svd_pod(c.q, c.w);
    if (b.rank() != static_cast<std::size_t>(o.eigenvalues.size())) {
      return {false, "rank " + std::to_string(b.rank()) + " differs from SVD rank " + std::to_string(o.eigenvalues.size())};
    }
    const Eigen::Index r = o.eigenvalues.size();
    for (Eigen::Index k = 0; k < r; ++k) {
      eig_err = std::max(eig_err, std::abs(b.eigenvalues(k) - o.eigenvalues(k)) / o.eigenvalues(k));
    }
    // Leading k-mode subspaces, wherever the k-th gap separates them.
    for (Eigen::Index k = 1; k < r; ++k) {
      if (o.eigenvalues(k - 1) - o.eigenvalues(k) < 1e-6 * o.eigenvalues(0)) continue;
      angle = std::max(angle, std::asin(largest_angle_sine(b.modes.leftCols(k), o.modes.leftCols(k))));
      ++subspaces;
    }
  }
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = eig_err < 1e-8 && angle < 1e-6 && sec < 10.0;
  return {pass, "20 random weighted matrices: max eigenvalue error " + num(eig_err) + " (< 1e-8), largest angle over " +
                    std::to_string(subspaces) + " leading subspaces " + num(angle) + " rad (< 1e-6), " + num(sec) +
                    " s (< 10)"};
}

Outcome full_rank_reconstruction() {
  std::vector<std::pair<std::string, std::pair<Matrix, Vector>>> sets;
  std::size_t i = 0;
  for (RandomCase& c : random_cases()) sets.push_back({"random-" + std::to_string(i++), {c.q, c.w}});
  for (std::uint64_t seed : {0, 1}) {
    LaminarSurrogateConfig cfg;
    cfg.seed = seed;
    const SnapshotMatrix q = generate_laminar(cfg);
    sets.push_back({"laminar-seed" + std::to_string(seed), {q.values, q.weights()}});
  }
  {
    const SnapshotMatrix q = generate_turbulent(TurbulentSurrogateConfig{});
    sets.push_back({"turbulent", {q.values, q.weights()}});
    TurbulentSurrogateConfig clean;
    clean.noise_floor = 0.0;
    const SnapshotMatrix c = generate_turbulent(clean);
    sets.push_back({"turbulent-noise-free", {c.values, c.weights()}});
  }
  sets.push_back({"rank-3", {rank3_dataset(), Vector::Ones(32)}});

  double worst = 0.0;
  std::string worst_name;
  for (const auto& [name, data] : sets) {
    const PodBasis b = compute_pod(data.first, data.second);
    const double err = (data.first - reconstruct(b, b.rank())).norm() / data.first.norm();
    if (err >= worst) {
      worst = err;
      worst_name = name;
    }
  }
  return {worst < 1e-10, std::to_string(sets.size()) + " datasets: worst relative reconstruction error " + num(worst) +
                             " (" + worst_name + ", < 1e-10)"};
}

double rel_err(double analytic, double fd) {
  return std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-6});
}

Outcome gradients_and_jacobian() {
  ArchitectureConfig cfg;
  cfg.name = "acceptance-64-28-64";
  cfg.latent_dim = 28;
  SeededRng init(3);
  const Network net = Network::build(cfg, 64, init);

  // Encoder and decoder layers as one stack: L = sum(C .* F(x)).
  std::vector<Layer> layers = net.encoder().layers();
  for (const Layer& l : net.decoders().front().layers()) layers.push_back(l);
  Stack s(64, layers);
  const Matrix x = random_matrix(64, 16, 4);
  const Matrix c = random_matrix(64, 16, 5);
  auto loss = [&](const Stack& st, const Matrix& in) { return st.forward(in, Pass::kEval).cwiseProduct(c).sum(); };
  Tape tape;
  s.forward(x, Pass::kEval, nullptr, &tape);
  std::vector<Matrix> grads = s.zero_grads();
  const Matrix dx = s.backward(tape, c, &grads);

  SeededRng pick(6);
  std::vector<std::size_t> trainable;
  for (std::size_t k = 0; k < s.layers().size(); ++k) {
    if (s.layers()[k].param.size() > 0) trainable.push_back(k);
  }
  double param_worst = 0.0, input_worst = 0.0;
  for (int p = 0; p < 100; ++p) {
    const std::size_t k = trainable[pick.below(trainable.size())];
    Matrix& w = s.layers()[k].param;
    const auto idx = static_cast<Eigen::Index>(pick.below(static_cast<std::uint64_t>(w.size())));
    const double orig = w.data()[idx];
    const double h = 1e-5 * std::max(1.0, std::abs(orig));
    w.data()[idx] = orig + h;
    const double up = loss(s, x);
    w.data()[idx] = orig - h;
    const double down = loss(s, x);
    w.data()[idx] = orig;
    param_worst = std::max(param_worst, rel_err(grads[k].data()[idx], (up - down) / (2 * h)));
  }
  for (int p = 0; p < 100; ++p) {
    const auto idx = static_cast<Eigen::Index>(pick.below(static_cast<std::uint64_t>(x.size())));
    Matrix xp = x, xm = x;
    const double h = 1e-5 * std::max(1.0, std::abs(x.data()[idx]));
    xp.data()[idx] += h;
    xm.data()[idx] -= h;
    input_worst = std::max(input_worst, rel_err(dx.data()[idx], (loss(s, xp) - loss(s, xm)) / (2 * h)));
  }

  // Decoder Jacobian against central differences with dz = 1e-4 std(Z_i).
  const Matrix z = net.encode(random_matrix(64, 200, 7));
  const LatentSeries lat = LatentSeries::from(z);
  double jac_worst = 0.0;
  for (int p = 0; p < 100; ++p) {
    const auto t = static_cast<Eigen::Index>(pick.below(200));
    const auto i = static_cast<Eigen::Index>(pick.below(28));
    const Vector z0 = z.col(t);
    const Matrix jac = net.decoder_jacobian(z0);
    const double dz = 1e-4 * lat.sigma(i);
    Vector zp = z0, zm = z0;
    zp(i) += dz;
    zm(i) -= dz;
    const Vector fd = (net.decode(zp) - net.decode(zm)) / (2 * dz);
    jac_worst = std::max(jac_worst, (fd - jac.col(i)).norm() / jac.col(i).norm());
  }
  const bool pass = param_worst < 1e-5 && input_worst < 1e-5 && jac_worst < 1e-4;
  return {pass, "64-28-64 tanh AE, 100 probes each: parameter gradient error " + num(param_worst) +
                    ", input gradient error " + num(input_worst) + " (< 1e-5), decoder Jacobian error " +
                    num(jac_worst) + " (< 1e-4)"};
}

Outcome linear_ae_spans_pod() {
  const Matrix q = rank3_dataset();
  ArchitectureConfig cfg;
  cfg.name = "acceptance-linear";
  cfg.latent_dim = 3;
  cfg.activation = Activation::kIdentity;
  cfg.latent_activation = Activation::kIdentity;
  cfg.train.learning_rate = 0.01;
  cfg.train.schedule.kind = ScheduleKind::kConstant;
  // The gauge freedom W -> G W, W_hat -> W_hat G^-1 is damped only by the
  // L2 term, so orthogonality converges at a rate set by gamma.
  cfg.train.l2_gamma = 3e-4;
  cfg.train.epochs = 1500;
  cfg.train.batch_size = 32;
  Network net = initialise_network(cfg, 32);
  const TrainReport r = train(net, q, cfg.train);
  const PodBasis pod = compute_pod(q, Vector::Ones(32));
  const Matrix& w_dec = net.decoders()[0].layers().back().param;
  const Matrix& w_enc = net.encoder().layers().front().param;
  const double angle = largest_angle(w_dec, pod.modes.leftCols(3)) * 180.0 / std::numbers::pi;
  const double ortho = (w_enc * w_enc.transpose() - Matrix::Identity(3, 3)).norm();
  const double ortho_dec = (w_dec.transpose() * w_dec - Matrix::Identity(3, 3)).norm();
  const bool pass = angle < 1.0 && ortho < 0.05;
  return {pass, "rank-3 data, gamma " + num(cfg.train.l2_gamma) + ": largest principal angle " + num(angle) + " deg (< 1), |W W^T - I| " +
                    num(ortho) + " (< 0.05), decoder |W^T W - I| " + num(ortho_dec) + ", relative mse " +
                    num(relative_mse(r))};
}

Outcome laminar_loop() {
  const SnapshotMatrix& q = laminar();
  const Trained& t = trained("laminar-ae-nz2", 0, q);
  const double rel = relative_mse(t.report);
  const Matrix z = t.net.encode(q.values);

  // Radius of the std-normalised, centred latent trajectory.
  Matrix zn = centred(z);
  for (Eigen::Index i = 0; i < zn.rows(); ++i) {
    zn.row(i) /= std::sqrt(zn.row(i).squaredNorm() / static_cast<double>(zn.cols()));
  }
  const Vector r = zn.colwise().norm().transpose();
  const double mean_r = r.mean();
  const double variation = (r.array() - mean_r).abs().maxCoeff() / mean_r;
  const double cv = std::sqrt((r.array() - mean_r).square().mean()) / mean_r;

  bool peaks_ok = true;
  std::string peaks;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const Spectrum s = fft_magnitude(z.row(i), q.dt);
    const auto expected = static_cast<std::size_t>(std::lround(0.23 / s.resolution()));
    const std::size_t bin = dominant_bin(s);
    peaks_ok = peaks_ok && bin == expected;
    peaks += (i ? ", " : "") + std::string("z") + std::to_string(i + 1) + " peak St " + num(s.frequency(static_cast<Eigen::Index>(bin)));
  }
  const bool pass = rel < 1e-3 && variation < 0.1 && peaks_ok;
  return {pass, "relative mse " + num(rel) + " (< 1e-3), loop radius variation " + num(variation) +
                    " (< 0.1; rms variation " + num(cv) + "), " + peaks + " (St 0.23 bin " +
                    (peaks_ok ? "ok" : "missed") + ")"};
}

Outcome single_latent_harmonics() {
  const SnapshotMatrix& q = laminar();
  double mse1 = 0.0, mse2 = 0.0;
  Spectrum mean_spectrum;
  for (std::uint64_t seed : {0, 1, 2}) {
    const Trained& one = trained("laminar-ae-nz1", seed, q);
    const Trained& two = trained("laminar-ae-nz2", seed, q);
    mse1 += one.report.final_mse / 3.0;
    mse2 += two.report.final_mse / 3.0;
    const Spectrum s = fft_magnitude(one.net.encode(q.values), q.dt, true);
    if (mean_spectrum.size() == 0) {
      mean_spectrum = s;
      mean_spectrum.value.setZero();
    }
    mean_spectrum.value += s.value / 3.0;
  }
  const double highest_harmonic = 3 * 0.23;
  double above = 0.0;
  for (std::size_t k : find_peaks(mean_spectrum, 0.05)) {
    const double f = mean_spectrum.frequency(static_cast<Eigen::Index>(k));
    if (f > highest_harmonic + mean_spectrum.resolution()) above = std::max(above, f);
  }
  const bool pass = mse1 > 5.0 * mse2 && above > 0.0;
  return {pass, "seed-averaged mse N_z=1 " + num(mse1) + " vs N_z=2 " + num(mse2) + " (ratio " + num(mse1 / mse2) +
                    ", > 5); N_z=1 latent spectrum " +
                    (above > 0.0 ? "has a peak at St " + num(above) : std::string("has no peak")) +
                    " above the highest harmonic St " + num(highest_harmonic)};
}

PodBasis identity_basis(Eigen::Index n) {
  PodBasis b;
  b.modes = Matrix::Identity(n, n);
  b.eigenvalues = Vector::Ones(n);
  b.weights = Vector::Ones(n);
  return b;
}

double gap(const Matrix& a, const Matrix& b) {
  const double scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double d = std::abs(a.data()[i] - b.data()[i]);
    worst = std::max(worst, d / std::max({std::abs(a.data()[i]), std::abs(b.data()[i]), 1e-9 * scale}));
  }
  return worst;
}

Outcome sensitivity_routes() {
  SensitivityOptions rev, fd;
  fd.method = SensitivityMethod::kCentralDifference;

  // Linear decoder: epsilon_ij = |(Phi^T D)_ji| / sigma(Z_i).
  ArchitectureConfig lin;
  lin.name = "acceptance-linear-decoder";
  lin.mode = NetworkMode::kDecoderOnly;
  lin.latent_dim = 3;
  lin.activation = Activation::kIdentity;
  SeededRng rng(8);
  Network linear = Network::build(lin, 20, rng);
  const Matrix d = random_matrix(20, 3, 9);
  linear.decoders()[0].layers()[0].param = d;
  const PodBasis basis = compute_pod(centred(random_matrix(20, 120, 10)), random_weights(20, 11));
  Matrix zl = random_matrix(3, 300, 12);
  zl.row(1) *= 0.1;
  zl.row(2) *= 7.0;
  const LatentSeries lat = LatentSeries::from(zl);
  const Matrix want = (basis.modes.transpose() * d).cwiseAbs().transpose().array().colwise() / lat.sigma.array();
  const double lin_rev = gap(sensitivities(linear, lat, basis, rev).epsilon, want);
  const double lin_fd = gap(sensitivities(linear, lat, basis, fd).epsilon, want);

  // Block decoder: latent 1 drives outputs 1-2, latent 2 drives outputs 3-4.
  ArchitectureConfig blk = lin;
  blk.latent_dim = 2;
  blk.activation = Activation::kTanh;
  blk.decoder = {{LayerKind::kDense, 10, std::nullopt}, {LayerKind::kTanh, 0, std::nullopt}};
  Network block = Network::build(blk, 4, rng);
  Matrix w1 = Matrix::Zero(10, 2), w2 = Matrix::Zero(4, 10);
  w1.block(0, 0, 5, 1) = random_matrix(5, 1, 13);
  w1.block(5, 1, 5, 1) = random_matrix(5, 1, 14);
  w2.block(0, 0, 2, 5) = random_matrix(2, 5, 15);
  w2.block(2, 5, 2, 5) = random_matrix(2, 5, 16);
  block.decoders()[0].layers()[0].param = w1;
  block.decoders()[0].layers()[2].param = w2;
  const LatentSeries blat = LatentSeries::from(random_matrix(2, 60, 17) * 0.5);
  double cross = 0.0, diag = 1e300;
  for (const SensitivityOptions& o : {rev, fd}) {
    const Matrix e = sensitivities(block, blat, identity_basis(4), o).epsilon;
    cross = std::max({cross, e(0, 2), e(0, 3), e(1, 0), e(1, 1)});
    diag = std::min({diag, e(0, 0), e(0, 1), e(1, 2), e(1, 3)});
  }

  // Tanh decoders from the presets, at random initialisation.
  double tanh_gap = 0.0;
  for (const char* name : {"laminar-ae-nz3", "laminar-mdae-nz2", "turbulent-ae-nz3", "turbulent-large-decoder"}) {
    const ArchitectureConfig cfg = preset(name);
    const std::size_t width = 64;
    Network net = Network::build(cfg, width, rng);
    const PodBasis b = compute_pod(centred(random_matrix(64, 150, 18)), random_weights(64, 19));
    const auto nz = static_cast<Eigen::Index>(cfg.latent_dim);
    const LatentSeries zs = LatentSeries::from(random_matrix(nz, 80, 22) * 0.5);
    tanh_gap = std::max(tanh_gap, gap(sensitivities(net, zs, b, rev).epsilon, sensitivities(net, zs, b, fd).epsilon));
  }
  const bool pass = lin_rev < 1e-10 && cross == 0.0 && diag > 0.0 && tanh_gap < 1e-3;
  return {pass, "linear decoder |W|/sigma error " + num(lin_rev) + " (< 1e-10; finite differences " + num(lin_fd) +
                    "), block decoder cross-block epsilon max " + num(cross) + " (exactly 0, in-block min " +
                    num(diag) + "), reverse vs central difference on 4 tanh decoders " + num(tanh_gap) + " (< 1e-3)"};
}

Outcome equivalent_energy_identity() {
  // B = A on the laminar surrogate (uniform weights).
  const SnapshotMatrix& lam = laminar();
  const PodBasis lp = compute_pod(lam);
  const EquivalentEnergy a = equivalent_energy_from_coefficients(lp.coeffs, lp.eigenvalues);
  const double lam_err = (a.energy - lp.eigenvalues).cwiseAbs().maxCoeff() / lp.eigenvalues(0);

  // Weighted form with Y_hat = Q on the area-weighted turbulent surrogate.
  const SnapshotMatrix& tur = turbulent();
  const PodBasis tp = compute_pod(tur);
  const EquivalentEnergy w = equivalent_energy(tur.values, tp);
  const double tur_err = (w.energy - tp.eigenvalues).cwiseAbs().maxCoeff() / tp.eigenvalues(0);

  // Identity weights: weighted form against phi_j^T cov(Y_hat) phi_j.
  const Matrix q = centred(random_matrix(24, 200, 20));
  const PodBasis up = compute_pod(q, Vector::Ones(24));
  const Matrix y = q + 0.3 * random_matrix(24, 200, 21);
  const EquivalentEnergy e = equivalent_energy(y, up);
  const Matrix cov = y * y.transpose() / 199.0;
  double id_err = 0.0;
  for (Eigen::Index j = 0; j < e.energy.size(); ++j) {
    const double want = up.modes.col(j).dot(cov * up.modes.col(j));
    id_err = std::max(id_err, std::abs(e.energy(j) - want) / e.energy.maxCoeff());
  }
  const bool pass = lam_err < 1e-10 && tur_err < 1e-10 && id_err < 1e-10;
  return {pass, "B = A: laminar " + num(lam_err) + ", weighted turbulent " + num(tur_err) +
                    "; identity weights vs unweighted projection " + num(id_err) + " (all < 1e-10, relative to the largest)"};
}

double band_peak(const Spectrum& s, double centre) {
  return s.value(static_cast<Eigen::Index>(peak_in_band(s, 0.75 * centre, 1.25 * centre)));
}

Outcome turbulent_filter() {
  const SnapshotMatrix& q = turbulent();
  const Vector weights = q.weights();
  const PodBasis pod = compute_pod(q);
  const Trained& t = trained("turbulent-ae-nz28", 0, q, kTurbulentEpochs);
  const Matrix z = t.net.encode(q.values);
  SensitivityOptions o;
  o.keep_tensor = false;
  o.n_modes = 3;
  const SensitivityReport rep = sensitivities(t.net, LatentSeries::from(z), pod, o);
  const auto order = rank_latents(rep.epsilon, {0, 1});
  const std::vector<std::size_t> keep{order[0], order[1]};
  const FilteredOutput f = filter_latents(t.net, z, keep);

  Matrix yf = centred(f.y);
  const PodBasis fp = compute_pod(yf, weights);
  const double leading = (fp.eigenvalues(0) + (fp.rank() > 1 ? fp.eigenvalues(1) : 0.0)) / fp.eigenvalues.sum();

  const double fs = 1.0 / q.dt;
  const Spectrum before = premultiply(welch_psd(t.net.decode(z), fs, 1024, 512, Window::kHann, &weights));
  const Spectrum after = premultiply(welch_psd(f.y, fs, 1024, 512, Window::kHann, &weights));
  const double suppression = 10.0 * std::log10(band_peak(before, 0.06) / band_peak(after, 0.06));
  const double retain_loss = 10.0 * std::log10(band_peak(before, 0.2) / band_peak(after, 0.2));
  const bool pass = leading > 0.9 && suppression >= 10.0 && retain_loss < 3.0;
  return {pass, "N_z=28 (relative mse " + num(relative_mse(t.report)) + "), kept z" + std::to_string(keep[0] + 1) +
                    " and z" + std::to_string(keep[1] + 1) + ": leading two modes hold " + fixed2(100 * leading) +
                    "% (> 90%), St 0.06 suppressed by " + num(suppression) + " dB (>= 10), St 0.2 changed by " +
                    num(retain_loss) + " dB (< 3)"};
}

Outcome large_decoder() {
  const SnapshotMatrix& q = turbulent();
  double base = 0.0, big = 0.0, three = 0.0;
  for (std::uint64_t seed : {0, 1, 2}) {
    const Trained& ae2 = trained("turbulent-ae-nz2", seed, q, kTurbulentEpochs);
    const Trained& ae3 = trained("turbulent-ae-nz3", seed, q, kTurbulentEpochs);
    ArchitectureConfig cfg = preset("turbulent-large-decoder");
    cfg.train.seed = seed;
    cfg.train.epochs = kTurbulentEpochs;
    Network dec = initialise_network(cfg, q.n());
    const TrainReport r = train_decoder(dec, ae2.net.encode(q.values), q.values, cfg.train);
    progress("large decoder seed " + std::to_string(seed) + ": relative mse " + num(relative_mse(r)));
    base += ae2.report.final_mse / 3.0;
    three += ae3.report.final_mse / 3.0;
    big += r.final_mse / 3.0;
  }
  const double reduction = (base - big) / base;
  const bool pass = reduction >= 0.2 && big <= 2.0 * three;
  return {pass, "seed-averaged mse: N_z=2 AE " + num(base) + ", large decoder on frozen latents " + num(big) +
                    " (reduction " + num(100 * reduction) + "%, >= 20%), N_z=3 AE " + num(three) +
                    " (large decoder within " + num(big / three) + "x, <= 2x)"};
}

#ifndef LATENTLENS_CLI_PATH
#define LATENTLENS_CLI_PATH "latentlens"
#endif

std::map<std::string, std::string> hash_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const std::string name = e.path().filename().string();
    if (name.size() >= 13 && name.compare(name.size() - 13, 13, "manifest.json") == 0) continue;
    out[fs::relative(e.path(), root).string()] = sha256_hex(read_file(e.path()));
  }
  return out;
}

Outcome cli_determinism() {
  const std::vector<std::string> recipe{
      "generate laminar --seed 3 -o lam.snap",
      "generate turbulent --nt 2048 -o tur.snap",
      "pod lam.snap --out lam-pod",
      "pod tur.snap --out tur-pod",
      "--threads 2 train lam.snap --preset laminar-ae-nz2 --epochs 20 --seeds 0,1 --out lam-run",
      "train lam.snap --preset laminar-mdae-nz2 --epochs 10 --out lam-md",
      "decompose lam-run/seed-0 --pod lam-pod --method both --write-tensor --out lam-dec",
      "rank lam-dec --target-modes 1,2 --out lam-rank",
      "train tur.snap --preset turbulent-ae-nz3 --epochs 3 --out tur-run",
      "train tur.snap --preset turbulent-ae-nz2 --epochs 2 --out tur-nz2",
      "train tur.snap --preset turbulent-large-decoder --latents tur-nz2/latents.csv --epochs 2 --out tur-big",
      "filter tur-run --pod tur-pod --keep top2 --write-field --out tur-filter",
      "spectrum tur.snap --kind premultiplied --segment 512 --out tur-spec",
      "spectrum lam-run/seed-0/latents.csv --kind fft --std-normalize --out lam-spec",
      "plot lam-pod/energy.csv --columns 2,3 --log-y -o energy.svg",
      "plot tur-pod/modes.csv --modes 1,2,3 -o modes.svg",
  };
  const fs::path root = fs::temp_directory_path() / ("latentlens-acceptance-" + std::to_string(std::random_device{}()));
  std::vector<std::map<std::string, std::string>> trees;
  std::string failure;
  for (const char* side : {"a", "b"}) {
    const fs::path dir = root / side;
    fs::create_directories(dir);
    for (const std::string& step : recipe) {
      const std::string cmd = "cd '" + dir.string() + "' && '" LATENTLENS_CLI_PATH "' -q " + step + " > cli.log 2>&1";
      if (std::system(cmd.c_str()) != 0 && failure.empty()) failure = step;
    }
    fs::remove(dir / "cli.log");
    trees.push_back(hash_tree(dir));
  }
  std::error_code ec;
  fs::remove_all(root, ec);
  if (!failure.empty()) return {false, "recipe step failed: " + failure};

  std::size_t differing = 0;
  std::string first;
  for (const auto& [path, digest] : trees[0]) {
    auto it = trees[1].find(path);
    if (it == trees[1].end() || it->second != digest) {
      if (first.empty()) first = path;
      ++differing;
    }
  }
  differing += trees[1].size() > trees[0].size() ? trees[1].size() - trees[0].size() : 0;
  const bool pass = differing == 0 && !trees[0].empty();
  return {pass, std::to_string(recipe.size()) + " CLI steps run twice: " + std::to_string(trees[0].size()) +
                    " artifacts compared, " + std::to_string(differing) + " differ" +
                    (first.empty() ? "" : " (first: " + first + ")") + "; manifests excluded"};
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
  double max_seconds = 0.0;  // 0: no runtime bound
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list{
      {1, "weighted POD matches an independent SVD", pod_matches_svd},
      {2, "full-rank POD reconstruction", full_rank_reconstruction},
      {3, "backward pass and decoder Jacobian", gradients_and_jacobian, 30},
      {4, "linear AE spans the POD subspace", linear_ae_spans_pod, 120},
      {5, "laminar N_z=2 latent loop", laminar_loop, 300},
      {6, "laminar N_z=1 harmonics", single_latent_harmonics},
      {7, "sensitivity routes and oracles", sensitivity_routes},
      {8, "equivalent energy identities", equivalent_energy_identity},
      {9, "turbulent latent filter", turbulent_filter, 900},
      {10, "large decoder on frozen latents", large_decoder},
      {11, "CLI determinism", cli_determinism},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> selected;
  bool list = false;
  app.add_option("--criterion", selected, "Criterion number (repeatable)")->check(CLI::Range(1, 11));
  app.add_flag("--list", list, "List the criteria");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const Criterion& c : criteria()) std::printf("%2d  %s\n", c.id, c.title);
    return 0;
  }
  int failed = 0;
  for (const Criterion& c : criteria()) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.max_seconds > 0.0 && sec >= c.max_seconds) {
      o.pass = false;
      o.detail += "; runtime over the " + num(c.max_seconds) + " s bound";
    }
    std::printf("criterion %2d %s  %s: %s [%.1f s]\n", c.id, o.pass ? "PASS" : "FAIL", c.title, o.detail.c_str(), sec);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
