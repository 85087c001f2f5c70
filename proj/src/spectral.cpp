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

#include "latentlens/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include "latentlens/error.hpp"

namespace latentlens {
namespace {

// FFTW planning is not thread-safe; execution on distinct arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
    if (!plan_) throw NumericalError("fft: planning failed for length " + std::to_string(n));
  }
  ~RealFft() {
    {
      std::lock_guard<std::mutex> lock(planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_; }
  void run() { fftw_execute(plan_); }
  double abs2(std::size_t k) const { return out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1]; }
  double abs(std::size_t k) const { return std::sqrt(abs2(k)); }

 private:
  std::size_t n_;
  double* in_;
  fftw_complex* out_;
  fftw_plan plan_;
};

std::vector<double> window_values(Window w, std::size_t n) {
  std::vector<double> v(n, 1.0);
  if (w == Window::kHann && n > 1) {
    // Periodic Hann, the usual choice for spectral estimation.
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    }
  }
  return v;
}

Vector one_sided_frequencies(std::size_t n, double dt) {
  Vector f(static_cast<Eigen::Index>(n / 2 + 1));
  for (Eigen::Index k = 0; k < f.size(); ++k) f(k) = static_cast<double>(k) / (static_cast<double>(n) * dt);
  return f;
}

}  // namespace

Window parse_window(std::string_view text) {
  if (text == "none") return Window::kNone;
  if (text == "hann") return Window::kHann;
  throw ContractViolation("unknown window '" + std::string(text) + "' (use none or hann)");
}

std::string_view to_string(Window w) { return w == Window::kHann ? "hann" : "none"; }

double uniform_interval(const std::vector<double>& times) {
  require(times.size() >= 2, "uniform_interval: need at least 2 samples");
  const double dt = times[1] - times[0];
  require(dt > 0, "uniform_interval: times must increase");
  for (std::size_t i = 2; i < times.size(); ++i) {
    const double step = times[i] - times[i - 1];
    if (std::abs(step - dt) > 1e-9 * std::abs(dt)) {
      throw ContractViolation("non-uniform sampling: interval " + std::to_string(i - 1) + " is " +
                              std::to_string(step) + ", expected " + std::to_string(dt));
    }
  }
  return dt;
}

Spectrum fft_magnitude(const Matrix& signals, double dt, bool normalize_by_std, Window window) {
  require(std::isfinite(dt) && dt > 0, "fft_magnitude: dt must be positive");
  const auto n = static_cast<std::size_t>(signals.cols());
  require(n >= 4, "fft_magnitude: need at least 4 samples");
  require(signals.rows() >= 1 && all_finite(signals), "fft_magnitude: signals must be non-empty and finite");

  const std::vector<double> w = window_values(window, n);
  double wsum = 0.0;
  for (double v : w) wsum += v;
  RealFft fft(n);
  Spectrum s;
  s.frequency = one_sided_frequencies(n, dt);
  s.value = Vector::Zero(s.frequency.size());
  s.kind = SpectrumKind::kFftMagnitude;
  s.window = window;
  s.segment_length = n;
  s.std_normalized = normalize_by_std;
  for (Eigen::Index r = 0; r < signals.rows(); ++r) {
    double scale = 1.0;
    if (normalize_by_std) {
      const double mean = signals.row(r).mean();
      const double sd = std::sqrt((signals.row(r).array() - mean).square().mean());
      if (sd == 0.0) continue;
      scale = 1.0 / sd;
    }
    for (std::size_t i = 0; i < n; ++i) fft.input()[i] = signals(r, static_cast<Eigen::Index>(i)) * scale * w[i];
    fft.run();
    for (Eigen::Index k = 0; k < s.value.size(); ++k) {
      const bool edge = k == 0 || (n % 2 == 0 && static_cast<std::size_t>(k) == n / 2);
      s.value(k) += fft.abs(static_cast<std::size_t>(k)) * (edge ? 1.0 : 2.0) / wsum;
    }
  }
  return s;
}

Spectrum welch_psd(const Matrix& signals, double fs, std::size_t segment_length, std::size_t overlap,
                   Window window, const Vector* channel_weights) {
  require(std::isfinite(fs) && fs > 0, "welch_psd: fs must be positive");
  require(segment_length >= 2, "welch_psd: segment length must be at least 2");
  require(overlap < segment_length, "welch_psd: overlap must be smaller than the segment length");
  const auto n = static_cast<std::size_t>(signals.cols());
  require(segment_length <= n, "welch_psd: segment length " + std::to_string(segment_length) +
                                   " exceeds signal length " + std::to_string(n));
  require(signals.rows() >= 1 && all_finite(signals), "welch_psd: signals must be non-empty and finite");
  if (channel_weights) {
    require(channel_weights->size() == signals.rows(), "welch_psd: one weight per channel required");
  }

  const std::size_t step = segment_length - overlap;
  const std::size_t segments = 1 + (n - segment_length) / step;
  const std::vector<double> w = window_values(window, segment_length);
  double wss = 0.0;
  for (double v : w) wss += v * v;
  RealFft fft(segment_length);

  Spectrum s;
  s.frequency = one_sided_frequencies(segment_length, 1.0 / fs);
  s.value = Vector::Zero(s.frequency.size());
  s.kind = SpectrumKind::kPsd;
  s.window = window;
  s.segment_length = segment_length;
  s.overlap = overlap;
  s.segments = segments;
  const double density = 1.0 / (fs * wss * static_cast<double>(segments));
  for (Eigen::Index r = 0; r < signals.rows(); ++r) {
    const double cw = channel_weights ? (*channel_weights)(r) : 1.0;
    for (std::size_t seg = 0; seg < segments; ++seg) {
      const auto start = static_cast<Eigen::Index>(seg * step);
      const double mean = signals.row(r).segment(start, static_cast<Eigen::Index>(segment_length)).mean();
      for (std::size_t i = 0; i < segment_length; ++i) {
        fft.input()[i] = (signals(r, start + static_cast<Eigen::Index>(i)) - mean) * w[i];
      }
      fft.run();
      for (Eigen::Index k = 0; k < s.value.size(); ++k) {
        const bool edge = k == 0 || (segment_length % 2 == 0 && static_cast<std::size_t>(k) == segment_length / 2);
        s.value(k) += cw * fft.abs2(static_cast<std::size_t>(k)) * (edge ? 1.0 : 2.0) * density;
      }
    }
  }
  return s;
}

Spectrum premultiply(const Spectrum& s) {
  Spectrum out = s;
  out.value = s.value.cwiseProduct(s.frequency);
  out.kind = SpectrumKind::kPremultipliedPsd;
  return out;
}

Spectrum unpremultiply(const Spectrum& s) {
  Spectrum out = s;
  for (Eigen::Index k = 0; k < s.value.size(); ++k) {
    out.value(k) = s.frequency(k) > 0.0 ? s.value(k) / s.frequency(k) : 0.0;
  }
  out.kind = SpectrumKind::kPsd;
  return out;
}

double band_power(const Spectrum& s, double lo, double hi) {
  require(lo <= hi, "band_power: empty band");
  const double df = s.resolution();
  double sum = 0.0;
  for (Eigen::Index k = 0; k < s.value.size(); ++k) {
    if (s.frequency(k) >= lo && s.frequency(k) <= hi) sum += s.value(k) * df;
  }
  return sum;
}

std::size_t peak_in_band(const Spectrum& s, double lo, double hi) {
  std::size_t best = s.size();
  for (Eigen::Index k = 0; k < s.value.size(); ++k) {
    if (s.frequency(k) < lo || s.frequency(k) > hi) continue;
    if (best == s.size() || s.value(k) > s.value(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(k);
  }
  require(best < s.size(), "peak_in_band: no bins between " + std::to_string(lo) + " and " + std::to_string(hi));
  return best;
}

std::vector<std::size_t> find_peaks(const Spectrum& s, double min_fraction) {
  std::vector<std::size_t> peaks;
  if (s.value.size() < 3) return peaks;
  const double threshold = min_fraction * s.value.maxCoeff();
  for (Eigen::Index k = 1; k + 1 < s.value.size(); ++k) {
    if (s.value(k) > s.value(k - 1) && s.value(k) >= s.value(k + 1) && s.value(k) >= threshold) {
      peaks.push_back(static_cast<std::size_t>(k));
    }
  }
  return peaks;
}

std::size_t dominant_bin(const Spectrum& s) {
  require(s.value.size() >= 2, "dominant_bin: spectrum too short");
  Eigen::Index best = 1;
  for (Eigen::Index k = 2; k < s.value.size(); ++k) {
    if (s.value(k) > s.value(best)) best = k;
  }
  return static_cast<std::size_t>(best);
}

Matrix spectrum_table(const Spectrum& s) {
  Matrix t(s.value.size(), 2);
  t.col(0) = s.frequency;
  t.col(1) = s.value;
  return t;
}

}  // namespace latentlens
