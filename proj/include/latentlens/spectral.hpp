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

// Frequency diagnostics: FFT magnitude spectra summed over signals, Welch
// power spectral density, and premultiplied spectra. Frequencies are in the
// units of 1/dt, which for nondimensional datasets is the Strouhal number.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "latentlens/numerics.hpp"

namespace latentlens {

enum class Window { kNone, kHann };

Window parse_window(std::string_view text);
std::string_view to_string(Window w);

enum class SpectrumKind { kFftMagnitude, kPsd, kPremultipliedPsd };

struct Spectrum {
  Vector frequency;  // strictly increasing, 0 .. Nyquist
  Vector value;
  SpectrumKind kind = SpectrumKind::kFftMagnitude;
  Window window = Window::kNone;
  std::size_t segment_length = 0;
  std::size_t overlap = 0;
  std::size_t segments = 1;
  bool std_normalized = false;

  std::size_t size() const { return static_cast<std::size_t>(frequency.size()); }
  double resolution() const { return frequency.size() > 1 ? frequency(1) - frequency(0) : 0.0; }
};

/// One-sided amplitude spectrum of each row of `signals` (rows = signals,
/// columns = samples), summed over rows. A sinusoid of amplitude a on a bin
/// centre contributes a at that bin; the DC bin holds |mean|. With
/// `normalize_by_std` each row is first divided by its standard deviation.
Spectrum fft_magnitude(const Matrix& signals, double dt, bool normalize_by_std = false,
                       Window window = Window::kNone);

/// Sampling interval of uniformly spaced `times`; throws ContractViolation
/// if spacing varies by more than 1e-9 relative.
double uniform_interval(const std::vector<double>& times);

/// One-sided Welch PSD with constant detrending per segment. Multi-row
/// input sums channel PSDs, optionally weighted per row.
Spectrum welch_psd(const Matrix& signals, double fs, std::size_t segment_length, std::size_t overlap,
                   Window window = Window::kHann, const Vector* channel_weights = nullptr);

/// St * value, pointwise.
Spectrum premultiply(const Spectrum& s);
/// value / St for St > 0; the zero-frequency bin is set to 0.
Spectrum unpremultiply(const Spectrum& s);

/// Sum of value * resolution over bins with lo <= f <= hi.
double band_power(const Spectrum& s, double lo, double hi);

/// Index of the largest value with lo <= f <= hi.
std::size_t peak_in_band(const Spectrum& s, double lo, double hi);

/// Interior local maxima whose value is at least `min_fraction` of the
/// global maximum, in ascending frequency.
std::vector<std::size_t> find_peaks(const Spectrum& s, double min_fraction = 0.0);

/// Index of the global maximum, skipping the zero-frequency bin.
std::size_t dominant_bin(const Spectrum& s);

/// Two-column (St, value) table.
Matrix spectrum_table(const Spectrum& s);

}  // namespace latentlens
