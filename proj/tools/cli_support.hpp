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

// Thin C++ conveniences over the C API for the command-line tool.

#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "latentlens/latentlens.h"

namespace cli {

using json = nlohmann::ordered_json;

/// Carries a status code to main(), which turns it into the exit code.
struct Failure {
  int code;
  std::string message;
};

[[noreturn]] inline void fail(int code, std::string message) { throw Failure{code, std::move(message)}; }
[[noreturn]] inline void usage(std::string message) { fail(LL_ERR_USAGE, std::move(message)); }

inline void check(ll_status status) {
  if (status != LL_OK) fail(status, ll_last_error());
}

/// Takes ownership of a string returned by the library.
inline std::string take(char* s) {
  std::string out = s ? s : "";
  ll_string_free(s);
  return out;
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};

using Dataset = std::unique_ptr<ll_dataset, Deleter<ll_dataset, ll_dataset_free>>;
using Pod = std::unique_ptr<ll_pod, Deleter<ll_pod, ll_pod_free>>;
using Net = std::unique_ptr<ll_network, Deleter<ll_network, ll_network_free>>;
using Report = std::unique_ptr<ll_train_report, Deleter<ll_train_report, ll_train_report_free>>;
using Sensitivity = std::unique_ptr<ll_sensitivity, Deleter<ll_sensitivity, ll_sensitivity_free>>;
using Spectrum = std::unique_ptr<ll_spectrum, Deleter<ll_spectrum, ll_spectrum_free>>;
using Table = std::unique_ptr<ll_table, Deleter<ll_table, ll_table_free>>;

/// Dense table read from CSV, values stored row-major.
struct Csv {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::string> header;
  std::vector<double> values;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  int column(const std::string& name) const;
};

Csv read_csv(const std::string& path, bool has_header = true);
void write_csv(const std::string& path, const std::vector<double>& row_major, std::size_t rows, std::size_t cols,
               const std::vector<std::string>& header);

/// Time series stored column-major as n_series x n_t (one series per row,
/// which is also the row-major layout of an n_t x n_series table).
struct Series {
  std::size_t n_series = 0;
  std::size_t n_t = 0;
  double dt = 1.0;
  std::vector<std::string> names;
  std::vector<double> values;
};

/// Reads a CSV whose first column is "time" and whose remaining columns are series.
Series read_series(const std::string& path);
void write_series(const std::string& path, const Series& s);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);
std::string sha256_file(const std::string& path);

/// Run record written next to every command's outputs.
class Manifest {
 public:
  Manifest(std::string command_line, std::string subcommand);
  void set_config(json config) { config_ = std::move(config); }
  void set_seed(std::uint64_t seed) { seed_ = seed; }
  void set_threads(std::size_t threads) { threads_ = threads; }
  void add_input(const std::string& path) { inputs_.push_back(path); }
  void add_output(const std::string& path) { outputs_.push_back(path); }
  void set(const std::string& key, json value) { extra_[key] = std::move(value); }
  void write(const std::string& path) const;

 private:
  std::string command_line_;
  std::string subcommand_;
  json config_ = json::object();
  std::optional<std::uint64_t> seed_;
  std::size_t threads_ = 1;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  json extra_ = json::object();
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::vector<std::size_t> parse_index_list(const std::string& text, const std::string& what);
std::string join(const std::vector<std::string>& parts, const std::string& sep);

}  // namespace cli
