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

#include "cli_support.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace cli {

int Csv::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

Csv read_csv(const std::string& path, bool has_header) {
  ll_table* raw = nullptr;
  check(ll_table_read_csv(path.c_str(), has_header ? 1 : 0, &raw));
  Table table(raw);
  Csv out;
  check(ll_table_shape(table.get(), &out.rows, &out.cols));
  out.values.resize(out.rows * out.cols);
  check(ll_table_values(table.get(), out.values.data(), out.values.size()));
  char* header = nullptr;
  check(ll_table_header_json(table.get(), &header));
  out.header = json::parse(take(header)).get<std::vector<std::string>>();
  return out;
}

void write_csv(const std::string& path, const std::vector<double>& row_major, std::size_t rows, std::size_t cols,
               const std::vector<std::string>& header) {
  const std::string header_json = json(header).dump();
  check(ll_write_csv(path.c_str(), row_major.data(), rows, cols, header.empty() ? nullptr : header_json.c_str()));
}

Series read_series(const std::string& path) {
  const Csv csv = read_csv(path);
  if (csv.header.empty() || csv.header[0] != "time") {
    fail(LL_ERR_FORMAT, path + ": expected a 'time' column first");
  }
  if (csv.cols < 2 || csv.rows < 2) fail(LL_ERR_FORMAT, path + ": need at least two rows and one series column");
  Series s;
  s.n_series = csv.cols - 1;
  s.n_t = csv.rows;
  s.dt = csv.at(1, 0) - csv.at(0, 0);
  if (!(s.dt > 0)) fail(LL_ERR_FORMAT, path + ": time column must increase");
  for (std::size_t t = 1; t < csv.rows; ++t) {
    const double step = csv.at(t, 0) - csv.at(t - 1, 0);
    if (std::abs(step - s.dt) > 1e-6 * s.dt) {
      fail(LL_ERR_FORMAT, path + ": non-uniform time step at row " + std::to_string(t + 1));
    }
  }
  s.names.assign(csv.header.begin() + 1, csv.header.end());
  s.values.resize(s.n_series * s.n_t);
  for (std::size_t t = 0; t < s.n_t; ++t) {
    for (std::size_t i = 0; i < s.n_series; ++i) s.values[i + s.n_series * t] = csv.at(t, i + 1);
  }
  return s;
}

void write_series(const std::string& path, const Series& s) {
  const std::size_t cols = s.n_series + 1;
  std::vector<double> table(s.n_t * cols);
  for (std::size_t t = 0; t < s.n_t; ++t) {
    table[t * cols] = static_cast<double>(t) * s.dt;
    for (std::size_t i = 0; i < s.n_series; ++i) table[t * cols + i + 1] = s.values[i + s.n_series * t];
  }
  std::vector<std::string> header{"time"};
  header.insert(header.end(), s.names.begin(), s.names.end());
  write_csv(path, table, s.n_t, cols, header);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(LL_ERR_FORMAT, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) { check(ll_write_text(path.c_str(), text.c_str())); }

std::string sha256_file(const std::string& path) {
  char* hex = nullptr;
  check(ll_sha256_file(path.c_str(), &hex));
  return take(hex);
}

Manifest::Manifest(std::string command_line, std::string subcommand)
    : command_line_(std::move(command_line)), subcommand_(std::move(subcommand)) {}

void Manifest::write(const std::string& path) const {
  auto hashes = [](const std::vector<std::string>& paths) {
    json list = json::array();
    for (const auto& p : paths) list.push_back({{"path", p}, {"sha256", sha256_file(p)}});
    return list;
  };
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  json doc{{"command", command_line_},
           {"subcommand", subcommand_},
           {"version", ll_version()},
           {"config", config_},
           {"seed", seed_ ? json(*seed_) : json(nullptr)},
           {"threads", threads_},
           {"inputs", hashes(inputs_)},
           {"outputs", hashes(outputs_)},
           {"wall_seconds", wall}};
  for (const auto& [key, value] : extra_.items()) doc[key] = value;
  write_text(path, doc.dump(2) + "\n");
}

std::vector<std::size_t> parse_index_list(const std::string& text, const std::string& what) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    unsigned long value = 0;
    try {
      value = std::stoul(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != item.size() || value == 0) {
      usage(what + ": expected a comma-separated list of positive integers, got '" + text + "'");
    }
    out.push_back(value);
  }
  if (out.empty()) usage(what + ": empty list");
  return out;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace cli
