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

// latentlens: command-line driver over the LatentLens C API.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include "CLI11.hpp"
#include "cli_support.hpp"

namespace fs = std::filesystem;
using namespace cli;

namespace {

struct Common {
  std::string command_line;
  std::size_t threads = 1;
  bool quiet = false;
};

std::string out_path(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) usage("cannot create directory " + dir + ": " + ec.message());
}

Dataset load_dataset(const std::string& path) {
  ll_dataset* raw = nullptr;
  check(ll_dataset_load(path.c_str(), &raw));
  return Dataset(raw);
}

Pod load_pod(const std::string& dir) {
  ll_pod* raw = nullptr;
  check(ll_pod_load(dir.c_str(), &raw));
  return Pod(raw);
}

std::vector<double> dataset_values(const ll_dataset* ds, std::size_t& n, std::size_t& n_t) {
  check(ll_dataset_shape(ds, &n, &n_t));
  std::vector<double> v(n * n_t);
  check(ll_dataset_values(ds, v.data(), v.size()));
  return v;
}

std::vector<std::string> numbered(const std::string& prefix, std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i <= count; ++i) out.push_back(prefix + "_" + std::to_string(i));
  return out;
}

// ---------------------------------------------------------------------------
// A trained run directory: config.json, checkpoint.aewts, latents.csv.

struct Run {
  std::string dir;
  json config;
  Net net;
  Series latents;
  std::string data_hash;
  std::size_t latent_dim = 0;
  std::size_t data_width = 0;
};

Run load_run(const std::string& dir, Manifest& manifest) {
  Run run;
  run.dir = dir;
  const std::string config_path = out_path(dir, "config.json");
  const std::string checkpoint = out_path(dir, "checkpoint.aewts");
  const std::string latents = out_path(dir, "latents.csv");
  for (const auto& p : {config_path, checkpoint, latents}) {
    if (!fs::exists(p)) usage(dir + " is not a training run directory (missing " + fs::path(p).filename().string() + ")");
    manifest.add_input(p);
  }
  const std::string config_text = read_text(config_path);
  try {
    run.config = json::parse(config_text);
  } catch (const json::exception& e) {
    fail(LL_ERR_FORMAT, config_path + ": " + e.what());
  }
  if (!run.config.contains("data_width")) fail(LL_ERR_FORMAT, config_path + ": missing key 'data_width'");
  run.data_width = run.config["data_width"].get<std::size_t>();
  json arch = run.config;
  arch.erase("data_width");
  const std::string arch_text = arch.dump();
  ll_network* raw = nullptr;
  check(ll_network_load(arch_text.c_str(), run.data_width, checkpoint.c_str(), &raw));
  run.net.reset(raw);
  check(ll_network_latent_dim(run.net.get(), &run.latent_dim));
  char* data_hex = nullptr;
  check(ll_network_hashes(run.net.get(), nullptr, &data_hex));
  run.data_hash = take(data_hex);
  run.latents = read_series(latents);
  if (run.latents.n_series != run.latent_dim) {
    fail(LL_ERR_FORMAT, latents + ": " + std::to_string(run.latents.n_series) + " latent columns, network has " +
                            std::to_string(run.latent_dim));
  }
  return run;
}

/// Refuses to combine a run with a POD basis computed from different data.
void check_same_data(const Run& run, const ll_pod* pod, const std::string& pod_dir) {
  char* hex = nullptr;
  check(ll_pod_data_hash(pod, &hex));
  const std::string pod_hash = take(hex);
  if (pod_hash != run.data_hash) {
    fail(LL_ERR_FORMAT, "data hash mismatch: checkpoint in " + run.dir + " was trained on data " + run.data_hash +
                            " but the basis in " + pod_dir + " was computed from data " + pod_hash);
  }
  std::size_t width = 0;
  check(ll_pod_width(pod, &width));
  if (width != run.data_width) {
    fail(LL_ERR_FORMAT, "basis width " + std::to_string(width) + " does not match network width " +
                            std::to_string(run.data_width));
  }
}

std::vector<double> decode(const Run& run, const std::vector<double>& z, std::size_t n_t) {
  std::vector<double> y(run.data_width * n_t);
  check(ll_network_decode(run.net.get(), z.data(), n_t, y.data()));
  return y;
}

// ---------------------------------------------------------------------------
// generate / import

struct GenerateArgs {
  std::string kind;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> n_t;
  std::string output;
  std::string out_dir;
  bool print_config = false;
};

std::string resolve_output(const std::string& output, const std::string& out_dir, const std::string& default_name) {
  if (!output.empty()) {
    const fs::path parent = fs::path(output).parent_path();
    if (!parent.empty()) ensure_dir(parent.string());
    return output;
  }
  if (out_dir.empty()) usage("an output is required: pass -o FILE or --out DIR");
  ensure_dir(out_dir);
  return out_path(out_dir, default_name);
}

int cmd_generate(const GenerateArgs& a, const Common& common) {
  if (a.kind != "laminar" && a.kind != "turbulent") usage("unknown dataset kind '" + a.kind + "'");
  if (a.print_config) {
    char* text = nullptr;
    check(ll_default_config(a.kind.c_str(), &text));
    std::cout << take(text) << "\n";
    return 0;
  }
  Manifest manifest(common.command_line, "generate");
  std::string config_text;
  if (!a.config.empty()) {
    config_text = read_text(a.config);
    manifest.add_input(a.config);
  }
  ll_dataset* raw = nullptr;
  check(ll_dataset_generate(a.kind.c_str(), a.config.empty() ? nullptr : config_text.c_str(), a.seed.has_value(),
                            a.seed.value_or(0), a.n_t.has_value(), a.n_t.value_or(0), &raw));
  Dataset ds(raw);
  const std::string output = resolve_output(a.output, a.out_dir, a.kind + ".snap");
  check(ll_dataset_save(ds.get(), output.c_str()));

  json config = config_text.empty() ? json::parse([&] {
    char* text = nullptr;
    check(ll_default_config(a.kind.c_str(), &text));
    return take(text);
  }())
                                    : json::parse(config_text);
  if (a.seed) config["seed"] = *a.seed;
  if (a.n_t) config["n_t"] = *a.n_t;
  manifest.set_config({{"kind", a.kind}, {"generator", config}});
  manifest.set_seed(config.value("seed", std::uint64_t{0}));
  manifest.add_output(output);
  manifest.write(output + ".manifest.json");
  std::size_t n = 0, n_t = 0;
  check(ll_dataset_shape(ds.get(), &n, &n_t));
  if (!common.quiet) std::cout << "wrote " << output << " (" << n << " points x " << n_t << " snapshots)\n";
  return 0;
}

struct ImportArgs {
  std::string input;
  std::string layout = "rows=space";
  bool header = false;
  double dt = 1.0;
  bool keep_mean = false;
  std::string grid;
  std::string output;
  std::string out_dir;
};

int cmd_import(const ImportArgs& a, const Common& common) {
  Manifest manifest(common.command_line, "import");
  manifest.add_input(a.input);
  ll_dataset* raw = nullptr;
  check(ll_dataset_import_csv(a.input.c_str(), a.layout.c_str(), a.header ? 1 : 0, a.dt, &raw));
  Dataset ds(raw);
  if (!a.grid.empty()) {
    check(ll_dataset_set_grid(ds.get(), read_text(a.grid).c_str()));
    manifest.add_input(a.grid);
  }
  if (!a.keep_mean) check(ll_dataset_remove_mean(ds.get()));
  const std::string output = resolve_output(a.output, a.out_dir, fs::path(a.input).stem().string() + ".snap");
  check(ll_dataset_save(ds.get(), output.c_str()));
  manifest.set_config({{"layout", a.layout}, {"header", a.header}, {"dt", a.dt}, {"remove_mean", !a.keep_mean}});
  manifest.add_output(output);
  manifest.write(output + ".manifest.json");
  if (!common.quiet) std::cout << "wrote " << output << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// pod

int cmd_pod(const std::string& input, const std::string& out_dir, const Common& common) {
  if (out_dir.empty()) usage("pod: --out DIR is required");
  Manifest manifest(common.command_line, "pod");
  manifest.add_input(input);
  Dataset ds = load_dataset(input);
  ll_pod* raw = nullptr;
  check(ll_pod_compute(ds.get(), &raw));
  Pod pod(raw);
  ensure_dir(out_dir);
  check(ll_pod_export(pod.get(), out_dir.c_str()));
  for (const char* name : {"modes.csv", "eigenvalues.csv", "energy.csv", "coeffs.csv", "grid.json", "basis.snap",
                           "pod.json"}) {
    manifest.add_output(out_path(out_dir, name));
  }
  std::size_t rank = 0, m95 = 0;
  check(ll_pod_rank(pod.get(), &rank));
  check(ll_pod_modes_for(pod.get(), 95.0, &m95));
  manifest.write(out_path(out_dir, "manifest.json"));
  if (!common.quiet) std::cout << "rank " << rank << ", " << m95 << " modes hold 95% of the energy\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string input;
  std::string preset;
  std::string config;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string seeds;
  std::string latents;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<double> learning_rate;
  std::optional<double> l2_gamma;
  std::optional<double> dropout;
  std::string schedule;
  std::optional<double> first_period;
  bool no_shuffle = false;
  std::size_t log_every = 50;
};

json load_architecture(const TrainArgs& a, Manifest& manifest) {
  if (a.preset.empty() == a.config.empty()) usage("train: pass exactly one of --preset NAME or --config FILE");
  std::string text;
  if (!a.preset.empty()) {
    char* raw = nullptr;
    check(ll_preset_json(a.preset.c_str(), &raw));
    text = take(raw);
  } else {
    text = read_text(a.config);
    manifest.add_input(a.config);
  }
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(LL_ERR_FORMAT, (a.config.empty() ? "preset " + a.preset : a.config) + ": " + e.what());
  }
}

void apply_overrides(json& arch, const TrainArgs& a) {
  if (!arch.contains("train") || !arch["train"].is_object()) return;
  json& t = arch["train"];
  if (a.epochs) t["epochs"] = *a.epochs;
  if (a.batch_size) t["batch_size"] = *a.batch_size;
  if (a.learning_rate) t["learning_rate"] = *a.learning_rate;
  if (a.l2_gamma) t["l2_gamma"] = *a.l2_gamma;
  if (a.dropout) t["dropout"] = *a.dropout;
  if (a.no_shuffle) t["shuffle"] = false;
  if (!a.schedule.empty()) {
    if (a.schedule == "constant") {
      t["schedule"] = {{"kind", "constant"}};
    } else if (a.schedule == "cosine-restarts") {
      json s = t.contains("schedule") ? t["schedule"] : json::object();
      if (s.value("kind", "") != "cosine-restarts") {
        s = {{"kind", "cosine-restarts"}, {"first_period", 50.0}, {"t_mul", 2.0}, {"m_mul", 1.0},
             {"min_fraction", 0.0}};
      }
      t["schedule"] = s;
    } else {
      usage("train: unknown schedule '" + a.schedule + "' (use constant or cosine-restarts)");
    }
  }
  if (a.first_period) {
    if (!t.contains("schedule") || t["schedule"].value("kind", "") != "cosine-restarts") {
      usage("train: --first-period needs a cosine-restarts schedule");
    }
    t["schedule"]["first_period"] = *a.first_period;
  }
}

struct RunResult {
  std::uint64_t seed = 0;
  double final_mse = 0;
  double relative_mse = 0;
  std::size_t epochs = 0;
  std::vector<std::string> outputs;
};

RunResult train_one(const json& arch_in, std::uint64_t seed, const ll_dataset* ds, const std::string& dir,
                    const Series* frozen, const TrainArgs& a, const Common& common, std::mutex& io) {
  json arch = arch_in;
  arch["train"]["seed"] = seed;
  std::size_t n = 0, n_t = 0;
  check(ll_dataset_shape(ds, &n, &n_t));
  const std::string arch_text = arch.dump();
  ll_network* raw = nullptr;
  check(ll_network_create(arch_text.c_str(), n, &raw));
  Net net(raw);

  struct Progress {
    std::mutex* io;
    std::uint64_t seed;
    std::size_t every;
  } progress{&io, seed, common.quiet ? 0 : a.log_every};
  auto callback = [](std::size_t epoch, double loss, void* user) {
    auto* p = static_cast<Progress*>(user);
    if (p->every == 0 || (epoch + 1) % p->every != 0) return;
    std::lock_guard<std::mutex> lock(*p->io);
    std::fprintf(stderr, "[seed %llu] epoch %zu loss %.6e\n", static_cast<unsigned long long>(p->seed), epoch + 1,
                 loss);
  };

  ll_train_report* report_raw = nullptr;
  if (frozen) {
    check(ll_train_decoder(net.get(), frozen->values.data(), frozen->n_series, ds, nullptr, callback, &progress,
                           &report_raw));
  } else {
    check(ll_train(net.get(), ds, nullptr, callback, &progress, &report_raw));
  }
  Report report(report_raw);

  ensure_dir(dir);
  RunResult result;
  result.seed = seed;
  const std::string checkpoint = out_path(dir, "checkpoint.aewts");
  check(ll_network_save(net.get(), checkpoint.c_str()));

  json config = arch;
  config["data_width"] = n;
  const std::string config_path = out_path(dir, "config.json");
  write_text(config_path, config.dump(2) + "\n");

  char* report_text = nullptr;
  check(ll_train_report_json(report.get(), &report_text));
  json report_doc = json::parse(take(report_text));
  report_doc["checkpoint"] = "checkpoint.aewts";
  const std::string report_path = out_path(dir, "report.json");
  write_text(report_path, report_doc.dump(2) + "\n");
  result.final_mse = report_doc.value("final_mse", 0.0);
  result.relative_mse = report_doc.value("relative_mse", 0.0);

  const auto curve = report_doc["loss_curve"].get<std::vector<double>>();
  result.epochs = curve.size();
  std::vector<double> loss_table;
  for (std::size_t e = 0; e < curve.size(); ++e) {
    loss_table.push_back(static_cast<double>(e + 1));
    loss_table.push_back(curve[e]);
  }
  const std::string loss_path = out_path(dir, "loss.csv");
  write_csv(loss_path, loss_table, curve.size(), 2, {"epoch", "loss"});

  Series latents;
  if (frozen) {
    latents = *frozen;
  } else {
    std::size_t nz = 0;
    check(ll_network_latent_dim(net.get(), &nz));
    std::size_t rows = 0, cols = 0;
    const std::vector<double> q = dataset_values(ds, rows, cols);
    latents.n_series = nz;
    latents.n_t = n_t;
    check(ll_dataset_dt(ds, &latents.dt));
    latents.names = numbered("z", nz);
    latents.values.resize(nz * n_t);
    check(ll_network_encode(net.get(), q.data(), n_t, latents.values.data()));
  }
  const std::string latents_path = out_path(dir, "latents.csv");
  write_series(latents_path, latents);
  result.outputs = {config_path, checkpoint, report_path, loss_path, latents_path};
  return result;
}

int cmd_train(const TrainArgs& a, const Common& common) {
  if (a.out_dir.empty()) usage("train: --out DIR is required");
  Manifest manifest(common.command_line, "train");
  json arch = load_architecture(a, manifest);
  apply_overrides(arch, a);
  manifest.add_input(a.input);
  Dataset ds = load_dataset(a.input);

  const bool decoder_only = arch.value("mode", "") == "decoder-only";
  std::optional<Series> frozen;
  if (decoder_only) {
    if (a.latents.empty()) usage("train: decoder-only networks need --latents CSV (a latents.csv from an earlier run)");
    frozen = read_series(a.latents);
    manifest.add_input(a.latents);
    std::size_t n = 0, n_t = 0;
    check(ll_dataset_shape(ds.get(), &n, &n_t));
    if (frozen->n_t != n_t) {
      fail(LL_ERR_FORMAT, a.latents + ": " + std::to_string(frozen->n_t) + " time steps, dataset has " +
                              std::to_string(n_t));
    }
  } else if (!a.latents.empty()) {
    usage("train: --latents only applies to decoder-only networks");
  }

  std::vector<std::uint64_t> seeds;
  if (!a.seeds.empty()) {
    if (a.seed) usage("train: --seed and --seeds are mutually exclusive");
    std::stringstream ss(a.seeds);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t pos = 0;
        seeds.push_back(std::stoull(item, &pos));
        if (pos != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        usage("train: --seeds expects comma-separated integers, got '" + a.seeds + "'");
      }
    }
  } else {
    seeds.push_back(a.seed.value_or(arch.contains("train") ? arch["train"].value("seed", std::uint64_t{0}) : 0));
  }

  ensure_dir(a.out_dir);
  std::vector<RunResult> results(seeds.size());
  std::vector<std::optional<Failure>> failures(seeds.size());
  std::mutex io;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      const std::string dir =
          seeds.size() == 1 ? a.out_dir : out_path(a.out_dir, "seed-" + std::to_string(seeds[i]));
      try {
        results[i] = train_one(arch, seeds[i], ds.get(), dir, frozen ? &*frozen : nullptr, a, common, io);
      } catch (const Failure& f) {
        failures[i] = f;
      }
    }
  };
  const std::size_t n_workers = std::max<std::size_t>(1, std::min(common.threads, seeds.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& f : failures) {
    if (f) throw *f;
  }

  json summary = json::array();
  for (const auto& r : results) {
    for (const auto& p : r.outputs) manifest.add_output(p);
    summary.push_back({{"seed", r.seed}, {"final_mse", r.final_mse}, {"relative_mse", r.relative_mse},
                       {"epochs", r.epochs}});
    if (!common.quiet) {
      std::printf("seed %llu: final mse %.6e (%.4e of field variance)\n", static_cast<unsigned long long>(r.seed),
                  r.final_mse, r.relative_mse);
    }
  }
  if (seeds.size() > 1) {
    const std::string sweep = out_path(a.out_dir, "sweep.json");
    write_text(sweep, json{{"runs", summary}}.dump(2) + "\n");
    manifest.add_output(sweep);
  }
  manifest.set_config(arch);
  if (seeds.size() == 1) manifest.set_seed(seeds[0]);
  manifest.set("seeds", seeds);
  manifest.set_threads(n_workers);
  manifest.write(out_path(a.out_dir, "manifest.json"));
  return 0;
}

// ---------------------------------------------------------------------------
// decompose

struct DecomposeArgs {
  std::string run;
  std::string pod;
  std::string out_dir;
  std::string method = "reverse";
  std::size_t modes = 0;
  double dz_fraction = 1e-4;
  std::string normalization = "inverse-std";
  bool write_tensor = false;
};

std::vector<double> epsilon_of(const ll_sensitivity* s, std::size_t& nz, std::size_t& nm) {
  check(ll_sensitivity_shape(s, &nz, &nm));
  std::vector<double> eps(nz * nm);
  check(ll_sensitivity_epsilon(s, eps.data(), eps.size()));
  return eps;
}

/// Column-major n_z x n_modes to a row-major table with one row per latent.
std::vector<double> latent_rows(const std::vector<double>& eps, std::size_t nz, std::size_t nm) {
  std::vector<double> rows(nz * nm);
  for (std::size_t i = 0; i < nz; ++i) {
    for (std::size_t j = 0; j < nm; ++j) rows[i * nm + j] = eps[i + nz * j];
  }
  return rows;
}

int cmd_decompose(const DecomposeArgs& a, const Common& common) {
  if (a.out_dir.empty()) usage("decompose: --out DIR is required");
  if (a.method != "reverse" && a.method != "fd" && a.method != "both") {
    usage("decompose: unknown method '" + a.method + "' (use reverse, fd or both)");
  }
  Manifest manifest(common.command_line, "decompose");
  Run run = load_run(a.run, manifest);
  Pod pod = load_pod(a.pod);
  manifest.add_input(out_path(a.pod, "pod.json"));
  manifest.add_input(out_path(a.pod, "basis.snap"));
  check_same_data(run, pod.get(), a.pod);
  ensure_dir(a.out_dir);

  std::size_t rank = 0;
  check(ll_pod_rank(pod.get(), &rank));
  const std::size_t n_modes = a.modes == 0 ? rank : a.modes;
  if (n_modes > rank) usage("decompose: --modes " + std::to_string(n_modes) + " exceeds the basis rank " +
                            std::to_string(rank));
  const std::size_t n_t = run.latents.n_t;
  const std::vector<double> y = decode(run, run.latents.values, n_t);

  Series b;
  b.n_series = n_modes;
  b.n_t = n_t;
  b.dt = run.latents.dt;
  b.names = numbered("b", n_modes);
  b.values.resize(n_modes * n_t);
  check(ll_decoder_coefficients(pod.get(), y.data(), n_t, n_modes, b.values.data()));
  const std::string b_path = out_path(a.out_dir, "decoder_coeffs.csv");
  write_series(b_path, b);
  manifest.add_output(b_path);

  if (run.config.value("mode", "") == "mdae") {
    std::size_t n_fields = 0;
    check(ll_network_decode_fields(run.net.get(), run.latents.values.data(), n_t, nullptr, 0, &n_fields));
    std::vector<double> fields(n_fields * run.data_width * n_t);
    check(ll_network_decode_fields(run.net.get(), run.latents.values.data(), n_t, fields.data(), fields.size(),
                                   &n_fields));
    for (std::size_t i = 0; i < n_fields; ++i) {
      Series bi = b;
      check(ll_decoder_coefficients(pod.get(), fields.data() + i * run.data_width * n_t, n_t, n_modes,
                                    bi.values.data()));
      const std::string path = out_path(a.out_dir, "decoder_coeffs_" + std::to_string(i + 1) + ".csv");
      write_series(path, bi);
      manifest.add_output(path);
    }
  }

  std::vector<double> energy(n_modes), percent(n_modes), eig(rank);
  check(ll_equivalent_energy(pod.get(), y.data(), n_t, n_modes, energy.data(), percent.data()));
  check(ll_pod_eigenvalues(pod.get(), eig.data(), eig.size()));
  double eig_total = 0;
  for (double e : eig) eig_total += e;
  std::vector<double> energy_table;
  for (std::size_t j = 0; j < n_modes; ++j) {
    energy_table.insert(energy_table.end(),
                        {static_cast<double>(j + 1), energy[j], percent[j], eig[j], 100.0 * eig[j] / eig_total});
  }
  const std::string energy_path = out_path(a.out_dir, "equivalent_energy.csv");
  write_csv(energy_path, energy_table, n_modes, 5,
            {"mode", "equivalent_energy", "equivalent_percent", "data_eigenvalue", "data_percent"});
  manifest.add_output(energy_path);

  auto run_method = [&](const std::string& method) {
    const json options{{"method", method},
                       {"dz_fraction", a.dz_fraction},
                       {"normalization", a.normalization},
                       {"n_modes", n_modes},
                       {"keep_tensor", a.write_tensor}};
    const std::string text = options.dump();
    ll_sensitivity* raw = nullptr;
    check(ll_sensitivity_compute(run.net.get(), run.latents.values.data(), n_t, pod.get(), text.c_str(), &raw));
    return Sensitivity(raw);
  };

  json summary;
  std::vector<std::string> methods = a.method == "both" ? std::vector<std::string>{"reverse", "fd"}
                                                        : std::vector<std::string>{a.method};
  std::vector<std::vector<double>> eps_by_method;
  for (const auto& method : methods) {
    Sensitivity s = run_method(method);
    std::size_t nz = 0, nm = 0;
    const std::vector<double> eps = epsilon_of(s.get(), nz, nm);
    eps_by_method.push_back(eps);
    const std::string name = method == methods.front() ? "epsilon.csv" : "epsilon_fd.csv";
    const std::string path = out_path(a.out_dir, name);
    write_csv(path, latent_rows(eps, nz, nm), nz, nm, numbered("mode", nm));
    manifest.add_output(path);
    char* text = nullptr;
    check(ll_sensitivity_summary_json(s.get(), &text));
    json doc = json::parse(take(text));
    if (method == methods.front()) {
      summary = doc;
    }
    summary["epsilon_files"][method] = name;
    if (a.write_tensor) {
      std::vector<double> tensor(n_t * nz * nm);
      std::vector<std::string> header;
      for (std::size_t i = 0; i < nz; ++i) {
        for (std::size_t j = 0; j < nm; ++j) header.push_back("z" + std::to_string(i + 1) + "_mode" + std::to_string(j + 1));
      }
      for (std::size_t t = 0; t < n_t; ++t) {
        for (std::size_t i = 0; i < nz; ++i) {
          for (std::size_t j = 0; j < nm; ++j) {
            check(ll_sensitivity_dbdz(s.get(), j, i, t, &tensor[t * nz * nm + i * nm + j]));
          }
        }
      }
      const std::string tpath = out_path(a.out_dir, method == "fd" && methods.size() == 2 ? "dbdz_fd.csv" : "dbdz.csv");
      write_csv(tpath, tensor, n_t, nz * nm, header);
      manifest.add_output(tpath);
    }
  }
  summary["method"] = a.method;
  if (eps_by_method.size() == 2) {
    double gap = 0;
    check(ll_max_relative_gap(eps_by_method[0].data(), eps_by_method[1].data(), eps_by_method[0].size(), &gap));
    summary["max_rel_gap"] = gap;
    if (!common.quiet) std::printf("max relative gap between reverse-mode and finite-difference epsilon: %.3e\n", gap);
  }
  double captured = 0;
  for (double e : energy) captured += e;
  summary["equivalent_energy_percent_of_data"] = 100.0 * captured / eig_total;
  const std::string summary_path = out_path(a.out_dir, "summary.json");
  write_text(summary_path, summary.dump(2) + "\n");
  manifest.add_output(summary_path);
  manifest.set_config({{"method", a.method},
                       {"n_modes", n_modes},
                       {"dz_fraction", a.dz_fraction},
                       {"normalization", a.normalization},
                       {"network", run.config}});
  manifest.write(out_path(a.out_dir, "manifest.json"));
  return 0;
}

// ---------------------------------------------------------------------------
// rank / filter

struct Ranking {
  std::vector<std::size_t> order;  // 0-based latent indices, best first
  std::vector<double> scores;      // per latent, in latent order
};

Ranking rank_epsilon(const std::vector<double>& eps_colmajor, std::size_t nz, std::size_t nm,
                     const std::vector<std::size_t>& targets_1based) {
  std::vector<std::size_t> targets;
  for (std::size_t t : targets_1based) {
    if (t > nm) usage("target mode " + std::to_string(t) + " exceeds the " + std::to_string(nm) + " decomposed modes");
    targets.push_back(t - 1);
  }
  Ranking r;
  r.order.resize(nz);
  r.scores.resize(nz);
  check(ll_rank_latents(eps_colmajor.data(), nz, nm, targets.data(), targets.size(), r.order.data(),
                        r.scores.data()));
  return r;
}

void write_ranking(const Ranking& r, const std::string& path, const std::string& format) {
  if (format == "json") {
    json rows = json::array();
    for (std::size_t k = 0; k < r.order.size(); ++k) {
      rows.push_back({{"rank", k + 1}, {"latent", r.order[k] + 1}, {"score", r.scores[r.order[k]]}});
    }
    write_text(path, json{{"ranking", rows}}.dump(2) + "\n");
    return;
  }
  std::vector<double> table;
  for (std::size_t k = 0; k < r.order.size(); ++k) {
    table.insert(table.end(), {static_cast<double>(k + 1), static_cast<double>(r.order[k] + 1), r.scores[r.order[k]]});
  }
  write_csv(path, table, r.order.size(), 3, {"rank", "latent", "score"});
}

int cmd_rank(const std::string& input, const std::string& target_modes, const std::string& out_dir,
             const std::string& format, const Common& common) {
  if (out_dir.empty()) usage("rank: --out DIR is required");
  if (format != "csv" && format != "json") usage("rank: --format must be csv or json");
  Manifest manifest(common.command_line, "rank");
  const std::string eps_path = fs::is_directory(input) ? out_path(input, "epsilon.csv") : input;
  manifest.add_input(eps_path);
  const Csv csv = read_csv(eps_path);
  std::vector<double> eps(csv.rows * csv.cols);
  for (std::size_t i = 0; i < csv.rows; ++i) {
    for (std::size_t j = 0; j < csv.cols; ++j) eps[i + csv.rows * j] = csv.at(i, j);
  }
  const auto targets = parse_index_list(target_modes, "--target-modes");
  const Ranking r = rank_epsilon(eps, csv.rows, csv.cols, targets);
  ensure_dir(out_dir);
  const std::string path = out_path(out_dir, format == "json" ? "ranking.json" : "ranking.csv");
  write_ranking(r, path, format);
  manifest.add_output(path);
  manifest.set_config({{"target_modes", targets}, {"format", format}});
  manifest.write(out_path(out_dir, "manifest.json"));
  if (!common.quiet) {
    std::printf("ranking for modes %s:", target_modes.c_str());
    for (std::size_t i : r.order) std::printf(" z_%zu", i + 1);
    std::printf("\n");
  }
  return 0;
}

struct FilterArgs {
  std::string run;
  std::string pod;
  std::string out_dir;
  std::string keep = "top2";
  std::string target_modes = "1,2";
  double suppress_st = 0.06;
  double retain_st = 0.2;
  double band_halfwidth = 0.25;
  std::size_t segment = 1024;
  std::size_t overlap = 0;
  bool write_field = false;
};

struct BandPeak {
  double frequency;
  double value;
};

BandPeak peak(const ll_spectrum* s, double centre, double halfwidth) {
  BandPeak p{};
  check(ll_spectrum_peak(s, centre * (1 - halfwidth), centre * (1 + halfwidth), &p.frequency, &p.value));
  return p;
}

int cmd_filter(const FilterArgs& a, const Common& common) {
  if (a.out_dir.empty()) usage("filter: --out DIR is required");
  Manifest manifest(common.command_line, "filter");
  Run run = load_run(a.run, manifest);
  Pod pod = load_pod(a.pod);
  manifest.add_input(out_path(a.pod, "pod.json"));
  manifest.add_input(out_path(a.pod, "basis.snap"));
  check_same_data(run, pod.get(), a.pod);
  ensure_dir(a.out_dir);
  const std::size_t nz = run.latent_dim;
  const std::size_t n_t = run.latents.n_t;
  const auto targets = parse_index_list(a.target_modes, "--target-modes");

  std::vector<std::size_t> keep;
  json ranking_doc = nullptr;
  if (a.keep.rfind("top", 0) == 0) {
    std::size_t k = 0;
    try {
      k = std::stoul(a.keep.substr(3));
    } catch (const std::exception&) {
      usage("filter: --keep expects topK or a list of latent numbers, got '" + a.keep + "'");
    }
    if (k == 0 || k > nz) usage("filter: cannot keep " + std::to_string(k) + " of " + std::to_string(nz) + " latents");
    std::size_t max_target = *std::max_element(targets.begin(), targets.end());
    const json options{{"method", "reverse"}, {"n_modes", max_target}, {"keep_tensor", false}};
    const std::string text = options.dump();
    ll_sensitivity* raw = nullptr;
    check(ll_sensitivity_compute(run.net.get(), run.latents.values.data(), n_t, pod.get(), text.c_str(), &raw));
    Sensitivity s(raw);
    std::size_t snz = 0, snm = 0;
    const std::vector<double> eps = epsilon_of(s.get(), snz, snm);
    const Ranking r = rank_epsilon(eps, snz, snm, targets);
    keep.assign(r.order.begin(), r.order.begin() + static_cast<std::ptrdiff_t>(k));
    const std::string path = out_path(a.out_dir, "ranking.csv");
    write_ranking(r, path, "csv");
    manifest.add_output(path);
  } else {
    for (std::size_t i : parse_index_list(a.keep, "--keep")) {
      if (i > nz) usage("filter: latent " + std::to_string(i) + " does not exist (N_z = " + std::to_string(nz) + ")");
      keep.push_back(i - 1);
    }
  }

  std::vector<double> z_f(nz * n_t), y_f(run.data_width * n_t);
  check(ll_filter_latents(run.net.get(), run.latents.values.data(), n_t, keep.data(), keep.size(), z_f.data(),
                          y_f.data()));
  Series zs = run.latents;
  zs.values = z_f;
  const std::string z_path = out_path(a.out_dir, "filtered_latents.csv");
  write_series(z_path, zs);
  manifest.add_output(z_path);

  // Energy distribution of the filtered output over its own POD modes.
  const std::string grid_text = read_text(out_path(a.pod, "grid.json"));
  ll_dataset* fraw = nullptr;
  check(ll_dataset_from_values(y_f.data(), run.data_width, n_t, run.latents.dt, &fraw));
  Dataset filtered(fraw);
  check(ll_dataset_set_grid(filtered.get(), grid_text.c_str()));
  check(ll_dataset_remove_mean(filtered.get()));
  ll_pod* fpod_raw = nullptr;
  check(ll_pod_compute(filtered.get(), &fpod_raw));
  Pod fpod(fpod_raw);
  std::size_t frank = 0;
  check(ll_pod_rank(fpod.get(), &frank));
  std::vector<double> feig(frank);
  check(ll_pod_eigenvalues(fpod.get(), feig.data(), feig.size()));
  double total = 0;
  for (double e : feig) total += e;
  std::vector<double> energy_table;
  for (std::size_t j = 0; j < frank; ++j) {
    energy_table.insert(energy_table.end(), {static_cast<double>(j + 1), 100.0 * feig[j] / total});
  }
  const std::string energy_path = out_path(a.out_dir, "filtered_energy.csv");
  write_csv(energy_path, energy_table, frank, 2, {"mode", "percent"});
  manifest.add_output(energy_path);
  const double leading2 = 100.0 * (feig.size() > 0 ? feig[0] : 0.0) / total +
                          100.0 * (feig.size() > 1 ? feig[1] : 0.0) / total;
  if (a.write_field) {
    const std::string path = out_path(a.out_dir, "filtered.snap");
    check(ll_dataset_save(filtered.get(), path.c_str()));
    manifest.add_output(path);
  }

  // Premultiplied, area-weighted PSD of the unfiltered and filtered outputs.
  const std::vector<double> y = decode(run, run.latents.values, n_t);
  std::vector<double> weights(run.data_width);
  check(ll_dataset_weights(filtered.get(), weights.data(), weights.size()));
  const std::size_t segment = std::min(a.segment, n_t);
  const std::size_t overlap = a.overlap ? a.overlap : segment / 2;
  const double fs_hz = 1.0 / run.latents.dt;
  auto psd = [&](const std::vector<double>& field) {
    ll_spectrum* raw = nullptr;
    check(ll_spectrum_welch(field.data(), run.data_width, n_t, fs_hz, segment, overlap, "hann", weights.data(), &raw));
    Spectrum plain(raw);
    ll_spectrum* pre = nullptr;
    check(ll_spectrum_premultiply(plain.get(), &pre));
    return Spectrum(pre);
  };
  Spectrum before = psd(y);
  Spectrum after = psd(y_f);
  std::size_t n_freq = 0;
  check(ll_spectrum_size(before.get(), &n_freq));
  std::vector<double> f(n_freq), p0(n_freq), p1(n_freq);
  check(ll_spectrum_data(before.get(), f.data(), p0.data(), n_freq));
  check(ll_spectrum_data(after.get(), nullptr, p1.data(), n_freq));
  std::vector<double> psd_table;
  for (std::size_t k = 0; k < n_freq; ++k) psd_table.insert(psd_table.end(), {f[k], p0[k], p1[k]});
  const std::string psd_path = out_path(a.out_dir, "psd.csv");
  write_csv(psd_path, psd_table, n_freq, 3, {"frequency", "unfiltered", "filtered"});
  manifest.add_output(psd_path);

  auto db = [](double num, double den) {
    if (den <= 0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(num / den);
  };
  const BandPeak s0 = peak(before.get(), a.suppress_st, a.band_halfwidth);
  const BandPeak s1 = peak(after.get(), a.suppress_st, a.band_halfwidth);
  const BandPeak r0 = peak(before.get(), a.retain_st, a.band_halfwidth);
  const BandPeak r1 = peak(after.get(), a.retain_st, a.band_halfwidth);
  const double suppression_db = db(s0.value, s1.value);
  const double retain_loss_db = db(r0.value, r1.value);

  std::vector<std::size_t> keep_1based;
  for (std::size_t i : keep) keep_1based.push_back(i + 1);
  json report{{"keep", keep_1based},
              {"target_modes", targets},
              {"leading_two_mode_energy_percent", leading2},
              {"filtered_rank", frank},
              {"suppressed_band",
               {{"centre", a.suppress_st},
                {"unfiltered_peak", {{"frequency", s0.frequency}, {"value", s0.value}}},
                {"filtered_peak", {{"frequency", s1.frequency}, {"value", s1.value}}},
                {"attenuation_db", suppression_db}}},
              {"retained_band",
               {{"centre", a.retain_st},
                {"unfiltered_peak", {{"frequency", r0.frequency}, {"value", r0.value}}},
                {"filtered_peak", {{"frequency", r1.frequency}, {"value", r1.value}}},
                {"attenuation_db", retain_loss_db}}},
              {"psd", {{"segment_length", segment}, {"overlap", overlap}, {"window", "hann"}, {"premultiplied", true}}}};
  const std::string report_path = out_path(a.out_dir, "filter.json");
  write_text(report_path, report.dump(2) + "\n");
  manifest.add_output(report_path);
  manifest.set_config({{"keep", a.keep},
                       {"target_modes", targets},
                       {"suppress_st", a.suppress_st},
                       {"retain_st", a.retain_st},
                       {"band_halfwidth", a.band_halfwidth},
                       {"segment", segment},
                       {"overlap", overlap}});
  manifest.write(out_path(a.out_dir, "manifest.json"));
  if (!common.quiet) {
    std::printf("kept latents");
    for (std::size_t i : keep_1based) std::printf(" z_%zu", i);
    std::printf("; leading two modes hold %.2f%% of the filtered energy\n", leading2);
    std::printf("St %.3g band attenuated by %.1f dB, St %.3g band by %.1f dB\n", a.suppress_st, suppression_db,
                a.retain_st, retain_loss_db);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// spectrum

struct SpectrumArgs {
  std::string input;
  std::string kind = "fft";
  std::string columns;
  std::optional<double> dt;
  bool std_normalize = false;
  bool separate = false;
  std::string window;
  std::size_t segment = 1024;
  std::size_t overlap = 0;
  std::string out_dir;
  std::string format = "csv";
};

int cmd_spectrum(const SpectrumArgs& a, const Common& common) {
  if (a.out_dir.empty()) usage("spectrum: --out DIR is required");
  if (a.kind != "fft" && a.kind != "welch" && a.kind != "premultiplied") {
    usage("spectrum: unknown kind '" + a.kind + "' (use fft, welch or premultiplied)");
  }
  if (a.format != "csv" && a.format != "json" && a.format != "svg") usage("spectrum: --format must be csv, json or svg");
  Manifest manifest(common.command_line, "spectrum");
  manifest.add_input(a.input);

  // Signals one per row, row-major rows x n_t.
  std::vector<double> signals;
  std::vector<double> weights;
  std::vector<std::string> names;
  std::size_t rows = 0, n_t = 0;
  double dt = 1.0;
  if (fs::path(a.input).extension() == ".snap") {
    Dataset ds = load_dataset(a.input);
    const std::vector<double> q = dataset_values(ds.get(), rows, n_t);
    check(ll_dataset_dt(ds.get(), &dt));
    weights.resize(rows);
    check(ll_dataset_weights(ds.get(), weights.data(), weights.size()));
    std::vector<std::size_t> pick;
    if (!a.columns.empty()) {
      for (std::size_t c : parse_index_list(a.columns, "--columns")) {
        if (c > rows) usage("spectrum: point " + std::to_string(c) + " out of range");
        pick.push_back(c - 1);
      }
    } else {
      for (std::size_t j = 0; j < rows; ++j) pick.push_back(j);
    }
    for (std::size_t j : pick) {
      for (std::size_t t = 0; t < n_t; ++t) signals.push_back(q[j + rows * t]);
      names.push_back("point_" + std::to_string(j + 1));
    }
    std::vector<double> w;
    for (std::size_t j : pick) w.push_back(weights[j]);
    weights = w;
    rows = pick.size();
  } else {
    const Csv csv = read_csv(a.input);
    const bool has_time = !csv.header.empty() && csv.header[0] == "time";
    if (has_time) {
      if (csv.rows < 2) fail(LL_ERR_FORMAT, a.input + ": need at least two rows");
      dt = csv.at(1, 0) - csv.at(0, 0);
      if (a.dt) dt = *a.dt;
    } else {
      if (!a.dt) usage("spectrum: " + a.input + " has no time column; pass --dt");
      dt = *a.dt;
    }
    const std::size_t first = has_time ? 1 : 0;
    std::vector<std::size_t> pick;
    if (!a.columns.empty()) {
      for (std::size_t c : parse_index_list(a.columns, "--columns")) {
        if (first + c > csv.cols) usage("spectrum: column " + std::to_string(c) + " out of range");
        pick.push_back(first + c - 1);
      }
    } else {
      for (std::size_t c = first; c < csv.cols; ++c) pick.push_back(c);
    }
    n_t = csv.rows;
    for (std::size_t c : pick) {
      for (std::size_t t = 0; t < n_t; ++t) signals.push_back(csv.at(t, c));
      names.push_back(c < csv.header.size() ? csv.header[c] : "column_" + std::to_string(c + 1));
    }
    rows = pick.size();
  }
  if (rows == 0) usage("spectrum: no signals selected");
  if (!(dt > 0)) fail(LL_ERR_FORMAT, a.input + ": time step must be positive");

  const std::size_t segment = std::min(a.segment, n_t);
  const std::size_t overlap = a.overlap ? a.overlap : segment / 2;
  auto compute = [&](const double* sig, std::size_t count, const double* w) {
    ll_spectrum* raw = nullptr;
    if (a.kind == "fft") {
      // Row-major rows x n_t is column-major n_t x rows; the library wants one
      // signal per row, so pass the transposed layout.
      std::vector<double> colmajor(count * n_t);
      for (std::size_t r = 0; r < count; ++r) {
        for (std::size_t t = 0; t < n_t; ++t) colmajor[r + count * t] = sig[r * n_t + t];
      }
      check(ll_spectrum_fft(colmajor.data(), count, n_t, dt, a.std_normalize ? 1 : 0,
                            a.window.empty() ? "none" : a.window.c_str(), &raw));
      return Spectrum(raw);
    }
    std::vector<double> colmajor(count * n_t);
    for (std::size_t r = 0; r < count; ++r) {
      for (std::size_t t = 0; t < n_t; ++t) colmajor[r + count * t] = sig[r * n_t + t];
    }
    check(ll_spectrum_welch(colmajor.data(), count, n_t, 1.0 / dt, segment, overlap,
                            a.window.empty() ? "hann" : a.window.c_str(), w, &raw));
    Spectrum s(raw);
    if (a.kind == "premultiplied") {
      ll_spectrum* pre = nullptr;
      check(ll_spectrum_premultiply(s.get(), &pre));
      return Spectrum(pre);
    }
    return s;
  };

  std::vector<Spectrum> spectra;
  std::vector<std::string> labels;
  if (a.separate) {
    for (std::size_t r = 0; r < rows; ++r) {
      spectra.push_back(compute(signals.data() + r * n_t, 1, weights.empty() ? nullptr : &weights[r]));
      labels.push_back(names[r]);
    }
  } else {
    spectra.push_back(compute(signals.data(), rows, weights.empty() ? nullptr : weights.data()));
    labels.push_back(a.kind == "fft" ? "amplitude" : a.kind == "welch" ? "psd" : "premultiplied_psd");
  }
  std::size_t n_freq = 0;
  check(ll_spectrum_size(spectra[0].get(), &n_freq));
  std::vector<double> freq(n_freq);
  std::vector<std::vector<double>> values(spectra.size(), std::vector<double>(n_freq));
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    check(ll_spectrum_data(spectra[i].get(), i == 0 ? freq.data() : nullptr, values[i].data(), n_freq));
  }
  ensure_dir(a.out_dir);
  std::vector<double> table;
  for (std::size_t k = 0; k < n_freq; ++k) {
    table.push_back(freq[k]);
    for (const auto& v : values) table.push_back(v[k]);
  }
  std::vector<std::string> header{"frequency"};
  header.insert(header.end(), labels.begin(), labels.end());
  const std::string csv_path = out_path(a.out_dir, "spectrum.csv");
  write_csv(csv_path, table, n_freq, header.size(), header);
  manifest.add_output(csv_path);

  json peaks = json::array();
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    std::size_t best = 1 < n_freq ? 1 : 0;
    for (std::size_t k = 1; k < n_freq; ++k) {
      if (values[i][k] > values[i][best]) best = k;
    }
    peaks.push_back({{"series", labels[i]}, {"frequency", freq[best]}, {"value", values[i][best]}});
    if (!common.quiet) std::printf("%s: dominant frequency %.6g\n", labels[i].c_str(), freq[best]);
  }
  if (a.format == "json") {
    json doc{{"kind", a.kind}, {"frequency", freq}, {"series", json::object()}, {"dominant", peaks}};
    for (std::size_t i = 0; i < labels.size(); ++i) doc["series"][labels[i]] = values[i];
    const std::string path = out_path(a.out_dir, "spectrum.json");
    write_text(path, doc.dump(2) + "\n");
    manifest.add_output(path);
  } else if (a.format == "svg") {
    const json options{{"title", a.kind + " spectrum of " + fs::path(a.input).filename().string()},
                       {"x_label", "frequency"},
                       {"y_label", a.kind == "fft" ? "amplitude" : "PSD"},
                       {"log_y", a.kind != "fft"}};
    const std::string text = options.dump();
    char* svg = nullptr;
    check(ll_plot_csv(csv_path.c_str(), "line", nullptr, text.c_str(), &svg));
    const std::string path = out_path(a.out_dir, "spectrum.svg");
    write_text(path, take(svg));
    manifest.add_output(path);
  }
  const std::string peaks_path = out_path(a.out_dir, "peaks.json");
  write_text(peaks_path, json{{"dominant", peaks}}.dump(2) + "\n");
  manifest.add_output(peaks_path);
  manifest.set_config({{"kind", a.kind},
                       {"columns", a.columns},
                       {"dt", dt},
                       {"std_normalize", a.std_normalize},
                       {"separate", a.separate},
                       {"segment", segment},
                       {"overlap", overlap}});
  manifest.write(out_path(a.out_dir, "manifest.json"));
  return 0;
}

// ---------------------------------------------------------------------------
// plot / presets

struct PlotArgs {
  std::string input;
  std::string kind = "auto";
  std::string grid;
  std::string columns;
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::string output;
  std::string out_dir;
};

int cmd_plot(const PlotArgs& a, const Common& common) {
  Manifest manifest(common.command_line, "plot");
  manifest.add_input(a.input);
  std::string grid = a.grid;
  const fs::path sibling = fs::path(a.input).parent_path() / "grid.json";
  if (grid.empty() && (a.kind == "modes" || a.kind == "auto") && fs::exists(sibling)) grid = sibling.string();
  std::string grid_text;
  if (!grid.empty()) {
    grid_text = read_text(grid);
    manifest.add_input(grid);
  }
  json options = json::object();
  if (!a.title.empty()) options["title"] = a.title;
  if (!a.x_label.empty()) options["x_label"] = a.x_label;
  if (!a.y_label.empty()) options["y_label"] = a.y_label;
  if (a.log_x) options["log_x"] = true;
  if (a.log_y) options["log_y"] = true;
  if (!a.columns.empty()) options["columns"] = parse_index_list(a.columns, "--columns");
  const std::string options_text = options.dump();
  char* svg = nullptr;
  check(ll_plot_csv(a.input.c_str(), a.kind.c_str(), grid_text.empty() ? nullptr : grid_text.c_str(),
                    options_text.c_str(), &svg));
  const std::string output = resolve_output(a.output, a.out_dir, fs::path(a.input).stem().string() + ".svg");
  write_text(output, take(svg));
  manifest.add_output(output);
  manifest.set_config({{"kind", a.kind}, {"options", options}});
  manifest.write(output + ".manifest.json");
  if (!common.quiet) std::cout << "wrote " << output << "\n";
  return 0;
}

int cmd_presets(const std::string& name, const std::string& out_dir) {
  char* raw = nullptr;
  check(ll_preset_names(&raw));
  const auto names = json::parse(take(raw)).get<std::vector<std::string>>();
  auto text_of = [](const std::string& n) {
    char* t = nullptr;
    check(ll_preset_json(n.c_str(), &t));
    return take(t);
  };
  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    for (const auto& n : name.empty() ? names : std::vector<std::string>{name}) {
      write_text(out_path(out_dir, n + ".json"), text_of(n));
    }
    return 0;
  }
  if (name.empty()) {
    for (const auto& n : names) std::cout << n << "\n";
  } else {
    std::cout << text_of(name);
  }
  return 0;
}

std::size_t default_threads() {
  if (const char* env = std::getenv("LATENTLENS_THREADS")) {
    try {
      const unsigned long v = std::stoul(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
    std::fprintf(stderr, "warning: ignoring LATENTLENS_THREADS='%s' (expected a positive integer)\n", env);
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  Common common;
  for (int i = 0; i < argc; ++i) common.command_line += (i ? " " : "") + std::string(argv[i]);
  common.threads = default_threads();

  CLI::App app{"LatentLens: rank and filter autoencoder latent variables against POD modes"};
  app.set_version_flag("--version", std::string(ll_version()));
  app.require_subcommand(1);
  app.add_option("--threads", common.threads, "Worker threads for training sweeps (default: $LATENTLENS_THREADS or 1)")
      ->check(CLI::PositiveNumber);
  app.add_flag("-q,--quiet", common.quiet, "Suppress progress output");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Generate a surrogate dataset");
  generate->add_option("kind", gen.kind, "laminar or turbulent")->required();
  generate->add_option("--config", gen.config, "Generator config JSON (every key required)")->check(CLI::ExistingFile);
  generate->add_option("--seed", gen.seed, "Override the config seed");
  generate->add_option("--nt", gen.n_t, "Override the snapshot count");
  generate->add_option("-o,--output", gen.output, "Output .snap file");
  generate->add_option("--out", gen.out_dir, "Output directory (file named <kind>.snap)");
  generate->add_flag("--print-config", gen.print_config, "Print the default config and exit");

  ImportArgs imp;
  auto* import = app.add_subcommand("import", "Convert a CSV snapshot table into a dataset file");
  import->add_option("input", imp.input, "CSV file")->required()->check(CLI::ExistingFile);
  import->add_option("--layout", imp.layout, "rows=space or rows=time")->check(CLI::IsMember({"rows=space", "rows=time"}));
  import->add_flag("--header", imp.header, "First CSV row is a header");
  import->add_option("--dt", imp.dt, "Snapshot interval")->check(CLI::PositiveNumber);
  import->add_option("--grid", imp.grid, "grid.json describing the rows")->check(CLI::ExistingFile);
  import->add_flag("--keep-mean", imp.keep_mean, "Do not subtract the temporal mean");
  import->add_option("-o,--output", imp.output, "Output .snap file");
  import->add_option("--out", imp.out_dir, "Output directory");

  std::string pod_input, pod_out;
  auto* pod = app.add_subcommand("pod", "Weighted POD of a dataset");
  pod->add_option("input", pod_input, "Dataset .snap file")->required()->check(CLI::ExistingFile);
  pod->add_option("--out", pod_out, "Output directory")->required();

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train an autoencoder or a decoder-only network");
  train->add_option("input", tr.input, "Dataset .snap file")->required()->check(CLI::ExistingFile);
  train->add_option("--preset", tr.preset, "Built-in architecture preset (see `presets`)");
  train->add_option("--config", tr.config, "Architecture config JSON")->check(CLI::ExistingFile);
  train->add_option("--out", tr.out_dir, "Run directory")->required();
  train->add_option("--seed", tr.seed, "Training seed");
  train->add_option("--seeds", tr.seeds, "Comma-separated seeds, one run per seed under <out>/seed-<s>");
  train->add_option("--latents", tr.latents, "latents.csv of an earlier run (decoder-only networks)")
      ->check(CLI::ExistingFile);
  train->add_option("--epochs", tr.epochs, "Override train.epochs")->check(CLI::PositiveNumber);
  train->add_option("--batch-size", tr.batch_size, "Override train.batch_size")->check(CLI::PositiveNumber);
  train->add_option("--learning-rate", tr.learning_rate, "Override train.learning_rate");
  train->add_option("--l2-gamma", tr.l2_gamma, "Override train.l2_gamma");
  train->add_option("--dropout", tr.dropout, "Override train.dropout");
  train->add_option("--schedule", tr.schedule, "constant or cosine-restarts");
  train->add_option("--first-period", tr.first_period, "Override the first cosine period, in epochs");
  train->add_flag("--no-shuffle", tr.no_shuffle, "Keep snapshot order fixed");
  train->add_option("--log-every", tr.log_every, "Report the loss every N epochs (0: never)");

  DecomposeArgs dec;
  auto* decompose = app.add_subcommand("decompose", "Decoder decomposition of a trained run");
  decompose->add_option("run", dec.run, "Run directory written by `train`")->required()->check(CLI::ExistingDirectory);
  decompose->add_option("--pod", dec.pod, "POD directory written by `pod`")->required()->check(CLI::ExistingDirectory);
  decompose->add_option("--out", dec.out_dir, "Output directory")->required();
  decompose->add_option("--method", dec.method, "reverse, fd or both");
  decompose->add_option("--modes", dec.modes, "Number of data modes (0: all)");
  decompose->add_option("--dz-fraction", dec.dz_fraction, "Finite-difference step as a fraction of std(Z_i)")
      ->check(CLI::PositiveNumber);
  decompose->add_option("--normalization", dec.normalization, "inverse-std, std or none")
      ->check(CLI::IsMember({"inverse-std", "std", "none"}));
  decompose->add_flag("--write-tensor", dec.write_tensor, "Also write dB/dZ for every snapshot");

  std::string rank_input, rank_targets = "1,2", rank_out, rank_format = "csv";
  auto* rank = app.add_subcommand("rank", "Rank latent variables by their effect on target modes");
  rank->add_option("input", rank_input, "Decomposition directory or epsilon CSV")->required()->check(CLI::ExistingPath);
  rank->add_option("--target-modes", rank_targets, "Comma-separated 1-based mode numbers");
  rank->add_option("--out", rank_out, "Output directory")->required();
  rank->add_option("--format", rank_format, "csv or json");

  FilterArgs fil;
  auto* filter = app.add_subcommand("filter", "Zero all but selected latents and analyse the decoded output");
  filter->add_option("run", fil.run, "Run directory written by `train`")->required()->check(CLI::ExistingDirectory);
  filter->add_option("--pod", fil.pod, "POD directory written by `pod`")->required()->check(CLI::ExistingDirectory);
  filter->add_option("--out", fil.out_dir, "Output directory")->required();
  filter->add_option("--keep", fil.keep, "topK or comma-separated 1-based latent numbers");
  filter->add_option("--target-modes", fil.target_modes, "Modes used to rank latents for topK");
  filter->add_option("--suppress-st", fil.suppress_st, "Centre of the band expected to vanish");
  filter->add_option("--retain-st", fil.retain_st, "Centre of the band expected to survive");
  filter->add_option("--band-halfwidth", fil.band_halfwidth, "Relative half-width of both bands");
  filter->add_option("--segment", fil.segment, "Welch segment length")->check(CLI::PositiveNumber);
  filter->add_option("--overlap", fil.overlap, "Welch overlap (default: half a segment)");
  filter->add_flag("--write-field", fil.write_field, "Also save the filtered output as filtered.snap");

  SpectrumArgs sp;
  auto* spectrum = app.add_subcommand("spectrum", "FFT or Welch spectrum of time series");
  spectrum->add_option("input", sp.input, "CSV with a time column, or a .snap dataset")->required()
      ->check(CLI::ExistingFile);
  spectrum->add_option("--kind", sp.kind, "fft, welch or premultiplied");
  spectrum->add_option("--columns", sp.columns, "1-based series (or grid point) numbers");
  spectrum->add_option("--dt", sp.dt, "Sampling interval for CSVs without a time column")->check(CLI::PositiveNumber);
  spectrum->add_flag("--std-normalize", sp.std_normalize, "Divide each series by its standard deviation (fft)");
  spectrum->add_flag("--separate", sp.separate, "One spectrum per series instead of their sum");
  spectrum->add_option("--window", sp.window, "none or hann")->check(CLI::IsMember({"none", "hann"}));
  spectrum->add_option("--segment", sp.segment, "Welch segment length")->check(CLI::PositiveNumber);
  spectrum->add_option("--overlap", sp.overlap, "Welch overlap (default: half a segment)");
  spectrum->add_option("--out", sp.out_dir, "Output directory")->required();
  spectrum->add_option("--format", sp.format, "csv, json or svg");

  PlotArgs pl;
  auto* plot = app.add_subcommand("plot", "Render an exported CSV as SVG");
  plot->add_option("input", pl.input, "CSV file")->required()->check(CLI::ExistingFile);
  plot->add_option("--kind", pl.kind, "auto, line, heatmap or modes")
      ->check(CLI::IsMember({"auto", "line", "heatmap", "modes"}));
  plot->add_option("--grid", pl.grid, "grid.json for mode panels (default: next to the CSV)")->check(CLI::ExistingFile);
  plot->add_option("--columns,--modes", pl.columns, "1-based columns to draw");
  plot->add_option("--title", pl.title, "Plot title");
  plot->add_option("--x-label", pl.x_label, "x axis label");
  plot->add_option("--y-label", pl.y_label, "y axis label");
  plot->add_flag("--log-x", pl.log_x, "Logarithmic x axis");
  plot->add_flag("--log-y", pl.log_y, "Logarithmic y axis");
  plot->add_option("-o,--output", pl.output, "Output .svg file");
  plot->add_option("--out", pl.out_dir, "Output directory");

  std::string preset_name, preset_out;
  auto* presets = app.add_subcommand("presets", "List or print built-in architecture presets");
  presets->add_option("name", preset_name, "Preset to print");
  presets->add_option("--out", preset_out, "Write preset JSON files into this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : LL_ERR_USAGE;
  }

  try {
    if (*generate) return cmd_generate(gen, common);
    if (*import) return cmd_import(imp, common);
    if (*pod) return cmd_pod(pod_input, pod_out, common);
    if (*train) return cmd_train(tr, common);
    if (*decompose) return cmd_decompose(dec, common);
    if (*rank) return cmd_rank(rank_input, rank_targets, rank_out, rank_format, common);
    if (*filter) return cmd_filter(fil, common);
    if (*spectrum) return cmd_spectrum(sp, common);
    if (*plot) return cmd_plot(pl, common);
    if (*presets) return cmd_presets(preset_name, preset_out);
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", f.message.c_str());
    return f.code;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return LL_ERR_FORMAT;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return LL_ERR_FORMAT;
  }
  return LL_ERR_USAGE;
}
