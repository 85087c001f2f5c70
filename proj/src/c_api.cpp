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

#include "latentlens/latentlens.h"

#include <cstring>
#include <filesystem>
#include <string>

#include "json_util.hpp"
#include "latentlens/autonet.hpp"
#include "latentlens/data.hpp"
#include "latentlens/decomp.hpp"
#include "latentlens/error.hpp"
#include "latentlens/hash.hpp"
#include "latentlens/plot.hpp"
#include "latentlens/pod.hpp"
#include "latentlens/presets.hpp"
#include "latentlens/spectral.hpp"
#include "latentlens/training.hpp"

using namespace latentlens;
using detail::json;

struct ll_dataset {
  SnapshotMatrix q;
};

struct ll_pod {
  PodBasis basis;
  GridMeta grid;
  double dt = 1.0;
  std::string data_hash;
};

struct ll_network {
  Network net;
};

struct ll_train_report {
  TrainReport report;
};

struct ll_sensitivity {
  SensitivityReport report;
};

struct ll_spectrum {
  Spectrum s;
};

struct ll_table {
  CsvTable table;
};

namespace {

thread_local std::string g_last_error;

ll_status fail(ll_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename F>
ll_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return LL_OK;
  } catch (const Error& e) {
    return fail(static_cast<ll_status>(static_cast<int>(e.kind())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(LL_ERR_NUMERICAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(LL_ERR_FORMAT, e.what());
  }
}

void need(const void* p, const char* name) {
  if (!p) throw ContractViolation(std::string(name) + " must not be null");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void copy_out(const Matrix& m, double* out, std::size_t capacity, const char* what) {
  need(out, what);
  const auto size = static_cast<std::size_t>(m.size());
  if (capacity < size) {
    throw ContractViolation(std::string(what) + ": buffer holds " + std::to_string(capacity) + " values, need " +
                            std::to_string(size));
  }
  std::memcpy(out, m.data(), size * sizeof(double));
}

Matrix view(const double* data, std::size_t rows, std::size_t cols, const char* what) {
  need(data, what);
  return Eigen::Map<const Matrix>(data, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

std::string dataset_hash(const SnapshotMatrix& q) {
  const auto bytes = encode_dataset(q);
  return hash_hex(sha256_u64(bytes.data(), bytes.size()));
}

std::uint64_t parse_hex(const std::string& hex) {
  if (hex.empty() || hex.size() > 16 || hex.find_first_not_of("0123456789abcdef") != std::string::npos) {
    throw ContractViolation("invalid hash '" + hex + "' (expected up to 16 lower-case hex digits)");
  }
  return std::stoull(hex, nullptr, 16);
}

json grid_to_json(const GridMeta& g) {
  const char* kind = g.kind == GridKind::kCartesian2d ? "cartesian-2d"
                     : g.kind == GridKind::kPolar    ? "polar"
                                                     : "unstructured";
  return json{{"kind", kind}, {"dims", g.dims}, {"coords", g.coords}, {"cell_areas", g.cell_areas}};
}

GridMeta grid_from_json(const json& doc) {
  const std::string what = "grid";
  detail::check_keys(doc, {"kind", "dims", "coords", "cell_areas"}, {}, what);
  GridMeta g;
  const auto kind = detail::get<std::string>(doc, "kind", what);
  if (kind == "cartesian-2d") {
    g.kind = GridKind::kCartesian2d;
  } else if (kind == "polar") {
    g.kind = GridKind::kPolar;
  } else if (kind == "unstructured") {
    g.kind = GridKind::kUnstructured;
  } else {
    throw FormatError("grid: unknown kind '" + kind + "'");
  }
  g.dims = detail::get<std::vector<std::size_t>>(doc, "dims", what);
  g.coords = detail::get<std::vector<std::vector<double>>>(doc, "coords", what);
  g.cell_areas = detail::get<std::vector<double>>(doc, "cell_areas", what);
  return g;
}

TrainConfig resolve_train(const Network& net, const char* train_json) {
  return train_json ? train_config_from_json(train_json) : net.config().train;
}

TrainOptions callback_options(ll_epoch_callback cb, void* user) {
  TrainOptions o;
  if (cb) o.on_epoch = [cb, user](std::size_t epoch, double loss) { cb(epoch, loss, user); };
  return o;
}

SensitivityOptions parse_sensitivity_options(const char* text) {
  SensitivityOptions o;
  if (!text) return o;
  const std::string what = "sensitivity options";
  const json doc = detail::parse_json(text, what);
  detail::check_keys(doc, {}, {"method", "dz_fraction", "normalization", "n_modes", "keep_tensor"}, what);
  if (doc.contains("method")) o.method = parse_sensitivity_method(detail::get<std::string>(doc, "method", what));
  o.dz_fraction = detail::get_or<double>(doc, "dz_fraction", o.dz_fraction, what);
  if (doc.contains("normalization")) {
    o.normalization = parse_latent_normalization(detail::get<std::string>(doc, "normalization", what));
  }
  o.n_modes = detail::get_or<std::size_t>(doc, "n_modes", o.n_modes, what);
  o.keep_tensor = detail::get_or<bool>(doc, "keep_tensor", o.keep_tensor, what);
  return o;
}

}  // namespace

extern "C" {

const char* ll_last_error(void) { return g_last_error.c_str(); }

const char* ll_version(void) { return LATENTLENS_VERSION; }

void ll_string_free(char* s) { std::free(s); }

// ---------------------------------------------------------------------------
// Datasets

ll_status ll_dataset_generate(const char* kind, const char* config_json, int has_seed, uint64_t seed, int has_nt,
                              uint64_t n_t, ll_dataset** out) {
  return guarded([&] {
    need(kind, "kind");
    need(out, "out");
    const std::string k = kind;
    auto ds = std::make_unique<ll_dataset>();
    if (k == "laminar") {
      LaminarSurrogateConfig cfg = config_json ? LaminarSurrogateConfig::from_json(config_json)
                                               : LaminarSurrogateConfig{};
      if (has_seed) cfg.seed = seed;
      if (has_nt) cfg.n_t = n_t;
      ds->q = generate_laminar(cfg);
    } else if (k == "turbulent") {
      TurbulentSurrogateConfig cfg = config_json ? TurbulentSurrogateConfig::from_json(config_json)
                                                 : TurbulentSurrogateConfig{};
      if (has_seed) cfg.seed = seed;
      if (has_nt) cfg.n_t = n_t;
      ds->q = generate_turbulent(cfg);
    } else {
      throw ContractViolation("unknown dataset kind '" + k + "' (use laminar or turbulent)");
    }
    *out = ds.release();
  });
}

ll_status ll_default_config(const char* kind, char** json_out) {
  return guarded([&] {
    need(kind, "kind");
    need(json_out, "json_out");
    const std::string k = kind;
    if (k == "laminar") {
      *json_out = dup(LaminarSurrogateConfig{}.to_json());
    } else if (k == "turbulent") {
      *json_out = dup(TurbulentSurrogateConfig{}.to_json());
    } else {
      throw ContractViolation("unknown dataset kind '" + k + "' (use laminar or turbulent)");
    }
  });
}

ll_status ll_dataset_load(const char* path, ll_dataset** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto ds = std::make_unique<ll_dataset>();
    ds->q = load_dataset(path);
    *out = ds.release();
  });
}

ll_status ll_dataset_save(const ll_dataset* ds, const char* path) {
  return guarded([&] {
    need(ds, "dataset");
    need(path, "path");
    save_dataset(ds->q, path);
  });
}

ll_status ll_dataset_import_csv(const char* path, const char* layout, int has_header, double dt, ll_dataset** out) {
  return guarded([&] {
    need(path, "path");
    need(layout, "layout");
    need(out, "out");
    auto ds = std::make_unique<ll_dataset>();
    ds->q = csv_import(path, parse_csv_layout(layout), has_header != 0, dt);
    *out = ds.release();
  });
}

ll_status ll_dataset_from_values(const double* values, size_t n, size_t n_t, double dt, ll_dataset** out) {
  return guarded([&] {
    need(out, "out");
    require(n >= 1 && n_t >= 1, "dataset: shape must be positive");
    require(dt > 0, "dataset: dt must be positive");
    auto ds = std::make_unique<ll_dataset>();
    ds->q.values = view(values, n, n_t, "values");
    ds->q.grid = GridMeta::unstructured(n);
    ds->q.dt = dt;
    *out = ds.release();
  });
}

ll_status ll_dataset_set_grid(ll_dataset* ds, const char* grid_json) {
  return guarded([&] {
    need(ds, "dataset");
    need(grid_json, "grid_json");
    GridMeta grid = grid_from_json(detail::parse_json(grid_json, "grid"));
    grid.validate(ds->q.n());
    ds->q.grid = std::move(grid);
  });
}

ll_status ll_dataset_remove_mean(ll_dataset* ds) {
  return guarded([&] {
    need(ds, "dataset");
    ds->q = remove_mean(std::move(ds->q));
  });
}

ll_status ll_dataset_shape(const ll_dataset* ds, size_t* n, size_t* n_t) {
  return guarded([&] {
    need(ds, "dataset");
    if (n) *n = ds->q.n();
    if (n_t) *n_t = ds->q.nt();
  });
}

ll_status ll_dataset_dt(const ll_dataset* ds, double* dt) {
  return guarded([&] {
    need(ds, "dataset");
    need(dt, "dt");
    *dt = ds->q.dt;
  });
}

ll_status ll_dataset_values(const ll_dataset* ds, double* out, size_t capacity) {
  return guarded([&] {
    need(ds, "dataset");
    copy_out(ds->q.values, out, capacity, "dataset values");
  });
}

ll_status ll_dataset_weights(const ll_dataset* ds, double* out, size_t capacity) {
  return guarded([&] {
    need(ds, "dataset");
    copy_out(ds->q.weights(), out, capacity, "dataset weights");
  });
}

ll_status ll_dataset_grid_json(const ll_dataset* ds, char** json_out) {
  return guarded([&] {
    need(ds, "dataset");
    need(json_out, "json_out");
    *json_out = dup(grid_to_json(ds->q.grid).dump());
  });
}

ll_status ll_dataset_hash(const ll_dataset* ds, char** hex_out) {
  return guarded([&] {
    need(ds, "dataset");
    need(hex_out, "hex_out");
    *hex_out = dup(dataset_hash(ds->q));
  });
}

void ll_dataset_free(ll_dataset* ds) { delete ds; }

// ---------------------------------------------------------------------------
// POD

ll_status ll_pod_compute(const ll_dataset* ds, ll_pod** out) {
  return guarded([&] {
    need(ds, "dataset");
    need(out, "out");
    auto pod = std::make_unique<ll_pod>();
    pod->basis = compute_pod(ds->q);
    pod->grid = ds->q.grid;
    pod->dt = ds->q.dt;
    pod->data_hash = dataset_hash(ds->q);
    *out = pod.release();
  });
}

ll_status ll_pod_rank(const ll_pod* pod, size_t* rank) {
  return guarded([&] {
    need(pod, "pod");
    need(rank, "rank");
    *rank = pod->basis.rank();
  });
}

ll_status ll_pod_width(const ll_pod* pod, size_t* n) {
  return guarded([&] {
    need(pod, "pod");
    need(n, "n");
    *n = static_cast<std::size_t>(pod->basis.modes.rows());
  });
}

ll_status ll_pod_eigenvalues(const ll_pod* pod, double* out, size_t capacity) {
  return guarded([&] {
    need(pod, "pod");
    copy_out(pod->basis.eigenvalues, out, capacity, "eigenvalues");
  });
}

ll_status ll_pod_modes(const ll_pod* pod, double* out, size_t capacity) {
  return guarded([&] {
    need(pod, "pod");
    copy_out(pod->basis.modes, out, capacity, "modes");
  });
}

ll_status ll_pod_coeffs(const ll_pod* pod, double* out, size_t capacity, size_t* n_t) {
  return guarded([&] {
    need(pod, "pod");
    if (n_t) *n_t = static_cast<std::size_t>(pod->basis.coeffs.cols());
    if (out) copy_out(pod->basis.coeffs, out, capacity, "coefficients");
  });
}

ll_status ll_pod_export(const ll_pod* pod, const char* dir) {
  return guarded([&] {
    need(pod, "pod");
    need(dir, "dir");
    const std::filesystem::path d(dir);
    std::filesystem::create_directories(d);
    const PodBasis& b = pod->basis;
    const std::size_t r = b.rank();
    write_csv(d / "modes.csv", b.modes, numbered("mode", r));
    Matrix coeffs(b.coeffs.cols(), b.coeffs.rows() + 1);
    for (Eigen::Index t = 0; t < coeffs.rows(); ++t) coeffs(t, 0) = static_cast<double>(t) * pod->dt;
    coeffs.rightCols(b.coeffs.rows()) = b.coeffs.transpose();
    auto coeff_header = numbered("mode", r);
    coeff_header.insert(coeff_header.begin(), "time");
    write_csv(d / "coeffs.csv", coeffs, coeff_header);
    const EnergySpectrum e = energy_spectrum(b);
    Matrix eig(static_cast<Eigen::Index>(r), 2), energy(static_cast<Eigen::Index>(r), 3);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(r); ++i) {
      eig(i, 0) = static_cast<double>(i + 1);
      eig(i, 1) = b.eigenvalues(i);
      energy(i, 0) = static_cast<double>(i + 1);
      energy(i, 1) = e.percent(i);
      energy(i, 2) = e.cumulative(i);
    }
    write_csv(d / "eigenvalues.csv", eig, {"mode", "eigenvalue"});
    write_csv(d / "energy.csv", energy, {"mode", "percent", "cumulative_percent"});
    write_text(d / "grid.json", grid_to_json(pod->grid).dump(2) + "\n");
    SnapshotMatrix basis_file;
    basis_file.values = b.modes;
    basis_file.grid = pod->grid;
    basis_file.dt = pod->dt;
    save_dataset(basis_file, d / "basis.snap");
    json meta{{"data_hash", pod->data_hash},
              {"rank", r},
              {"n", b.modes.rows()},
              {"n_t", b.coeffs.cols()},
              {"dt", pod->dt},
              {"eigenvalues", std::vector<double>(b.eigenvalues.data(), b.eigenvalues.data() + b.eigenvalues.size())},
              {"modes_for_95_percent", e.modes_for(95.0)},
              {"modes_for_99_percent", e.modes_for(99.0)}};
    write_text(d / "pod.json", meta.dump(2) + "\n");
  });
}

ll_status ll_pod_load(const char* dir, ll_pod** out) {
  return guarded([&] {
    need(dir, "dir");
    need(out, "out");
    const std::filesystem::path d(dir);
    const std::string what = (d / "pod.json").string();
    const json meta = detail::parse_json(read_text(d / "pod.json"), what);
    SnapshotMatrix basis_file = load_dataset(d / "basis.snap");
    auto pod = std::make_unique<ll_pod>();
    pod->data_hash = detail::get<std::string>(meta, "data_hash", what);
    pod->dt = basis_file.dt;
    pod->grid = basis_file.grid;
    pod->basis.modes = std::move(basis_file.values);
    const auto eig = detail::get<std::vector<double>>(meta, "eigenvalues", what);
    if (eig.size() != static_cast<std::size_t>(pod->basis.modes.cols())) {
      throw FormatError(what + ": " + std::to_string(eig.size()) + " eigenvalues for " +
                        std::to_string(pod->basis.modes.cols()) + " modes");
    }
    pod->basis.eigenvalues = Eigen::Map<const Vector>(eig.data(), static_cast<Eigen::Index>(eig.size()));
    pod->basis.weights = pod->grid.weights();
    const CsvTable coeffs = read_csv(d / "coeffs.csv", true);
    if (coeffs.values.cols() != pod->basis.modes.cols() + 1) {
      throw FormatError((d / "coeffs.csv").string() + ": column count does not match the basis rank");
    }
    pod->basis.coeffs = coeffs.values.rightCols(pod->basis.modes.cols()).transpose();
    *out = pod.release();
  });
}

ll_status ll_pod_data_hash(const ll_pod* pod, char** hex_out) {
  return guarded([&] {
    need(pod, "pod");
    need(hex_out, "hex_out");
    *hex_out = dup(pod->data_hash);
  });
}

ll_status ll_pod_modes_for(const ll_pod* pod, double percent, size_t* n_modes) {
  return guarded([&] {
    need(pod, "pod");
    need(n_modes, "n_modes");
    *n_modes = energy_spectrum(pod->basis).modes_for(percent);
  });
}

ll_status ll_pod_reconstruct(const ll_pod* pod, size_t n_modes, double* out, size_t capacity) {
  return guarded([&] {
    need(pod, "pod");
    copy_out(reconstruct(pod->basis, n_modes), out, capacity, "reconstruction");
  });
}

void ll_pod_free(ll_pod* pod) { delete pod; }

// ---------------------------------------------------------------------------
// Networks and training

ll_status ll_preset_names(char** json_out) {
  return guarded([&] {
    need(json_out, "json_out");
    *json_out = dup(json(preset_names()).dump());
  });
}

ll_status ll_preset_json(const char* name, char** json_out) {
  return guarded([&] {
    need(name, "name");
    need(json_out, "json_out");
    *json_out = dup(std::string(preset_json(name)));
  });
}

ll_status ll_network_create(const char* config_json, size_t data_width, ll_network** out) {
  return guarded([&] {
    need(config_json, "config_json");
    need(out, "out");
    const ArchitectureConfig cfg = ArchitectureConfig::from_json(config_json);
    *out = new ll_network{initialise_network(cfg, data_width)};
  });
}

ll_status ll_network_load(const char* config_json, size_t data_width, const char* path, ll_network** out) {
  return guarded([&] {
    need(config_json, "config_json");
    need(path, "path");
    need(out, "out");
    const ArchitectureConfig cfg = ArchitectureConfig::from_json(config_json);
    *out = new ll_network{Network::load(cfg, data_width, path)};
  });
}

ll_status ll_network_save(const ll_network* net, const char* path) {
  return guarded([&] {
    need(net, "network");
    need(path, "path");
    net->net.save(path);
  });
}

ll_status ll_network_config_json(const ll_network* net, char** json_out) {
  return guarded([&] {
    need(net, "network");
    need(json_out, "json_out");
    *json_out = dup(net->net.config().to_json());
  });
}

ll_status ll_network_latent_dim(const ll_network* net, size_t* n_z) {
  return guarded([&] {
    need(net, "network");
    need(n_z, "n_z");
    *n_z = net->net.latent_dim();
  });
}

ll_status ll_network_data_width(const ll_network* net, size_t* n) {
  return guarded([&] {
    need(net, "network");
    need(n, "n");
    *n = net->net.data_width();
  });
}

ll_status ll_network_parameter_count(const ll_network* net, size_t* count) {
  return guarded([&] {
    need(net, "network");
    need(count, "count");
    *count = net->net.parameter_count();
  });
}

ll_status ll_network_hashes(const ll_network* net, char** architecture_hex, char** data_hex) {
  return guarded([&] {
    need(net, "network");
    if (architecture_hex) {
      *architecture_hex = dup(hash_hex(net->net.config().architecture_hash(net->net.data_width())));
    }
    if (data_hex) *data_hex = dup(hash_hex(net->net.data_hash()));
  });
}

ll_status ll_checkpoint_hashes(const char* path, char** architecture_hex, char** data_hex) {
  return guarded([&] {
    need(path, "path");
    const CheckpointInfo info = read_checkpoint_info(read_file(path));
    if (architecture_hex) *architecture_hex = dup(hash_hex(info.architecture_hash));
    if (data_hex) *data_hex = dup(hash_hex(info.data_hash));
  });
}

ll_status ll_network_set_data_hash(ll_network* net, const char* hex) {
  return guarded([&] {
    need(net, "network");
    need(hex, "hex");
    net->net.set_data_hash(parse_hex(hex));
  });
}

void ll_network_free(ll_network* net) { delete net; }

ll_status ll_network_encode(const ll_network* net, const double* x, size_t n_t, double* z_out) {
  return guarded([&] {
    need(net, "network");
    const Matrix z = net->net.encode(view(x, net->net.data_width(), n_t, "x"));
    copy_out(z, z_out, static_cast<std::size_t>(z.size()), "z_out");
  });
}

ll_status ll_network_decode(const ll_network* net, const double* z, size_t n_t, double* y_out) {
  return guarded([&] {
    need(net, "network");
    const Matrix y = net->net.decode(view(z, net->net.latent_dim(), n_t, "z"));
    copy_out(y, y_out, static_cast<std::size_t>(y.size()), "y_out");
  });
}

ll_status ll_network_decode_fields(const ll_network* net, const double* z, size_t n_t, double* y_out,
                                   size_t capacity, size_t* n_fields) {
  return guarded([&] {
    need(net, "network");
    const auto fields = net->net.decode_fields(view(z, net->net.latent_dim(), n_t, "z"));
    if (n_fields) *n_fields = fields.size();
    if (!y_out) return;
    const std::size_t each = net->net.data_width() * n_t;
    require(capacity >= each * fields.size(), "decode_fields: output buffer too small");
    for (std::size_t i = 0; i < fields.size(); ++i) {
      std::memcpy(y_out + i * each, fields[i].data(), each * sizeof(double));
    }
  });
}

ll_status ll_network_decoder_jacobian(const ll_network* net, const double* z, double* jac_out) {
  return guarded([&] {
    need(net, "network");
    const Matrix j = net->net.decoder_jacobian(view(z, net->net.latent_dim(), 1, "z"));
    copy_out(j, jac_out, static_cast<std::size_t>(j.size()), "jac_out");
  });
}

ll_status ll_train(ll_network* net, const ll_dataset* ds, const char* train_json, ll_epoch_callback cb, void* user,
                   ll_train_report** out) {
  return guarded([&] {
    need(net, "network");
    need(ds, "dataset");
    need(out, "out");
    const TrainConfig cfg = resolve_train(net->net, train_json);
    TrainReport report = train(net->net, ds->q.values, cfg, callback_options(cb, user));
    net->net.set_data_hash(parse_hex(dataset_hash(ds->q)));
    *out = new ll_train_report{std::move(report)};
  });
}

ll_status ll_train_decoder(ll_network* net, const double* z, size_t n_z, const ll_dataset* ds,
                           const char* train_json, ll_epoch_callback cb, void* user, ll_train_report** out) {
  return guarded([&] {
    need(net, "network");
    need(ds, "dataset");
    need(out, "out");
    const TrainConfig cfg = resolve_train(net->net, train_json);
    TrainReport report =
        train_decoder(net->net, view(z, n_z, ds->q.nt(), "z"), ds->q.values, cfg, callback_options(cb, user));
    net->net.set_data_hash(parse_hex(dataset_hash(ds->q)));
    *out = new ll_train_report{std::move(report)};
  });
}

ll_status ll_train_report_json(const ll_train_report* report, char** json_out) {
  return guarded([&] {
    need(report, "report");
    need(json_out, "json_out");
    *json_out = dup(report->report.to_json());
  });
}

ll_status ll_train_report_final_mse(const ll_train_report* report, double* mse_out) {
  return guarded([&] {
    need(report, "report");
    need(mse_out, "mse");
    *mse_out = report->report.final_mse;
  });
}

ll_status ll_train_report_wall_seconds(const ll_train_report* report, double* seconds) {
  return guarded([&] {
    need(report, "report");
    need(seconds, "seconds");
    *seconds = report->report.wall_seconds;
  });
}

void ll_train_report_free(ll_train_report* report) { delete report; }

// ---------------------------------------------------------------------------
// Decoder decomposition

ll_status ll_decoder_coefficients(const ll_pod* pod, const double* y, size_t n_t, size_t n_modes, double* b_out) {
  return guarded([&] {
    need(pod, "pod");
    const Matrix b =
        decoder_coefficients(view(y, static_cast<std::size_t>(pod->basis.modes.rows()), n_t, "y"), pod->basis, n_modes);
    copy_out(b, b_out, static_cast<std::size_t>(b.size()), "b_out");
  });
}

ll_status ll_sensitivity_compute(const ll_network* net, const double* z, size_t n_t, const ll_pod* pod,
                                 const char* options_json, ll_sensitivity** out) {
  return guarded([&] {
    need(net, "network");
    need(pod, "pod");
    need(out, "out");
    const LatentSeries latents = LatentSeries::from(view(z, net->net.latent_dim(), n_t, "z"));
    *out = new ll_sensitivity{sensitivities(net->net, latents, pod->basis, parse_sensitivity_options(options_json))};
  });
}

ll_status ll_sensitivity_shape(const ll_sensitivity* s, size_t* n_z, size_t* n_modes) {
  return guarded([&] {
    need(s, "sensitivity");
    if (n_z) *n_z = s->report.latent_dim;
    if (n_modes) *n_modes = s->report.n_modes;
  });
}

ll_status ll_sensitivity_epsilon(const ll_sensitivity* s, double* out, size_t capacity) {
  return guarded([&] {
    need(s, "sensitivity");
    copy_out(s->report.epsilon, out, capacity, "epsilon");
  });
}

ll_status ll_sensitivity_dbdz(const ll_sensitivity* s, size_t mode, size_t latent, size_t t, double* value) {
  return guarded([&] {
    need(s, "sensitivity");
    need(value, "value");
    *value = s->report.dbdz(mode, latent, t);
  });
}

ll_status ll_sensitivity_summary_json(const ll_sensitivity* s, char** json_out) {
  return guarded([&] {
    need(s, "sensitivity");
    need(json_out, "json_out");
    const SensitivityReport& r = s->report;
    std::vector<std::size_t> excluded;
    for (std::size_t i : r.excluded) excluded.push_back(i + 1);
    json doc{{"method", std::string(to_string(r.options.method))},
             {"normalization", std::string(to_string(r.options.normalization))},
             {"dz_fraction", r.options.dz_fraction},
             {"n_modes", r.n_modes},
             {"latent_dim", r.latent_dim},
             {"n_t", r.nt},
             {"latent_std", std::vector<double>(r.sigma.data(), r.sigma.data() + r.sigma.size())},
             {"excluded_latents", excluded},
             {"warnings", r.warnings}};
    *json_out = dup(doc.dump(2));
  });
}

void ll_sensitivity_free(ll_sensitivity* s) { delete s; }

ll_status ll_max_relative_gap(const double* a, const double* b, size_t count, double* gap) {
  return guarded([&] {
    need(gap, "gap");
    *gap = max_relative_gap(view(a, count, 1, "a"), view(b, count, 1, "b"));
  });
}

ll_status ll_equivalent_energy(const ll_pod* pod, const double* y, size_t n_t, size_t n_modes, double* energy_out,
                               double* percent_out) {
  return guarded([&] {
    need(pod, "pod");
    const EquivalentEnergy e =
        equivalent_energy(view(y, static_cast<std::size_t>(pod->basis.modes.rows()), n_t, "y"), pod->basis, n_modes);
    copy_out(e.energy, energy_out, static_cast<std::size_t>(e.energy.size()), "energy_out");
    if (percent_out) copy_out(e.percent, percent_out, static_cast<std::size_t>(e.percent.size()), "percent_out");
  });
}

ll_status ll_rank_latents(const double* epsilon, size_t n_z, size_t n_modes, const size_t* target_modes,
                          size_t n_targets, size_t* order_out, double* scores_out) {
  return guarded([&] {
    need(order_out, "order_out");
    require(n_targets == 0 || target_modes, "target_modes must not be null");
    const Matrix eps = view(epsilon, n_z, n_modes, "epsilon");
    const std::vector<std::size_t> targets(target_modes, target_modes + n_targets);
    const auto order = rank_latents(eps, targets);
    std::copy(order.begin(), order.end(), order_out);
    if (scores_out) {
      const Vector scores = latent_scores(eps, targets);
      std::memcpy(scores_out, scores.data(), static_cast<std::size_t>(scores.size()) * sizeof(double));
    }
  });
}

ll_status ll_filter_latents(const ll_network* net, const double* z, size_t n_t, const size_t* keep, size_t n_keep,
                            double* z_f_out, double* y_f_out) {
  return guarded([&] {
    need(net, "network");
    require(n_keep == 0 || keep, "keep must not be null");
    const FilteredOutput f = filter_latents(net->net, view(z, net->net.latent_dim(), n_t, "z"),
                                            std::vector<std::size_t>(keep, keep + n_keep));
    if (z_f_out) copy_out(f.z, z_f_out, static_cast<std::size_t>(f.z.size()), "z_f_out");
    if (y_f_out) copy_out(f.y, y_f_out, static_cast<std::size_t>(f.y.size()), "y_f_out");
  });
}

// ---------------------------------------------------------------------------
// Spectra

ll_status ll_spectrum_fft(const double* signals, size_t rows, size_t cols, double dt, int normalize_by_std,
                          const char* window, ll_spectrum** out) {
  return guarded([&] {
    need(out, "out");
    const Window w = window ? parse_window(window) : Window::kNone;
    *out = new ll_spectrum{fft_magnitude(view(signals, rows, cols, "signals"), dt, normalize_by_std != 0, w)};
  });
}

ll_status ll_spectrum_welch(const double* signals, size_t rows, size_t cols, double fs, size_t segment_length,
                            size_t overlap, const char* window, const double* channel_weights, ll_spectrum** out) {
  return guarded([&] {
    need(out, "out");
    const Window w = window ? parse_window(window) : Window::kHann;
    Vector weights;
    if (channel_weights) weights = view(channel_weights, rows, 1, "channel_weights");
    *out = new ll_spectrum{welch_psd(view(signals, rows, cols, "signals"), fs, segment_length, overlap, w,
                                     channel_weights ? &weights : nullptr)};
  });
}

ll_status ll_spectrum_premultiply(const ll_spectrum* s, ll_spectrum** out) {
  return guarded([&] {
    need(s, "spectrum");
    need(out, "out");
    *out = new ll_spectrum{premultiply(s->s)};
  });
}

ll_status ll_spectrum_size(const ll_spectrum* s, size_t* n) {
  return guarded([&] {
    need(s, "spectrum");
    need(n, "n");
    *n = s->s.size();
  });
}

ll_status ll_spectrum_data(const ll_spectrum* s, double* frequency, double* value, size_t capacity) {
  return guarded([&] {
    need(s, "spectrum");
    if (frequency) copy_out(s->s.frequency, frequency, capacity, "frequency");
    if (value) copy_out(s->s.value, value, capacity, "value");
  });
}

ll_status ll_spectrum_band_power(const ll_spectrum* s, double lo, double hi, double* power) {
  return guarded([&] {
    need(s, "spectrum");
    need(power, "power");
    *power = band_power(s->s, lo, hi);
  });
}

ll_status ll_spectrum_peak(const ll_spectrum* s, double lo, double hi, double* frequency, double* value) {
  return guarded([&] {
    need(s, "spectrum");
    const std::size_t k = peak_in_band(s->s, lo, hi);
    if (frequency) *frequency = s->s.frequency(static_cast<Eigen::Index>(k));
    if (value) *value = s->s.value(static_cast<Eigen::Index>(k));
  });
}

void ll_spectrum_free(ll_spectrum* s) { delete s; }

// ---------------------------------------------------------------------------
// Tables, plots and files

ll_status ll_table_read_csv(const char* path, int has_header, ll_table** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new ll_table{read_csv(path, has_header != 0)};
  });
}

ll_status ll_table_shape(const ll_table* t, size_t* rows, size_t* cols) {
  return guarded([&] {
    need(t, "table");
    if (rows) *rows = static_cast<std::size_t>(t->table.values.rows());
    if (cols) *cols = static_cast<std::size_t>(t->table.values.cols());
  });
}

ll_status ll_table_values(const ll_table* t, double* out, size_t capacity) {
  return guarded([&] {
    need(t, "table");
    const Matrix row_major = t->table.values.transpose();
    copy_out(row_major, out, capacity, "table values");
  });
}

ll_status ll_table_header_json(const ll_table* t, char** json_out) {
  return guarded([&] {
    need(t, "table");
    need(json_out, "json_out");
    *json_out = dup(json(t->table.header).dump());
  });
}

void ll_table_free(ll_table* t) { delete t; }

ll_status ll_write_csv(const char* path, const double* values, size_t rows, size_t cols, const char* header_json) {
  return guarded([&] {
    need(path, "path");
    std::vector<std::string> header;
    if (header_json) {
      header = detail::get<std::vector<std::string>>(json{{"header", detail::parse_json(header_json, "header")}},
                                                     "header", "header");
      require(header.empty() || header.size() == cols, "write_csv: header has " + std::to_string(header.size()) +
                                                           " names for " + std::to_string(cols) + " columns");
    }
    const Matrix m = view(values, cols, rows, "values").transpose();
    write_csv(path, m, header);
  });
}

ll_status ll_plot_csv(const char* csv_path, const char* kind, const char* grid_json, const char* options_json,
                      char** svg_out) {
  return guarded([&] {
    need(csv_path, "csv_path");
    need(svg_out, "svg_out");
    std::string k = kind ? kind : "auto";
    const CsvTable table = read_csv(csv_path, true);
    require(table.values.rows() >= 1, std::string(csv_path) + ": no data rows");
    PlotOptions opts;
    std::vector<std::size_t> columns;
    if (options_json) {
      const std::string what = "plot options";
      const json doc = detail::parse_json(options_json, what);
      detail::check_keys(doc, {}, {"title", "x_label", "y_label", "log_x", "log_y", "columns"}, what);
      opts.title = detail::get_or<std::string>(doc, "title", "", what);
      opts.x_label = detail::get_or<std::string>(doc, "x_label", "", what);
      opts.y_label = detail::get_or<std::string>(doc, "y_label", "", what);
      opts.log_x = detail::get_or<bool>(doc, "log_x", false, what);
      opts.log_y = detail::get_or<bool>(doc, "log_y", false, what);
      columns = detail::get_or<std::vector<std::size_t>>(doc, "columns", {}, what);
    }
    const auto ncols = static_cast<std::size_t>(table.values.cols());
    for (std::size_t c : columns) {
      require(c >= 1 && c <= ncols, "plot: column " + std::to_string(c) + " out of range 1.." + std::to_string(ncols));
    }
    const std::string stem = std::filesystem::path(csv_path).stem().string();
    if (k == "auto") {
      if (grid_json && stem.rfind("modes", 0) == 0) {
        k = "modes";
      } else if (stem.rfind("epsilon", 0) == 0) {
        k = "heatmap";
      } else {
        k = "line";
      }
    }
    auto header_at = [&](std::size_t c) {
      return c < table.header.size() ? table.header[c] : "column " + std::to_string(c + 1);
    };
    if (k == "line") {
      require(ncols >= 2, "plot: a line plot needs an x column and at least one y column");
      std::vector<LineSeries> series;
      std::vector<std::size_t> ys = columns;
      if (ys.empty()) {
        for (std::size_t c = 2; c <= ncols; ++c) ys.push_back(c);
      }
      const Vector x = table.values.col(0);
      for (std::size_t c : ys) {
        require(c >= 2, "plot: column 1 is the x axis");
        const Vector y = table.values.col(static_cast<Eigen::Index>(c - 1));
        series.push_back({header_at(c - 1), {x.data(), x.data() + x.size()}, {y.data(), y.data() + y.size()}});
      }
      if (opts.x_label.empty()) opts.x_label = header_at(0);
      *svg_out = dup(svg_line_plot(series, opts));
    } else if (k == "heatmap") {
      *svg_out = dup(svg_heatmap(table.values, opts, numbered("latent", static_cast<std::size_t>(table.values.rows())),
                                 table.header));
    } else if (k == "modes") {
      need(grid_json, "grid_json");
      const GridMeta grid = grid_from_json(detail::parse_json(grid_json, "grid"));
      std::vector<std::size_t> cols = columns;
      if (cols.empty()) {
        for (std::size_t c = 1; c <= std::min<std::size_t>(ncols, 6); ++c) cols.push_back(c);
      }
      Matrix modes(table.values.rows(), static_cast<Eigen::Index>(cols.size()));
      std::vector<std::string> titles;
      for (std::size_t i = 0; i < cols.size(); ++i) {
        modes.col(static_cast<Eigen::Index>(i)) = table.values.col(static_cast<Eigen::Index>(cols[i] - 1));
        titles.push_back(header_at(cols[i] - 1));
      }
      *svg_out = dup(svg_mode_panels(modes, grid, opts, titles));
    } else {
      throw ContractViolation("unknown plot kind '" + k + "' (use auto, line, heatmap or modes)");
    }
  });
}

ll_status ll_sha256_file(const char* path, char** hex_out) {
  return guarded([&] {
    need(path, "path");
    need(hex_out, "hex_out");
    *hex_out = dup(sha256_hex(read_file(path)));
  });
}

ll_status ll_write_text(const char* path, const char* text) {
  return guarded([&] {
    need(path, "path");
    need(text, "text");
    write_text(path, text);
  });
}

}  // extern "C"
