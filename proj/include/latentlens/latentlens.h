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

/* C interface to the latentlens library.
 *
 * Objects are opaque handles created by ll_*_create/compute/load functions
 * and released with the matching ll_*_free. Every function returns an
 * ll_status; on failure ll_last_error() describes the problem for the
 * calling thread. Strings returned through char** are heap-allocated and
 * must be released with ll_string_free.
 *
 * Matrices cross the boundary as column-major double arrays. Latent and
 * mode indices are 0-based. */

#ifndef LATENTLENS_H_
#define LATENTLENS_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LL_API __declspec(dllexport)
#else
#define LL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ll_status {
  LL_OK = 0,
  LL_ERR_USAGE = 2,     /* contract violation or invalid argument */
  LL_ERR_FORMAT = 3,    /* malformed, truncated or mismatched data */
  LL_ERR_NUMERICAL = 4, /* non-convergence, NaN, diverged training */
} ll_status;

typedef struct ll_dataset ll_dataset;
typedef struct ll_pod ll_pod;
typedef struct ll_network ll_network;
typedef struct ll_train_report ll_train_report;
typedef struct ll_sensitivity ll_sensitivity;
typedef struct ll_spectrum ll_spectrum;
typedef struct ll_table ll_table;

LL_API const char* ll_last_error(void);
LL_API const char* ll_version(void);
LL_API void ll_string_free(char* s);

/* ---- datasets ---------------------------------------------------------- */

/* kind is "laminar" or "turbulent". config_json may be NULL for defaults;
 * otherwise every key must be present. seed/n_t override the config when
 * the corresponding has_* flag is non-zero. */
LL_API ll_status ll_dataset_generate(const char* kind, const char* config_json, int has_seed, uint64_t seed,
                                     int has_nt, uint64_t n_t, ll_dataset** out);
LL_API ll_status ll_default_config(const char* kind, char** json_out);
LL_API ll_status ll_dataset_load(const char* path, ll_dataset** out);
LL_API ll_status ll_dataset_save(const ll_dataset* ds, const char* path);
/* layout is "rows=space" or "rows=time". */
LL_API ll_status ll_dataset_import_csv(const char* path, const char* layout, int has_header, double dt,
                                       ll_dataset** out);
LL_API ll_status ll_dataset_from_values(const double* values, size_t n, size_t n_t, double dt, ll_dataset** out);
/* Replaces the grid metadata; grid_json uses the grid.json layout. */
LL_API ll_status ll_dataset_set_grid(ll_dataset* ds, const char* grid_json);
LL_API ll_status ll_dataset_remove_mean(ll_dataset* ds);
LL_API ll_status ll_dataset_shape(const ll_dataset* ds, size_t* n, size_t* n_t);
LL_API ll_status ll_dataset_dt(const ll_dataset* ds, double* dt);
LL_API ll_status ll_dataset_values(const ll_dataset* ds, double* out, size_t capacity);
LL_API ll_status ll_dataset_weights(const ll_dataset* ds, double* out, size_t capacity);
LL_API ll_status ll_dataset_grid_json(const ll_dataset* ds, char** json_out);
/* 64-bit content hash of the serialised dataset, as 16 hex digits. */
LL_API ll_status ll_dataset_hash(const ll_dataset* ds, char** hex_out);
LL_API void ll_dataset_free(ll_dataset* ds);

/* ---- POD --------------------------------------------------------------- */

LL_API ll_status ll_pod_compute(const ll_dataset* ds, ll_pod** out);
LL_API ll_status ll_pod_rank(const ll_pod* pod, size_t* rank);
LL_API ll_status ll_pod_width(const ll_pod* pod, size_t* n);
LL_API ll_status ll_pod_eigenvalues(const ll_pod* pod, double* out, size_t capacity);
LL_API ll_status ll_pod_modes(const ll_pod* pod, double* out, size_t capacity);
LL_API ll_status ll_pod_coeffs(const ll_pod* pod, double* out, size_t capacity, size_t* n_t);
/* Writes modes.csv, eigenvalues.csv, energy.csv, coeffs.csv, grid.json,
 * basis.snap and pod.json into dir. */
LL_API ll_status ll_pod_export(const ll_pod* pod, const char* dir);
LL_API ll_status ll_pod_load(const char* dir, ll_pod** out);
LL_API ll_status ll_pod_data_hash(const ll_pod* pod, char** hex_out);
/* Modes needed to reach the given cumulative energy percentage. */
LL_API ll_status ll_pod_modes_for(const ll_pod* pod, double percent, size_t* n_modes);
LL_API ll_status ll_pod_reconstruct(const ll_pod* pod, size_t n_modes, double* out, size_t capacity);
LL_API void ll_pod_free(ll_pod* pod);

/* ---- networks and training --------------------------------------------- */

LL_API ll_status ll_preset_names(char** json_out);
LL_API ll_status ll_preset_json(const char* name, char** json_out);

/* Builds a network for data of width data_width, initialised from the
 * config's training seed. */
LL_API ll_status ll_network_create(const char* config_json, size_t data_width, ll_network** out);
LL_API ll_status ll_network_load(const char* config_json, size_t data_width, const char* path, ll_network** out);
LL_API ll_status ll_network_save(const ll_network* net, const char* path);
LL_API ll_status ll_network_config_json(const ll_network* net, char** json_out);
LL_API ll_status ll_network_latent_dim(const ll_network* net, size_t* n_z);
LL_API ll_status ll_network_data_width(const ll_network* net, size_t* n);
LL_API ll_status ll_network_parameter_count(const ll_network* net, size_t* count);
LL_API ll_status ll_network_hashes(const ll_network* net, char** architecture_hex, char** data_hex);
/* Reads the hashes stored in a checkpoint file without building a network. */
LL_API ll_status ll_checkpoint_hashes(const char* path, char** architecture_hex, char** data_hex);
LL_API ll_status ll_network_set_data_hash(ll_network* net, const char* hex);
LL_API void ll_network_free(ll_network* net);
/* x: data_width x n_t, z_out: n_z x n_t. */
LL_API ll_status ll_network_encode(const ll_network* net, const double* x, size_t n_t, double* z_out);
/* z: n_z x n_t, y_out: data_width x n_t. */
LL_API ll_status ll_network_decode(const ll_network* net, const double* z, size_t n_t, double* y_out);
/* MD-AE: field i (data_width x n_t) at y_out + i*data_width*n_t. */
LL_API ll_status ll_network_decode_fields(const ll_network* net, const double* z, size_t n_t, double* y_out,
                                          size_t capacity, size_t* n_fields);
/* jac_out: data_width x n_z at one latent point. */
LL_API ll_status ll_network_decoder_jacobian(const ll_network* net, const double* z, double* jac_out);

typedef void (*ll_epoch_callback)(size_t epoch, double loss, void* user);

/* train_json overrides the config's training block when non-NULL. */
LL_API ll_status ll_train(ll_network* net, const ll_dataset* ds, const char* train_json, ll_epoch_callback cb,
                          void* user, ll_train_report** out);
/* Fits a decoder-only network to map latents z (n_z x n_t) onto ds. */
LL_API ll_status ll_train_decoder(ll_network* net, const double* z, size_t n_z, const ll_dataset* ds,
                                  const char* train_json, ll_epoch_callback cb, void* user,
                                  ll_train_report** out);
LL_API ll_status ll_train_report_json(const ll_train_report* report, char** json_out);
LL_API ll_status ll_train_report_final_mse(const ll_train_report* report, double* mse);
LL_API ll_status ll_train_report_wall_seconds(const ll_train_report* report, double* seconds);
LL_API void ll_train_report_free(ll_train_report* report);

/* ---- decoder decomposition --------------------------------------------- */

/* B = Phi^T Y (n_modes x n_t); n_modes = 0 selects every retained mode. */
LL_API ll_status ll_decoder_coefficients(const ll_pod* pod, const double* y, size_t n_t, size_t n_modes,
                                         double* b_out);
/* options_json keys (all optional): method "reverse"|"fd", dz_fraction,
 * normalization "inverse-std"|"std"|"none", n_modes, keep_tensor. */
LL_API ll_status ll_sensitivity_compute(const ll_network* net, const double* z, size_t n_t, const ll_pod* pod,
                                        const char* options_json, ll_sensitivity** out);
LL_API ll_status ll_sensitivity_shape(const ll_sensitivity* s, size_t* n_z, size_t* n_modes);
/* epsilon: n_z x n_modes. */
LL_API ll_status ll_sensitivity_epsilon(const ll_sensitivity* s, double* out, size_t capacity);
LL_API ll_status ll_sensitivity_dbdz(const ll_sensitivity* s, size_t mode, size_t latent, size_t t, double* value);
LL_API ll_status ll_sensitivity_summary_json(const ll_sensitivity* s, char** json_out);
LL_API void ll_sensitivity_free(ll_sensitivity* s);

/* Largest elementwise relative gap between two equally shaped matrices. */
LL_API ll_status ll_max_relative_gap(const double* a, const double* b, size_t count, double* gap);
/* Weighted equivalent energy of y (data_width x n_t) per mode. */
LL_API ll_status ll_equivalent_energy(const ll_pod* pod, const double* y, size_t n_t, size_t n_modes,
                                      double* energy_out, double* percent_out);
/* epsilon: n_z x n_modes; order_out receives n_z latent indices. */
LL_API ll_status ll_rank_latents(const double* epsilon, size_t n_z, size_t n_modes, const size_t* target_modes,
                                 size_t n_targets, size_t* order_out, double* scores_out);
/* z_f and y_f receive the masked latents and the decoded output. */
LL_API ll_status ll_filter_latents(const ll_network* net, const double* z, size_t n_t, const size_t* keep,
                                   size_t n_keep, double* z_f_out, double* y_f_out);

/* ---- spectra ----------------------------------------------------------- */

/* signals: rows x cols, one signal per row. window: "none"|"hann". */
LL_API ll_status ll_spectrum_fft(const double* signals, size_t rows, size_t cols, double dt, int normalize_by_std,
                                 const char* window, ll_spectrum** out);
LL_API ll_status ll_spectrum_welch(const double* signals, size_t rows, size_t cols, double fs,
                                   size_t segment_length, size_t overlap, const char* window,
                                   const double* channel_weights, ll_spectrum** out);
LL_API ll_status ll_spectrum_premultiply(const ll_spectrum* s, ll_spectrum** out);
LL_API ll_status ll_spectrum_size(const ll_spectrum* s, size_t* n);
LL_API ll_status ll_spectrum_data(const ll_spectrum* s, double* frequency, double* value, size_t capacity);
LL_API ll_status ll_spectrum_band_power(const ll_spectrum* s, double lo, double hi, double* power);
LL_API ll_status ll_spectrum_peak(const ll_spectrum* s, double lo, double hi, double* frequency, double* value);
LL_API void ll_spectrum_free(ll_spectrum* s);

/* ---- tables, plots and files ------------------------------------------- */

LL_API ll_status ll_table_read_csv(const char* path, int has_header, ll_table** out);
LL_API ll_status ll_table_shape(const ll_table* t, size_t* rows, size_t* cols);
/* Row-major copy of the values. */
LL_API ll_status ll_table_values(const ll_table* t, double* out, size_t capacity);
LL_API ll_status ll_table_header_json(const ll_table* t, char** json_out);
LL_API void ll_table_free(ll_table* t);
/* values: rows x cols, row-major; header_json: JSON array of names or NULL. */
LL_API ll_status ll_write_csv(const char* path, const double* values, size_t rows, size_t cols,
                              const char* header_json);

/* kind: "auto"|"line"|"heatmap"|"modes". grid_json (from grid.json) is
 * required for "modes". options_json: title, x_label, y_label, log_x,
 * log_y, columns (array of 1-based column numbers). */
LL_API ll_status ll_plot_csv(const char* csv_path, const char* kind, const char* grid_json,
                             const char* options_json, char** svg_out);

LL_API ll_status ll_sha256_file(const char* path, char** hex_out);
LL_API ll_status ll_write_text(const char* path, const char* text);

#ifdef __cplusplus
}
#endif

#endif  /* LATENTLENS_H_ */
