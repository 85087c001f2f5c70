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

// Bias-free feedforward autoencoders. A Network is an encoder Stack followed
// by one decoder Stack (AE), one decoder per latent variable whose outputs
// are summed (MD-AE), or a decoder alone fed with externally supplied latents.
//
// Matrices hold one sample per column. Training inputs are divided by
// io_scale before the encoder and decoder outputs multiplied by it, so the
// public encode/decode functions work in physical units.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "latentlens/numerics.hpp"
#include "latentlens/train_config.hpp"

namespace latentlens {

enum class LayerKind { kDense, kTanh, kBatchNorm, kDropout };

struct LayerSpec {
  LayerKind kind = LayerKind::kDense;
  std::size_t width = 0;      // dense only
  std::optional<double> rate; // dropout only; falls back to TrainConfig::dropout

  bool operator==(const LayerSpec&) const = default;
};

enum class NetworkMode { kAe, kMdAe, kDecoderOnly };

enum class Activation { kTanh, kIdentity };

/// Declarative description of a network plus its training hyperparameters.
/// `encoder` and `decoder` list hidden layers only: the builder appends a
/// dense layer to `latent_dim` followed by `latent_activation` to the
/// encoder and a linear dense layer to the data width to every decoder.
struct ArchitectureConfig {
  std::string name;
  NetworkMode mode = NetworkMode::kAe;
  std::size_t latent_dim = 2;
  Activation activation = Activation::kTanh;
  /// Activation after the encoder's last dense layer; defaults to `activation`.
  Activation latent_activation = Activation::kTanh;
  double batch_norm_epsilon = 1e-3;
  std::vector<LayerSpec> encoder;
  std::vector<LayerSpec> decoder;
  TrainConfig train;

  /// Strict parse: every key is required and unknown keys are rejected.
  /// Convolutional layer kinds are reported as unsupported.
  static ArchitectureConfig from_json(std::string_view text);
  std::string to_json() const;
  void validate() const;

  /// Canonical JSON of everything that determines parameter shapes and
  /// evaluation-time behaviour, for the given data width.
  std::string architecture_json(std::size_t data_width) const;
  /// First 8 bytes (big-endian) of SHA-256 over architecture_json.
  std::uint64_t architecture_hash(std::size_t data_width) const;
};

std::string_view to_string(LayerKind kind);
std::string_view to_string(NetworkMode mode);

/// One trainable layer. Dense layers hold `param` as (out x in); batch-norm
/// layers hold the scale as an (n x 1) `param` and the running uncentred
/// second moment in `state`.
struct Layer {
  LayerKind kind = LayerKind::kDense;
  Matrix param;
  Vector state;
  double rate = 0.0;
  double epsilon = 1e-3;

  std::size_t in_width = 0;
  std::size_t out_width = 0;
};

enum class Pass { kEval, kTrain };

/// Activations recorded by a forward pass for use in backward.
struct Tape {
  std::vector<Matrix> inputs;      // input to each layer
  std::vector<Matrix> aux;         // tanh output, dropout mask, or BN inverse std
  std::vector<Vector> batch_moment;  // BN uncentred batch second moment (train)
  Pass pass = Pass::kEval;
};

/// Layer sequence with reverse-mode differentiation.
class Stack {
 public:
  Stack() = default;
  Stack(std::size_t in_width, std::vector<Layer> layers);

  std::size_t in_width() const { return in_width_; }
  std::size_t out_width() const { return out_width_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }
  std::size_t parameter_count() const;

  /// `rng` is required for training passes through dropout layers.
  Matrix forward(const Matrix& x, Pass pass, SeededRng* rng = nullptr, Tape* tape = nullptr) const;

  /// Propagates dL/dy back through a recorded tape. Parameter gradients are
  /// added into `grads` (one matrix per layer, shaped like `param`) when
  /// non-null. Returns dL/dx.
  Matrix backward(const Tape& tape, const Matrix& dy, std::vector<Matrix>* grads = nullptr) const;

  std::vector<Matrix> zero_grads() const;

 private:
  std::size_t in_width_ = 0;
  std::size_t out_width_ = 0;
  std::vector<Layer> layers_;
};

class Network {
 public:
  /// Builds and initialises a network for data of width `data_width`.
  /// Dense weights are uniform on +-sqrt(6/(fan_in+fan_out)).
  static Network build(const ArchitectureConfig& cfg, std::size_t data_width, SeededRng& rng);

  const ArchitectureConfig& config() const { return config_; }
  NetworkMode mode() const { return config_.mode; }
  std::size_t data_width() const { return data_width_; }
  std::size_t latent_dim() const { return config_.latent_dim; }
  std::size_t parameter_count() const;

  double io_scale() const { return io_scale_; }
  void set_io_scale(double s);
  std::uint64_t data_hash() const { return data_hash_; }
  void set_data_hash(std::uint64_t h) { data_hash_ = h; }

  const Stack& encoder() const { return encoder_; }
  Stack& encoder() { return encoder_; }
  const std::vector<Stack>& decoders() const { return decoders_; }
  std::vector<Stack>& decoders() { return decoders_; }

  /// Evaluation-mode passes in physical units. x: N x T, z: N_z x T.
  Matrix encode(const Matrix& x) const;
  Matrix decode(const Matrix& z) const;
  /// MD-AE: one field per decoder, summing to decode(z). AE: a single field.
  std::vector<Matrix> decode_fields(const Matrix& z) const;
  Matrix reconstruct(const Matrix& x) const { return decode(encode(x)); }

  /// Reverse-mode vector-Jacobian products of the decoder at one latent
  /// point: returns J^T C (N_z x k) for cotangents C (N x k), J = dY/dZ.
  Matrix decoder_vjp(const Vector& z, const Matrix& cotangents) const;
  /// Full decoder Jacobian (N x N_z) assembled from reverse-mode passes.
  Matrix decoder_jacobian(const Vector& z) const;

  /// Dense weight matrices in layer order (encoder first).
  std::vector<const Matrix*> dense_weights() const;

  void save(const std::filesystem::path& path) const;
  std::vector<std::uint8_t> encode_checkpoint() const;
  /// Loads parameters into a network built from `cfg`; refuses a
  /// checkpoint whose architecture hash differs, naming both hashes.
  static Network load(const ArchitectureConfig& cfg, std::size_t data_width,
                      const std::filesystem::path& path);
  static Network decode_checkpoint(const ArchitectureConfig& cfg, std::size_t data_width,
                                   const std::vector<std::uint8_t>& bytes);

 private:
  Matrix decode_scaled(const Matrix& z) const;

  ArchitectureConfig config_;
  std::size_t data_width_ = 0;
  double io_scale_ = 1.0;
  std::uint64_t data_hash_ = 0;
  Stack encoder_;
  std::vector<Stack> decoders_;
};

inline constexpr char kCheckpointMagic[8] = {'A', 'E', 'W', 'T', 'S', '0', '0', '1'};

/// Header fields of a checkpoint, readable without building a network.
struct CheckpointInfo {
  std::uint64_t architecture_hash = 0;
  std::uint64_t data_hash = 0;
  double io_scale = 1.0;
};
CheckpointInfo read_checkpoint_info(const std::vector<std::uint8_t>& bytes);

std::string hash_hex(std::uint64_t h);

}  // namespace latentlens
