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

// Adam training of bias-free autoencoders against the mean squared error,
// optionally with an L2 penalty on the dense weights.

#include <functional>
#include <string>
#include <vector>

#include "latentlens/autonet.hpp"
#include "latentlens/numerics.hpp"
#include "latentlens/train_config.hpp"

namespace latentlens {

/// (1/(rows*cols)) * sum of squared differences.
double mse(const Matrix& y, const Matrix& y_hat);

struct TrainReport {
  std::vector<double> loss_curve;  // mean training-batch MSE per epoch, physical units
  double final_mse = 0.0;          // evaluation-mode MSE over the full set
  double field_variance = 0.0;     // mean of the squared targets
  std::size_t epochs = 0;
  std::uint64_t seed = 0;
  TrainConfig config;
  std::vector<std::string> warnings;
  std::string checkpoint;          // filled in by callers that save one
  double wall_seconds = 0.0;       // not serialised by to_json

  std::string to_json() const;
};

struct TrainOptions {
  /// Called after every epoch with (epoch index, epoch loss).
  std::function<void(std::size_t, double)> on_epoch;
  std::function<void(const std::string&)> on_warning;
};

/// Creates a network whose weights are drawn from the config's training seed.
Network initialise_network(const ArchitectureConfig& cfg, std::size_t data_width);

/// Trains an AE or MD-AE on the mean-removed snapshots `q` (N x N_t).
/// Sets the network's io_scale to the RMS of `q`. Batch-norm running
/// moments are recomputed over the full set after the last epoch.
TrainReport train(Network& net, const Matrix& q, const TrainConfig& cfg, const TrainOptions& options = {});

/// Trains the decoder of a decoder-only network to map fixed latents
/// `z` (N_z x N_t) onto `q`.
TrainReport train_decoder(Network& net, const Matrix& z, const Matrix& q, const TrainConfig& cfg,
                          const TrainOptions& options = {});

}  // namespace latentlens
