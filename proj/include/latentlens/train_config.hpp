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

// Optimisation hyperparameters. Learning-rate schedules are expressed in
// epochs; fractional epochs address individual optimizer steps.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace latentlens {

enum class ScheduleKind { kConstant, kCosineRestarts };

struct Schedule {
  ScheduleKind kind = ScheduleKind::kCosineRestarts;
  double first_period = 50.0;  // epochs in the first cosine cycle
  double t_mul = 2.0;          // period growth at each restart
  double m_mul = 1.0;          // peak decay at each restart
  double min_fraction = 0.0;   // floor as a fraction of the current peak
};

struct TrainConfig {
  double learning_rate = 0.001;
  Schedule schedule;
  double l2_gamma = 0.0;
  double dropout = 0.0;
  std::size_t epochs = 500;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  bool shuffle = true;
  std::size_t patience = 100;  // epochs without improvement before warning

  void validate() const;
};

/// Strict JSON form used inside architecture documents and reports.
std::string train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(std::string_view text);

/// Learning rate after `epoch` (fractional) epochs.
double lr_at(double learning_rate, const Schedule& schedule, double epoch);

}  // namespace latentlens
