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

#include "latentlens/training.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>

#include "json_util.hpp"
#include "latentlens/data.hpp"
#include "latentlens/error.hpp"

namespace latentlens {
namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEpsilon = 1e-8;
constexpr double kMomentDecay = 0.99;

struct AdamSlot {
  Matrix* param;
  Matrix m;
  Matrix v;
  bool penalised;
};

class Trainer {
 public:
  Trainer(Network& net, const TrainConfig& cfg) : net_(net), cfg_(cfg) {
    auto add = [&](Stack& s) {
      for (auto& l : s.layers()) {
        if (l.param.size() == 0) continue;
        slots_.push_back({&l.param, Matrix::Zero(l.param.rows(), l.param.cols()),
                          Matrix::Zero(l.param.rows(), l.param.cols()), l.kind == LayerKind::kDense});
      }
    };
    add(net_.encoder());
    for (auto& d : net_.decoders()) add(d);
    // Dropout rates follow the training configuration unless fixed per layer.
    auto set_rates = [&](Stack& s, const std::vector<LayerSpec>& specs) {
      std::size_t k = 0;
      for (auto& l : s.layers()) {
        if (l.kind != LayerKind::kDropout) continue;
        while (k < specs.size() && specs[k].kind != LayerKind::kDropout) ++k;
        l.rate = (k < specs.size() && specs[k].rate) ? *specs[k].rate : cfg_.dropout;
        ++k;
      }
    };
    set_rates(net_.encoder(), net_.config().encoder);
    for (auto& d : net_.decoders()) set_rates(d, net_.config().decoder);
  }

  // inputs: encoder input (scaled data) or fixed latents; targets scaled.
  TrainReport run(const Matrix& inputs, const Matrix& targets, bool decoder_only, const TrainOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    const SeededRng master(cfg_.seed);
    SeededRng order_rng = master.split(1);
    SeededRng dropout_rng = master.split(2);
    const std::size_t nt = static_cast<std::size_t>(targets.cols());
    const std::size_t batch = std::min(cfg_.batch_size, nt);
    const std::size_t n_batches = (nt + batch - 1) / batch;
    const double s2 = net_.io_scale() * net_.io_scale();

    TrainReport report;
    report.config = cfg_;
    report.seed = cfg_.seed;
    report.epochs = cfg_.epochs;
    std::vector<std::size_t> order(nt);
    std::iota(order.begin(), order.end(), std::size_t{0});
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 0;
    bool warned = false;
    std::size_t step = 0;

    for (std::size_t epoch = 0; epoch < cfg_.epochs; ++epoch) {
      if (cfg_.shuffle) order_rng.shuffle(order);
      double epoch_loss = 0.0;
      for (std::size_t b = 0; b < n_batches; ++b) {
        const std::size_t lo = b * batch;
        const std::size_t hi = std::min(nt, lo + batch);
        const auto width = static_cast<Eigen::Index>(hi - lo);
        Matrix xb(inputs.rows(), width), yb(targets.rows(), width);
        for (Eigen::Index c = 0; c < width; ++c) {
          const auto src = static_cast<Eigen::Index>(order[lo + static_cast<std::size_t>(c)]);
          xb.col(c) = inputs.col(src);
          yb.col(c) = targets.col(src);
        }
        const std::string where = " at epoch " + std::to_string(epoch) + ", batch " + std::to_string(b);
        double loss = 0.0;
        try {
          loss = step_batch(xb, yb, decoder_only, dropout_rng,
                            lr_at(cfg_.learning_rate, cfg_.schedule,
                                  static_cast<double>(epoch) + static_cast<double>(b) / static_cast<double>(n_batches)),
                            ++step);
        } catch (const NumericalError& e) {
          throw NumericalError("training diverged" + where + ": " + e.what());
        }
        if (!std::isfinite(loss)) throw NumericalError("training diverged: non-finite loss" + where);
        epoch_loss += loss * static_cast<double>(width);
      }
      epoch_loss = epoch_loss / static_cast<double>(nt) * s2;
      report.loss_curve.push_back(epoch_loss);
      if (options.on_epoch) options.on_epoch(epoch, epoch_loss);
      if (epoch_loss < best) {
        best = epoch_loss;
        best_epoch = epoch;
      } else if (!warned && cfg_.patience > 0 && epoch - best_epoch >= cfg_.patience) {
        warned = true;
        std::string msg = "loss has not improved for " + std::to_string(cfg_.patience) + " epochs (best " +
                          std::to_string(best) + " at epoch " + std::to_string(best_epoch) + ")";
        report.warnings.push_back(msg);
        if (options.on_warning) options.on_warning(msg);
      }
    }

    recalibrate(inputs, decoder_only);
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
  }

 private:
  Matrix forward(const Matrix& xb, bool decoder_only, SeededRng& rng, Tape& enc_tape,
                 std::vector<Tape>& dec_tapes, Matrix& z) {
    z = decoder_only ? xb : net_.encoder().forward(xb, Pass::kTrain, &rng, &enc_tape);
    auto& decs = net_.decoders();
    dec_tapes.resize(decs.size());
    if (net_.mode() != NetworkMode::kMdAe) return decs[0].forward(z, Pass::kTrain, &rng, &dec_tapes[0]);
    Matrix y = Matrix::Zero(static_cast<Eigen::Index>(net_.data_width()), xb.cols());
    for (std::size_t i = 0; i < decs.size(); ++i) {
      y += decs[i].forward(z.row(static_cast<Eigen::Index>(i)), Pass::kTrain, &rng, &dec_tapes[i]);
    }
    return y;
  }

  double step_batch(const Matrix& xb, const Matrix& yb, bool decoder_only, SeededRng& rng, double lr,
                    std::size_t t) {
    Tape enc_tape;
    std::vector<Tape> dec_tapes;
    Matrix z;
    const Matrix y_hat = forward(xb, decoder_only, rng, enc_tape, dec_tapes, z);
    const Matrix diff = y_hat - yb;
    const double loss = diff.squaredNorm() / static_cast<double>(diff.size());
    const Matrix dy = diff * (2.0 / static_cast<double>(diff.size()));

    auto& decs = net_.decoders();
    std::vector<std::vector<Matrix>> dec_grads;
    Matrix dz(static_cast<Eigen::Index>(net_.latent_dim()), xb.cols());
    for (std::size_t i = 0; i < decs.size(); ++i) {
      dec_grads.push_back(decs[i].zero_grads());
      Matrix g = decs[i].backward(dec_tapes[i], dy, &dec_grads.back());
      if (net_.mode() == NetworkMode::kMdAe) {
        dz.row(static_cast<Eigen::Index>(i)) = g;
      } else {
        dz = std::move(g);
      }
    }
    std::vector<Matrix> enc_grads = net_.encoder().zero_grads();
    if (!decoder_only) net_.encoder().backward(enc_tape, dz, &enc_grads);

    std::vector<Matrix*> grads;
    for (auto& g : enc_grads) {
      if (g.size() > 0) grads.push_back(&g);
    }
    for (auto& dg : dec_grads) {
      for (auto& g : dg) {
        if (g.size() > 0) grads.push_back(&g);
      }
    }
    require(grads.size() == slots_.size(), "training: gradient bookkeeping mismatch");

    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));
    for (std::size_t k = 0; k < slots_.size(); ++k) {
      AdamSlot& slot = slots_[k];
      Matrix& g = *grads[k];
      if (slot.penalised && cfg_.l2_gamma > 0.0) g += (2.0 * cfg_.l2_gamma) * *slot.param;
      slot.m = kBeta1 * slot.m + (1.0 - kBeta1) * g;
      slot.v = kBeta2 * slot.v + (1.0 - kBeta2) * g.cwiseAbs2();
      slot.param->array() -=
          lr * (slot.m.array() / c1) / ((slot.v.array() / c2).sqrt() + kAdamEpsilon);
    }

    update_moments(net_.encoder(), enc_tape, decoder_only);
    for (std::size_t i = 0; i < decs.size(); ++i) update_moments(decs[i], dec_tapes[i], false);
    return loss;
  }

  static void update_moments(Stack& s, const Tape& tape, bool skip) {
    if (skip) return;
    auto& layers = s.layers();
    for (std::size_t k = 0; k < layers.size(); ++k) {
      if (layers[k].kind != LayerKind::kBatchNorm) continue;
      layers[k].state = kMomentDecay * layers[k].state + (1.0 - kMomentDecay) * tape.batch_moment[k];
    }
  }

  // Replaces the running moments with exact full-set moments, layer by
  // layer, so evaluation matches the final parameters.
  static Matrix recalibrate_stack(Stack& s, const Matrix& x) {
    Matrix h = x;
    for (auto& layer : s.layers()) {
      if (layer.kind == LayerKind::kBatchNorm) layer.state = h.array().square().rowwise().mean().matrix();
      Stack single(layer.in_width, {layer});
      h = single.forward(h, Pass::kEval);
    }
    return h;
  }

  void recalibrate(const Matrix& inputs, bool decoder_only) {
    const Matrix z = decoder_only ? inputs : recalibrate_stack(net_.encoder(), inputs);
    auto& decs = net_.decoders();
    for (std::size_t i = 0; i < decs.size(); ++i) {
      if (net_.mode() == NetworkMode::kMdAe) {
        recalibrate_stack(decs[i], z.row(static_cast<Eigen::Index>(i)));
      } else {
        recalibrate_stack(decs[i], z);
      }
    }
  }

  Network& net_;
  TrainConfig cfg_;
  std::vector<AdamSlot> slots_;
};

}  // namespace

double mse(const Matrix& y, const Matrix& y_hat) {
  require(y.rows() == y_hat.rows() && y.cols() == y_hat.cols(),
          "mse: shape mismatch (" + std::to_string(y.rows()) + "x" + std::to_string(y.cols()) + " vs " +
              std::to_string(y_hat.rows()) + "x" + std::to_string(y_hat.cols()) + ")");
  require(y.size() > 0, "mse: empty input");
  return (y - y_hat).squaredNorm() / static_cast<double>(y.size());
}

void TrainConfig::validate() const {
  require(std::isfinite(learning_rate) && learning_rate > 0, "train: learning_rate must be positive");
  require(epochs >= 1, "train: epochs must be at least 1");
  require(batch_size >= 1, "train: batch_size must be at least 1");
  require(l2_gamma >= 0, "train: l2_gamma must be non-negative");
  require(dropout >= 0 && dropout < 1, "train: dropout must be in [0, 1)");
  if (schedule.kind == ScheduleKind::kCosineRestarts) {
    require(schedule.first_period > 0, "schedule: first_period must be positive");
    require(schedule.t_mul > 0, "schedule: t_mul must be positive");
    require(schedule.m_mul > 0, "schedule: m_mul must be positive");
    require(schedule.min_fraction >= 0 && schedule.min_fraction <= 1, "schedule: min_fraction must be in [0, 1]");
  }
}

double lr_at(double learning_rate, const Schedule& schedule, double epoch) {
  require(epoch >= 0, "lr_at: step must be non-negative");
  if (schedule.kind == ScheduleKind::kConstant) return learning_rate;
  double period = schedule.first_period;
  double peak = learning_rate;
  double e = epoch;
  while (e >= period) {
    e -= period;
    period *= schedule.t_mul;
    peak *= schedule.m_mul;
  }
  const double cosine = 0.5 * (1.0 + std::cos(std::numbers::pi * e / period));
  return peak * ((1.0 - schedule.min_fraction) * cosine + schedule.min_fraction);
}

std::string TrainReport::to_json() const {
  detail::json doc{{"loss_curve", loss_curve},
                   {"final_mse", final_mse},
                   {"field_variance", field_variance},
                   {"relative_mse", field_variance > 0 ? final_mse / field_variance : 0.0},
                   {"epochs", epochs},
                   {"seed", seed},
                   {"config", detail::json::parse(train_config_to_json(config))},
                   {"warnings", warnings},
                   {"checkpoint", checkpoint}};
  return doc.dump(2);
}

Network initialise_network(const ArchitectureConfig& cfg, std::size_t data_width) {
  SeededRng rng = SeededRng(cfg.train.seed).split(0);
  return Network::build(cfg, data_width, rng);
}

TrainReport train(Network& net, const Matrix& q, const TrainConfig& cfg, const TrainOptions& options) {
  cfg.validate();
  require(net.mode() != NetworkMode::kDecoderOnly, "train: decoder-only networks need train_decoder");
  require(static_cast<std::size_t>(q.rows()) == net.data_width(),
          "train: data has " + std::to_string(q.rows()) + " rows, network expects " +
              std::to_string(net.data_width()));
  require(q.cols() >= 1 && all_finite(q), "train: data must be non-empty and finite");
  net.set_io_scale(rms_scale(q));
  const Matrix scaled = q / net.io_scale();
  Trainer trainer(net, cfg);
  TrainReport report = trainer.run(scaled, scaled, false, options);
  report.final_mse = mse(q, net.reconstruct(q));
  report.field_variance = q.squaredNorm() / static_cast<double>(q.size());
  return report;
}

TrainReport train_decoder(Network& net, const Matrix& z, const Matrix& q, const TrainConfig& cfg,
                          const TrainOptions& options) {
  cfg.validate();
  require(net.mode() == NetworkMode::kDecoderOnly, "train_decoder: network is not decoder-only");
  require(static_cast<std::size_t>(z.rows()) == net.latent_dim(), "train_decoder: latent width mismatch");
  require(static_cast<std::size_t>(q.rows()) == net.data_width(), "train_decoder: data width mismatch");
  require(z.cols() == q.cols() && q.cols() >= 1, "train_decoder: latent and data lengths differ");
  require(all_finite(z) && all_finite(q), "train_decoder: inputs must be finite");
  net.set_io_scale(rms_scale(q));
  Trainer trainer(net, cfg);
  TrainReport report = trainer.run(z, q / net.io_scale(), true, options);
  report.final_mse = mse(q, net.decode(z));
  report.field_variance = q.squaredNorm() / static_cast<double>(q.size());
  return report;
}

}  // namespace latentlens
