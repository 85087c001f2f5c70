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

#include "latentlens/autonet.hpp"

#include <cmath>
#include <cstdio>

#include "bytes.hpp"
#include "json_util.hpp"
#include "latentlens/data.hpp"
#include "latentlens/error.hpp"
#include "latentlens/hash.hpp"

namespace latentlens {
namespace {

using detail::json;

constexpr std::string_view kUnsupportedKinds[] = {"conv2d", "conv", "maxpool", "max-pool",
                                                  "upsample", "bilinear-upsample", "flatten"};

LayerSpec parse_layer(const json& doc, const std::string& where) {
  if (!doc.is_object() || !doc.contains("kind")) throw FormatError(where + ": layer needs a 'kind'");
  const auto kind = detail::get<std::string>(doc, "kind", where);
  LayerSpec spec;
  if (kind == "dense") {
    detail::check_keys(doc, {"kind", "width"}, {}, where);
    spec.kind = LayerKind::kDense;
    spec.width = detail::get<std::size_t>(doc, "width", where);
  } else if (kind == "tanh" || kind == "activation-tanh") {
    detail::check_keys(doc, {"kind"}, {}, where);
    spec.kind = LayerKind::kTanh;
  } else if (kind == "batch-norm") {
    detail::check_keys(doc, {"kind"}, {}, where);
    spec.kind = LayerKind::kBatchNorm;
  } else if (kind == "dropout") {
    detail::check_keys(doc, {"kind"}, {"rate"}, where);
    spec.kind = LayerKind::kDropout;
    if (doc.contains("rate")) spec.rate = detail::get<double>(doc, "rate", where);
  } else {
    for (std::string_view bad : kUnsupportedKinds) {
      if (kind == bad) throw FormatError(where + ": unsupported layer kind '" + kind + "'");
    }
    throw FormatError(where + ": unknown layer kind '" + kind + "'");
  }
  return spec;
}

json layer_to_json(const LayerSpec& spec, bool with_rate) {
  json doc{{"kind", std::string(to_string(spec.kind))}};
  if (spec.kind == LayerKind::kDense) doc["width"] = spec.width;
  if (with_rate && spec.kind == LayerKind::kDropout && spec.rate) doc["rate"] = *spec.rate;
  return doc;
}

std::vector<LayerSpec> parse_layers(const json& doc, const std::string& where) {
  if (!doc.is_array()) throw FormatError(where + ": expected an array of layers");
  std::vector<LayerSpec> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    out.push_back(parse_layer(doc[i], where + " layer " + std::to_string(i)));
  }
  return out;
}

Schedule parse_schedule(const json& doc) {
  const std::string what = "schedule";
  if (!doc.is_object() || !doc.contains("kind")) throw FormatError("schedule: missing required key 'kind'");
  const auto kind = detail::get<std::string>(doc, "kind", what);
  Schedule s;
  if (kind == "constant") {
    detail::check_keys(doc, {"kind"}, {}, what);
    s.kind = ScheduleKind::kConstant;
  } else if (kind == "cosine-restarts") {
    detail::check_keys(doc, {"kind", "first_period", "t_mul", "m_mul", "min_fraction"}, {}, what);
    s.kind = ScheduleKind::kCosineRestarts;
    s.first_period = detail::get<double>(doc, "first_period", what);
    s.t_mul = detail::get<double>(doc, "t_mul", what);
    s.m_mul = detail::get<double>(doc, "m_mul", what);
    s.min_fraction = detail::get<double>(doc, "min_fraction", what);
  } else {
    throw FormatError("schedule: unknown kind '" + kind + "' (use constant or cosine-restarts)");
  }
  return s;
}

json schedule_to_json(const Schedule& s) {
  if (s.kind == ScheduleKind::kConstant) return json{{"kind", "constant"}};
  return json{{"kind", "cosine-restarts"},
              {"first_period", s.first_period},
              {"t_mul", s.t_mul},
              {"m_mul", s.m_mul},
              {"min_fraction", s.min_fraction}};
}

TrainConfig parse_train(const json& doc) {
  const std::string what = "train";
  detail::check_keys(doc,
                     {"learning_rate", "schedule", "l2_gamma", "dropout", "epochs", "batch_size",
                      "shuffle", "seed"},
                     {"patience"}, what);
  TrainConfig t;
  t.learning_rate = detail::get<double>(doc, "learning_rate", what);
  t.schedule = parse_schedule(doc.at("schedule"));
  t.l2_gamma = detail::get<double>(doc, "l2_gamma", what);
  t.dropout = detail::get<double>(doc, "dropout", what);
  t.epochs = detail::get<std::size_t>(doc, "epochs", what);
  t.batch_size = detail::get<std::size_t>(doc, "batch_size", what);
  t.shuffle = detail::get<bool>(doc, "shuffle", what);
  t.seed = detail::get<std::uint64_t>(doc, "seed", what);
  t.patience = detail::get_or<std::size_t>(doc, "patience", t.patience, what);
  return t;
}

Activation parse_activation(const std::string& text) {
  if (text == "tanh") return Activation::kTanh;
  if (text == "identity") return Activation::kIdentity;
  throw FormatError("architecture: unsupported activation '" + text + "' (use tanh or identity)");
}

const char* activation_name(Activation a) { return a == Activation::kTanh ? "tanh" : "identity"; }

NetworkMode parse_mode(const std::string& text) {
  if (text == "ae") return NetworkMode::kAe;
  if (text == "mdae") return NetworkMode::kMdAe;
  if (text == "decoder-only") return NetworkMode::kDecoderOnly;
  throw FormatError("architecture: unknown mode '" + text + "' (use ae, mdae or decoder-only)");
}

// Appends the implicit output layers and drops tanh for linear networks.
std::vector<LayerSpec> effective_layers(const std::vector<LayerSpec>& hidden, const ArchitectureConfig& cfg,
                                        std::size_t out_width, bool final_tanh) {
  std::vector<LayerSpec> out;
  for (const auto& spec : hidden) {
    if (spec.kind == LayerKind::kTanh && cfg.activation == Activation::kIdentity) continue;
    out.push_back(spec);
  }
  out.push_back(LayerSpec{LayerKind::kDense, out_width, std::nullopt});
  if (final_tanh && cfg.latent_activation == Activation::kTanh) out.push_back(LayerSpec{LayerKind::kTanh, 0, std::nullopt});
  return out;
}

Stack build_stack(const std::vector<LayerSpec>& specs, std::size_t in_width, const ArchitectureConfig& cfg,
                  SeededRng& rng, const std::string& where) {
  std::vector<Layer> layers;
  std::size_t width = in_width;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const LayerSpec& spec = specs[i];
    Layer layer;
    layer.kind = spec.kind;
    layer.in_width = width;
    layer.epsilon = cfg.batch_norm_epsilon;
    switch (spec.kind) {
      case LayerKind::kDense: {
        if (spec.width == 0) {
          throw ContractViolation(where + " layer " + std::to_string(i) + ": dense layer has zero width");
        }
        const double limit = std::sqrt(6.0 / static_cast<double>(width + spec.width));
        layer.param.resize(static_cast<Eigen::Index>(spec.width), static_cast<Eigen::Index>(width));
        for (Eigen::Index c = 0; c < layer.param.cols(); ++c) {
          for (Eigen::Index r = 0; r < layer.param.rows(); ++r) layer.param(r, c) = rng.uniform(-limit, limit);
        }
        width = spec.width;
        break;
      }
      case LayerKind::kBatchNorm:
        layer.param = Matrix::Ones(static_cast<Eigen::Index>(width), 1);
        layer.state = Vector::Ones(static_cast<Eigen::Index>(width));
        break;
      case LayerKind::kDropout:
        layer.rate = spec.rate.value_or(cfg.train.dropout);
        if (!(layer.rate >= 0.0 && layer.rate < 1.0)) {
          throw ContractViolation(where + " layer " + std::to_string(i) + ": dropout rate must be in [0, 1)");
        }
        break;
      case LayerKind::kTanh:
        break;
    }
    layer.out_width = width;
    layers.push_back(std::move(layer));
  }
  return Stack(in_width, std::move(layers));
}

}  // namespace

std::string train_config_to_json(const TrainConfig& t) {
  json doc{{"learning_rate", t.learning_rate},
           {"schedule", schedule_to_json(t.schedule)},
           {"l2_gamma", t.l2_gamma},
           {"dropout", t.dropout},
           {"epochs", t.epochs},
           {"batch_size", t.batch_size},
           {"shuffle", t.shuffle},
           {"seed", t.seed},
           {"patience", t.patience}};
  return doc.dump(2);
}

TrainConfig train_config_from_json(std::string_view text) {
  TrainConfig t = parse_train(detail::parse_json(text, "train"));
  t.validate();
  return t;
}

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::kDense: return "dense";
    case LayerKind::kTanh: return "tanh";
    case LayerKind::kBatchNorm: return "batch-norm";
    case LayerKind::kDropout: return "dropout";
  }
  return "?";
}

std::string_view to_string(NetworkMode mode) {
  switch (mode) {
    case NetworkMode::kAe: return "ae";
    case NetworkMode::kMdAe: return "mdae";
    case NetworkMode::kDecoderOnly: return "decoder-only";
  }
  return "?";
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// ArchitectureConfig

ArchitectureConfig ArchitectureConfig::from_json(std::string_view text) {
  const std::string what = "architecture";
  const json doc = detail::parse_json(text, what);
  detail::check_keys(doc, {"name", "mode", "latent_dim", "activation", "encoder", "decoder", "train"},
                     {"batch_norm_epsilon", "latent_activation"}, what);
  ArchitectureConfig c;
  c.name = detail::get<std::string>(doc, "name", what);
  c.mode = parse_mode(detail::get<std::string>(doc, "mode", what));
  c.latent_dim = detail::get<std::size_t>(doc, "latent_dim", what);
  c.activation = parse_activation(detail::get<std::string>(doc, "activation", what));
  c.latent_activation = doc.contains("latent_activation")
                            ? parse_activation(detail::get<std::string>(doc, "latent_activation", what))
                            : c.activation;
  c.batch_norm_epsilon = detail::get_or<double>(doc, "batch_norm_epsilon", c.batch_norm_epsilon, what);
  c.encoder = parse_layers(doc.at("encoder"), "encoder");
  c.decoder = parse_layers(doc.at("decoder"), "decoder");
  c.train = parse_train(doc.at("train"));
  c.validate();
  return c;
}

std::string ArchitectureConfig::to_json() const {
  json enc = json::array(), dec = json::array();
  for (const auto& l : encoder) enc.push_back(layer_to_json(l, true));
  for (const auto& l : decoder) dec.push_back(layer_to_json(l, true));
  const json train_doc = json::parse(train_config_to_json(train));
  json doc{{"name", name},
           {"mode", std::string(to_string(mode))},
           {"latent_dim", latent_dim},
           {"activation", activation_name(activation)},
           {"latent_activation", activation_name(latent_activation)},
           {"batch_norm_epsilon", batch_norm_epsilon},
           {"encoder", enc},
           {"decoder", dec},
           {"train", train_doc}};
  return doc.dump(2);
}

void ArchitectureConfig::validate() const {
  require(latent_dim >= 1, "architecture: latent_dim must be at least 1");
  require(batch_norm_epsilon > 0, "architecture: batch_norm_epsilon must be positive");
  if (mode == NetworkMode::kDecoderOnly) {
    require(encoder.empty(), "architecture: decoder-only networks take no encoder layers");
  }
  for (const auto* list : {&encoder, &decoder}) {
    const char* where = list == &encoder ? "encoder" : "decoder";
    for (std::size_t i = 0; i < list->size(); ++i) {
      const LayerSpec& s = (*list)[i];
      if (s.kind == LayerKind::kDense) {
        require(s.width > 0, std::string(where) + " layer " + std::to_string(i) + ": dense layer has zero width");
      }
      if (s.kind == LayerKind::kDropout && s.rate) {
        require(*s.rate >= 0 && *s.rate < 1,
                std::string(where) + " layer " + std::to_string(i) + ": dropout rate must be in [0, 1)");
      }
    }
  }
  train.validate();
}

std::string ArchitectureConfig::architecture_json(std::size_t data_width) const {
  json enc = json::array(), dec = json::array();
  for (const auto& l : encoder) enc.push_back(layer_to_json(l, false));
  for (const auto& l : decoder) dec.push_back(layer_to_json(l, false));
  json doc{{"mode", std::string(to_string(mode))},
           {"latent_dim", latent_dim},
           {"activation", activation_name(activation)},
           {"latent_activation", activation_name(latent_activation)},
           {"batch_norm_epsilon", batch_norm_epsilon},
           {"data_width", data_width},
           {"encoder", enc},
           {"decoder", dec}};
  return doc.dump();
}

std::uint64_t ArchitectureConfig::architecture_hash(std::size_t data_width) const {
  const std::string text = architecture_json(data_width);
  return sha256_u64(text.data(), text.size());
}

// ---------------------------------------------------------------------------
// Stack

Stack::Stack(std::size_t in_width, std::vector<Layer> layers)
    : in_width_(in_width), out_width_(in_width), layers_(std::move(layers)) {
  if (!layers_.empty()) out_width_ = layers_.back().out_width;
}

std::size_t Stack::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.param.size());
  return n;
}

std::vector<Matrix> Stack::zero_grads() const {
  std::vector<Matrix> g;
  g.reserve(layers_.size());
  for (const auto& l : layers_) g.push_back(Matrix::Zero(l.param.rows(), l.param.cols()));
  return g;
}

Matrix Stack::forward(const Matrix& x, Pass pass, SeededRng* rng, Tape* tape) const {
  if (static_cast<std::size_t>(x.rows()) != in_width_) {
    throw ContractViolation("forward: input has " + std::to_string(x.rows()) + " rows, layer expects " +
                            std::to_string(in_width_));
  }
  if (tape) {
    tape->pass = pass;
    tape->inputs.assign(layers_.size(), Matrix());
    tape->aux.assign(layers_.size(), Matrix());
    tape->batch_moment.assign(layers_.size(), Vector());
  }
  Matrix h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& layer = layers_[i];
    Matrix next;
    switch (layer.kind) {
      case LayerKind::kDense:
        next.noalias() = layer.param * h;
        break;
      case LayerKind::kTanh:
        next = h.array().tanh().matrix();
        if (tape) tape->aux[i] = next;
        break;
      case LayerKind::kBatchNorm: {
        Vector inv;
        if (pass == Pass::kTrain) {
          Vector moment = h.array().square().rowwise().mean().matrix();
          inv = (moment.array() + layer.epsilon).rsqrt().matrix();
          if (tape) tape->batch_moment[i] = std::move(moment);
        } else {
          inv = (layer.state.array() + layer.epsilon).rsqrt().matrix();
        }
        const Vector scale = layer.param.col(0).cwiseProduct(inv);
        next = scale.asDiagonal() * h;
        if (tape) tape->aux[i] = inv;
        break;
      }
      case LayerKind::kDropout:
        if (pass == Pass::kTrain && layer.rate > 0.0) {
          if (!rng) throw ContractViolation("forward: training pass through dropout needs a generator");
          const double keep = 1.0 / (1.0 - layer.rate);
          Matrix mask(h.rows(), h.cols());
          for (Eigen::Index c = 0; c < mask.cols(); ++c) {
            for (Eigen::Index r = 0; r < mask.rows(); ++r) mask(r, c) = rng->uniform() < layer.rate ? 0.0 : keep;
          }
          next = h.cwiseProduct(mask);
          if (tape) tape->aux[i] = std::move(mask);
        } else {
          next = h;
        }
        break;
    }
    if (tape) tape->inputs[i] = std::move(h);
    h = std::move(next);
  }
  if (!all_finite(h)) throw NumericalError("forward: non-finite activations");
  return h;
}

Matrix Stack::backward(const Tape& tape, const Matrix& dy, std::vector<Matrix>* grads) const {
  require(tape.inputs.size() == layers_.size(), "backward: tape does not match this stack");
  // A single-sample tape may be combined with several cotangent columns;
  // elementwise factors then broadcast across columns.
  Matrix g = dy;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const Layer& layer = layers_[k];
    const Matrix& x = tape.inputs[k];
    const bool broadcast = x.cols() == 1 && g.cols() != 1;
    require(broadcast || x.cols() == g.cols(), "backward: cotangent batch does not match tape");
    require(!(broadcast && grads), "backward: parameter gradients need one cotangent per sample");
    Matrix prev;
    switch (layer.kind) {
      case LayerKind::kDense:
        if (grads) (*grads)[k].noalias() += g * x.transpose();
        prev.noalias() = layer.param.transpose() * g;
        break;
      case LayerKind::kTanh: {
        const Matrix& y = tape.aux[k];
        if (broadcast) {
          const Vector d = (1.0 - y.col(0).array().square()).matrix();
          prev = d.asDiagonal() * g;
        } else {
          prev = g.cwiseProduct((1.0 - y.array().square()).matrix());
        }
        break;
      }
      case LayerKind::kBatchNorm: {
        const Vector inv = tape.aux[k].col(0);
        const Vector gamma = layer.param.col(0);
        if (grads) (*grads)[k].col(0) += (g.cwiseProduct(x)).rowwise().sum().cwiseProduct(inv);
        prev = gamma.cwiseProduct(inv).asDiagonal() * g;
        if (tape.pass == Pass::kTrain) {
          // The batch moment couples samples: d(inv)/dx_b = -inv^3 x_b / B.
          const double b = static_cast<double>(x.cols());
          const Vector s = (g.cwiseProduct(x)).rowwise().sum();
          const Vector coef = (gamma.array() * inv.array().cube() * s.array() / b).matrix();
          prev -= coef.asDiagonal() * x;
        }
        break;
      }
      case LayerKind::kDropout:
        if (tape.pass == Pass::kTrain && layer.rate > 0.0) {
          const Matrix& mask = tape.aux[k];
          prev = broadcast ? Matrix(mask.col(0).asDiagonal() * g) : Matrix(g.cwiseProduct(mask));
        } else {
          prev = std::move(g);
        }
        break;
    }
    g = std::move(prev);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Network

Network Network::build(const ArchitectureConfig& cfg, std::size_t data_width, SeededRng& rng) {
  cfg.validate();
  require(data_width >= 1, "build: data width must be positive");
  Network net;
  net.config_ = cfg;
  net.data_width_ = data_width;
  if (cfg.mode != NetworkMode::kDecoderOnly) {
    net.encoder_ = build_stack(effective_layers(cfg.encoder, cfg, cfg.latent_dim, true), data_width, cfg, rng,
                               "encoder");
  } else {
    net.encoder_ = Stack(cfg.latent_dim, {});
  }
  const auto dec_specs = effective_layers(cfg.decoder, cfg, data_width, false);
  if (cfg.mode == NetworkMode::kMdAe) {
    for (std::size_t i = 0; i < cfg.latent_dim; ++i) {
      net.decoders_.push_back(build_stack(dec_specs, 1, cfg, rng, "decoder " + std::to_string(i)));
    }
  } else {
    net.decoders_.push_back(build_stack(dec_specs, cfg.latent_dim, cfg, rng, "decoder"));
  }
  return net;
}

std::size_t Network::parameter_count() const {
  std::size_t n = encoder_.parameter_count();
  for (const auto& d : decoders_) n += d.parameter_count();
  return n;
}

void Network::set_io_scale(double s) {
  require(std::isfinite(s) && s > 0.0, "io_scale must be positive and finite");
  io_scale_ = s;
}

Matrix Network::encode(const Matrix& x) const {
  if (config_.mode == NetworkMode::kDecoderOnly) {
    throw ContractViolation("encode: decoder-only network has no encoder");
  }
  return encoder_.forward(x / io_scale_, Pass::kEval);
}

Matrix Network::decode_scaled(const Matrix& z) const {
  if (static_cast<std::size_t>(z.rows()) != config_.latent_dim) {
    throw ContractViolation("decode: latent matrix has " + std::to_string(z.rows()) + " rows, network has " +
                            std::to_string(config_.latent_dim) + " latents");
  }
  if (config_.mode != NetworkMode::kMdAe) return decoders_[0].forward(z, Pass::kEval);
  Matrix y = Matrix::Zero(static_cast<Eigen::Index>(data_width_), z.cols());
  for (std::size_t i = 0; i < decoders_.size(); ++i) {
    y += decoders_[i].forward(z.row(static_cast<Eigen::Index>(i)), Pass::kEval);
  }
  return y;
}

Matrix Network::decode(const Matrix& z) const { return decode_scaled(z) * io_scale_; }

std::vector<Matrix> Network::decode_fields(const Matrix& z) const {
  if (config_.mode != NetworkMode::kMdAe) return {decode(z)};
  require(static_cast<std::size_t>(z.rows()) == config_.latent_dim, "decode_fields: latent width mismatch");
  std::vector<Matrix> fields;
  for (std::size_t i = 0; i < decoders_.size(); ++i) {
    fields.push_back(decoders_[i].forward(z.row(static_cast<Eigen::Index>(i)), Pass::kEval) * io_scale_);
  }
  return fields;
}

Matrix Network::decoder_vjp(const Vector& z, const Matrix& cotangents) const {
  require(static_cast<std::size_t>(z.size()) == config_.latent_dim, "decoder_vjp: latent width mismatch");
  require(static_cast<std::size_t>(cotangents.rows()) == data_width_, "decoder_vjp: cotangent height mismatch");
  if (config_.mode != NetworkMode::kMdAe) {
    Tape tape;
    decoders_[0].forward(z, Pass::kEval, nullptr, &tape);
    return decoders_[0].backward(tape, cotangents) * io_scale_;
  }
  Matrix out(static_cast<Eigen::Index>(config_.latent_dim), cotangents.cols());
  for (std::size_t i = 0; i < decoders_.size(); ++i) {
    Tape tape;
    const auto row = static_cast<Eigen::Index>(i);
    decoders_[i].forward(z.segment(row, 1), Pass::kEval, nullptr, &tape);
    out.row(row) = decoders_[i].backward(tape, cotangents) * io_scale_;
  }
  return out;
}

Matrix Network::decoder_jacobian(const Vector& z) const {
  return decoder_vjp(z, Matrix::Identity(static_cast<Eigen::Index>(data_width_),
                                         static_cast<Eigen::Index>(data_width_)))
      .transpose();
}

std::vector<const Matrix*> Network::dense_weights() const {
  std::vector<const Matrix*> out;
  auto collect = [&](const Stack& s) {
    for (const auto& l : s.layers()) {
      if (l.kind == LayerKind::kDense) out.push_back(&l.param);
    }
  };
  collect(encoder_);
  for (const auto& d : decoders_) collect(d);
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints

std::vector<std::uint8_t> Network::encode_checkpoint() const {
  detail::ByteWriter w;
  w.raw(kCheckpointMagic, 8);
  w.little<std::uint64_t>(config_.architecture_hash(data_width_));
  w.little<std::uint64_t>(data_hash_);
  w.little<double>(io_scale_);
  std::vector<const Layer*> params, states;
  auto collect = [&](const Stack& s) {
    for (const auto& l : s.layers()) {
      if (l.param.size() > 0) params.push_back(&l);
      if (l.kind == LayerKind::kBatchNorm) states.push_back(&l);
    }
  };
  collect(encoder_);
  for (const auto& d : decoders_) collect(d);
  w.little<std::uint64_t>(params.size() + states.size());
  for (const Layer* l : params) {
    w.little<std::uint64_t>(static_cast<std::uint64_t>(l->param.size()));
    w.doubles(l->param.data(), static_cast<std::size_t>(l->param.size()));
  }
  for (const Layer* l : states) {
    w.little<std::uint64_t>(static_cast<std::uint64_t>(l->state.size()));
    w.doubles(l->state.data(), static_cast<std::size_t>(l->state.size()));
  }
  return w.take();
}

void Network::save(const std::filesystem::path& path) const { write_file(path, encode_checkpoint()); }

CheckpointInfo read_checkpoint_info(const std::vector<std::uint8_t>& bytes) {
  detail::ByteReader r(bytes, "checkpoint");
  r.need(8, "magic");
  if (std::memcmp(bytes.data(), kCheckpointMagic, 8) != 0) {
    throw FormatError("checkpoint: bad magic at offset 0 (expected AEWTS001)");
  }
  for (int i = 0; i < 8; ++i) r.little<std::uint8_t>("magic");
  CheckpointInfo info;
  info.architecture_hash = r.little<std::uint64_t>("architecture hash");
  info.data_hash = r.little<std::uint64_t>("data hash");
  info.io_scale = r.little<double>("io scale");
  return info;
}

Network Network::decode_checkpoint(const ArchitectureConfig& cfg, std::size_t data_width,
                                   const std::vector<std::uint8_t>& bytes) {
  const CheckpointInfo info = read_checkpoint_info(bytes);
  const std::uint64_t expected = cfg.architecture_hash(data_width);
  if (info.architecture_hash != expected) {
    throw FormatError("checkpoint architecture hash " + hash_hex(info.architecture_hash) +
                      " does not match configuration hash " + hash_hex(expected));
  }
  SeededRng rng(0);
  Network net = build(cfg, data_width, rng);
  net.set_io_scale(info.io_scale);
  net.data_hash_ = info.data_hash;

  detail::ByteReader r(bytes, "checkpoint");
  for (int i = 0; i < 8 + 8 + 8 + 8; ++i) r.little<std::uint8_t>("header");
  std::vector<Layer*> params, states;
  auto collect = [&](Stack& s) {
    for (auto& l : s.layers()) {
      if (l.param.size() > 0) params.push_back(&l);
      if (l.kind == LayerKind::kBatchNorm) states.push_back(&l);
    }
  };
  collect(net.encoder_);
  for (auto& d : net.decoders_) collect(d);
  const auto n_arrays = r.little<std::uint64_t>("array count");
  if (n_arrays != params.size() + states.size()) {
    throw FormatError("checkpoint: holds " + std::to_string(n_arrays) + " arrays, network needs " +
                      std::to_string(params.size() + states.size()));
  }
  auto read_into = [&](double* dst, std::size_t n, std::size_t index) {
    const auto len = r.little<std::uint64_t>("array length");
    if (len != n) {
      throw FormatError("checkpoint: array " + std::to_string(index) + " has " + std::to_string(len) +
                        " values, expected " + std::to_string(n));
    }
    r.doubles_into(dst, n, "array " + std::to_string(index));
  };
  std::size_t index = 0;
  for (Layer* l : params) read_into(l->param.data(), static_cast<std::size_t>(l->param.size()), index++);
  for (Layer* l : states) read_into(l->state.data(), static_cast<std::size_t>(l->state.size()), index++);
  if (r.pos() != r.size()) {
    throw FormatError("checkpoint: " + std::to_string(r.size() - r.pos()) + " trailing bytes after offset " +
                      std::to_string(r.pos()));
  }
  return net;
}

Network Network::load(const ArchitectureConfig& cfg, std::size_t data_width, const std::filesystem::path& path) {
  try {
    return decode_checkpoint(cfg, data_width, read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace latentlens
