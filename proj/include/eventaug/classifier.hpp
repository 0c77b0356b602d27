// Copyright 2026 The eventaug Authors.
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Linear softmax classifier trained by plain mini-batch gradient descent,
// with the implicit-augmentation mixer applied to every batch before the
// forward pass.
//
// SEDMDL01 model file (little-endian):
//   "SEDMDL01", u32 num_classes, u32 dim, num_classes*dim f32 weights
//   (row-major, one row per class), num_classes f32 biases, u32 length,
//   then that many bytes of JSON metadata.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "eventaug/core.hpp"
#include "eventaug/embedding_io.hpp"
#include "eventaug/error.hpp"
#include "eventaug/perturb.hpp"
#include "eventaug/rng.hpp"

namespace eventaug {

struct ClassifierModel {
  std::size_t num_classes = 0;
  std::size_t dim = 0;
  std::vector<double> weights;  // num_classes x dim
  std::vector<double> bias;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();

  ClassifierModel() = default;
  ClassifierModel(std::size_t classes, std::size_t d)
      : num_classes(classes), dim(d), weights(classes * d, 0.0), bias(classes, 0.0) {}

  double& w(std::size_t c, std::size_t k) { return weights[c * dim + k]; }
  double w(std::size_t c, std::size_t k) const { return weights[c * dim + k]; }

  void validate() const {
    if (weights.size() != num_classes * dim || bias.size() != num_classes) {
      throw DimensionError("classifier parameter shapes are inconsistent");
    }
    for (double v : weights) {
      if (!std::isfinite(v)) throw NonFiniteError("non-finite classifier weight");
    }
    for (double v : bias) {
      if (!std::isfinite(v)) throw NonFiniteError("non-finite classifier bias");
    }
  }
};

struct TrainConfig {
  int epochs = 100;
  std::size_t batch_size = 32;
  double learning_rate = 0.1;
  std::uint64_t seed = 42;
  std::optional<PerturbationConfig> implicit;
  /// >1 enables the parallel gradient path (not bitwise-reproducible
  /// against the single-threaded path; equal within rounding).
  unsigned threads = 1;

  void validate() const {
    if (epochs < 1) throw ValidationError("epochs must be >= 1");
    if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
      throw ValidationError("learning_rate must be > 0");
    }
    if (implicit) implicit->validate();
  }
};

template <std::floating_point T>
std::vector<double> logits(const ClassifierModel& model, std::span<const T> x) {
  if (x.size() != model.dim) throw DimensionError("logits: feature dimension mismatch");
  std::vector<double> z(model.num_classes);
  for (std::size_t c = 0; c < model.num_classes; ++c) {
    double s = model.bias[c];
    const double* w = model.weights.data() + c * model.dim;
    for (std::size_t k = 0; k < model.dim; ++k) s += w[k] * static_cast<double>(x[k]);
    z[c] = s;
  }
  return z;
}

/// Numerically stable softmax (max-shifted).
inline std::vector<double> softmax(std::span<const double> z) {
  std::vector<double> p(z.size());
  if (z.empty()) return p;
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (std::size_t c = 0; c < z.size(); ++c) sum += (p[c] = std::exp(z[c] - m));
  for (auto& v : p) v /= sum;
  return p;
}

/// First index of the maximum, so ties go to the lower class.
inline int argmax(std::span<const double> z) {
  return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

struct Prediction {
  std::vector<int> labels;
  std::vector<std::vector<double>> scores;  // logits per row
};

inline Prediction predict(const ClassifierModel& model, const EmbeddingMatrix& emb) {
  if (emb.dim() != model.dim) {
    throw DimensionError("predict: embedding dim " + std::to_string(emb.dim()) +
                         " != model dim " + std::to_string(model.dim));
  }
  Prediction out;
  out.labels.reserve(emb.rows());
  out.scores.reserve(emb.rows());
  for (std::size_t i = 0; i < emb.rows(); ++i) {
    auto z = logits(model, emb.row(i));
    out.labels.push_back(argmax(z));
    out.scores.push_back(std::move(z));
  }
  return out;
}

struct Gradient {
  double loss = 0.0;  // mean cross-entropy
  std::vector<double> weights;
  std::vector<double> bias;
};

namespace detail {

inline void accumulate_gradient(const ClassifierModel& model, const EmbeddingMatrix& x,
                                std::span<const int> labels, std::size_t begin, std::size_t end,
                                Gradient& g) {
  for (std::size_t i = begin; i < end; ++i) {
    auto row = x.row(i);
    const auto z = logits(model, row);
    const auto p = softmax(z);
    const auto y = static_cast<std::size_t>(labels[i]);
    const double zmax = *std::max_element(z.begin(), z.end());
    double lse = 0.0;
    for (double v : z) lse += std::exp(v - zmax);
    g.loss += zmax + std::log(lse) - z[y];
    for (std::size_t c = 0; c < model.num_classes; ++c) {
      const double d = p[c] - (c == y ? 1.0 : 0.0);
      g.bias[c] += d;
      double* gw = g.weights.data() + c * model.dim;
      for (std::size_t k = 0; k < model.dim; ++k) gw[k] += d * static_cast<double>(row[k]);
    }
  }
}

}  // namespace detail

/// Mean softmax cross-entropy over the rows of `x` and its gradient.
inline Gradient cross_entropy_gradient(const ClassifierModel& model, const EmbeddingMatrix& x,
                                       std::span<const int> labels, unsigned threads = 1) {
  if (x.rows() != labels.size()) throw DimensionError("gradient: labels not aligned");
  if (x.dim() != model.dim) throw DimensionError("gradient: feature dimension mismatch");
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= model.num_classes) {
      throw ValidationError("gradient: label out of range");
    }
  }
  const std::size_t n = x.rows();
  auto fresh = [&] {
    return Gradient{0.0, std::vector<double>(model.weights.size(), 0.0),
                    std::vector<double>(model.num_classes, 0.0)};
  };
  Gradient g = fresh();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    detail::accumulate_gradient(model, x, labels, 0, n, g);
  } else {
    std::vector<Gradient> parts(threads, fresh());
    {
      std::vector<std::jthread> pool;
      const std::size_t chunk = (n + threads - 1) / threads;
      for (unsigned t = 0; t < threads; ++t) {
        const std::size_t b = t * chunk, e = std::min(n, b + chunk);
        if (b < e) {
          pool.emplace_back([&, t, b, e] { detail::accumulate_gradient(model, x, labels, b, e, parts[t]); });
        }
      }
    }
    for (const auto& part : parts) {
      g.loss += part.loss;
      for (std::size_t k = 0; k < g.weights.size(); ++k) g.weights[k] += part.weights[k];
      for (std::size_t c = 0; c < g.bias.size(); ++c) g.bias[c] += part.bias[c];
    }
  }
  if (n > 0) {
    const double inv = 1.0 / static_cast<double>(n);
    g.loss *= inv;
    for (auto& v : g.weights) v *= inv;
    for (auto& v : g.bias) v *= inv;
  }
  return g;
}

inline double mean_loss(const ClassifierModel& model, const EmbeddingMatrix& x,
                        std::span<const int> labels) {
  return cross_entropy_gradient(model, x, labels).loss;
}

/// Mini-batch gradient descent from zero-initialized parameters.
///
/// Batch order comes from stream (seed, 1), reshuffled each epoch; the
/// mixer draws from stream (seed, 2). `stats` is needed only for IDGP.
/// When `epoch_losses` is given it receives the full-data loss (no
/// augmentation) after every epoch.
inline ClassifierModel train(const EmbeddingMatrix& x, std::span<const int> labels,
                             int num_classes, const TrainConfig& config,
                             const DatasetStats* stats = nullptr,
                             std::vector<double>* epoch_losses = nullptr) {
  config.validate();
  if (x.rows() != labels.size()) throw DimensionError("train: labels not aligned with rows");
  if (num_classes < 2) throw DegenerateDataError("train: need at least 2 classes");
  std::set<int> distinct;
  for (int y : labels) {
    if (y < 0 || y >= num_classes) throw ValidationError("train: label out of range");
    distinct.insert(y);
  }
  if (distinct.size() < 2) {
    throw DegenerateDataError("train: training set has " + std::to_string(distinct.size()) +
                              " distinct label(s)");
  }
  if (config.implicit && config.implicit->method == Method::IDGP && !stats) {
    throw ValidationError("train: IDGP needs dataset statistics");
  }

  ClassifierModel model(static_cast<std::size_t>(num_classes), x.dim());
  RngStream order_rng(config.seed, 1);
  RngStream mix_rng(config.seed, 2);
  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<int> batch_labels;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(order, order_rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::span<const std::size_t> idx(order.data() + start, end - start);
      EmbeddingMatrix batch = x.select(idx);
      batch_labels.clear();
      for (auto i : idx) batch_labels.push_back(labels[i]);
      if (config.implicit) {
        batch = mix(batch, *config.implicit, stats, mix_rng, {.threads = config.threads});
      }
      const auto g = cross_entropy_gradient(model, batch, batch_labels, config.threads);
      for (std::size_t k = 0; k < model.weights.size(); ++k) {
        model.weights[k] -= config.learning_rate * g.weights[k];
      }
      for (std::size_t c = 0; c < model.bias.size(); ++c) {
        model.bias[c] -= config.learning_rate * g.bias[c];
      }
    }
    if (epoch_losses) epoch_losses->push_back(mean_loss(model, x, labels));
  }
  model.validate();

  nlohmann::ordered_json meta;
  meta["seed"] = config.seed;
  meta["epochs"] = config.epochs;
  meta["batch_size"] = config.batch_size;
  meta["learning_rate"] = config.learning_rate;
  if (config.implicit) {
    const auto& p = *config.implicit;
    meta["implicit"] = {{"method", to_string(p.method)}, {"alpha", p.alpha},
                        {"sigma", p.sigma},              {"clip_c", p.clip_c},
                        {"alpha_var", p.alpha_var},      {"keep_ratio", p.keep_ratio},
                        {"noise_level", p.noise_level},  {"fdp_mode", to_string(p.fdp_mode)}};
  } else {
    meta["implicit"] = nullptr;
  }
  model.metadata = std::move(meta);
  return model;
}

inline constexpr std::string_view kModelMagic = "SEDMDL01";

inline std::string encode_model(const ClassifierModel& model) {
  model.validate();
  std::string out(kModelMagic);
  detail::put_u32(out, detail::checked_u32(model.num_classes, "class count"));
  detail::put_u32(out, detail::checked_u32(model.dim, "dimension"));
  for (double v : model.weights) detail::put_f32(out, static_cast<float>(v));
  for (double v : model.bias) detail::put_f32(out, static_cast<float>(v));
  const auto meta = model.metadata.dump();
  detail::put_u32(out, detail::checked_u32(meta.size(), "metadata length"));
  out += meta;
  return out;
}

inline ClassifierModel decode_model(std::string_view bytes) {
  if (bytes.substr(0, kModelMagic.size()) != kModelMagic) {
    throw FormatError("bad magic: expected \"" + std::string(kModelMagic) + "\"");
  }
  detail::ByteReader in(bytes);
  in.take(kModelMagic.size(), "magic");
  const std::size_t classes = in.u32("header");
  const std::size_t dim = in.u32("header");
  ClassifierModel m(classes, dim);
  auto p = in.take(4 * (classes * dim + classes), "parameters");
  for (std::size_t k = 0; k < m.weights.size(); ++k) m.weights[k] = detail::get_f32(p + 4 * k);
  p += 4 * m.weights.size();
  for (std::size_t c = 0; c < classes; ++c) m.bias[c] = detail::get_f32(p + 4 * c);
  const std::uint32_t len = in.u32("metadata length");
  auto meta = in.take(len, "metadata");
  if (in.remaining() != 0) throw FormatError("trailing bytes after model metadata");
  try {
    m.metadata = nlohmann::ordered_json::parse(std::string_view(reinterpret_cast<const char*>(meta), len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model metadata is not JSON: ") + e.what());
  }
  m.validate();
  return m;
}

inline void write_model(const ClassifierModel& model, const std::filesystem::path& path) {
  detail::write_file_bytes(path, encode_model(model));
}

inline ClassifierModel read_model(const std::filesystem::path& path) {
  return decode_model(detail::read_file_bytes(path));
}

}  // namespace eventaug
