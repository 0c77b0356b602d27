// Copyright 2026 The eventaug Authors.
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cctype>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "eventaug/core.hpp"
#include "eventaug/corpus.hpp"

namespace eventaug {

/// Hook for producing message embeddings in-process. Production runs embed
/// text with an external pretrained model and ingest the SEDEMB01 file; an
/// implementation of this interface lets the pipeline run without one.
class TextEncoder {
 public:
  virtual ~TextEncoder() = default;
  virtual std::size_t dim() const = 0;
  virtual std::vector<float> encode(std::string_view text) const = 0;

  EmbeddingMatrix encode_corpus(const Corpus& corpus) const {
    const std::size_t d = dim();
    std::vector<float> data;
    data.reserve(corpus.size() * d);
    std::vector<std::string> ids;
    ids.reserve(corpus.size());
    for (const auto& m : corpus.messages) {
      auto v = encode(m.text);
      if (v.size() != d) throw DimensionError("encoder returned wrong dimension");
      data.insert(data.end(), v.begin(), v.end());
      ids.push_back(m.id);
    }
    return EmbeddingMatrix(d, std::move(ids), std::move(data));
  }
};

/// Signed feature hashing of lowercase word unigrams, L2-normalized.
class HashingEncoder final : public TextEncoder {
 public:
  explicit HashingEncoder(std::size_t dim, std::uint64_t seed = 0) : dim_(dim), seed_(seed) {
    if (dim == 0) throw DimensionError("encoder dimension is 0");
  }

  std::size_t dim() const override { return dim_; }

  std::vector<float> encode(std::string_view text) const override {
    std::vector<double> acc(dim_, 0.0);
    std::string token;
    auto flush = [&] {
      if (token.empty()) return;
      const auto h = mix64(fnv1a64(token) ^ seed_);
      acc[h % dim_] += (h >> 63) ? -1.0 : 1.0;
      token.clear();
    };
    for (char c : text) {
      const auto u = static_cast<unsigned char>(c);
      if (std::isalnum(u) || u >= 0x80) {
        token.push_back(static_cast<char>(std::tolower(u)));
      } else {
        flush();
      }
    }
    flush();
    double norm = 0.0;
    for (double v : acc) norm += v * v;
    norm = std::sqrt(norm);
    std::vector<float> out(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
      out[i] = norm > 0.0 ? static_cast<float>(acc[i] / norm) : 0.0f;
    }
    return out;
  }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

}  // namespace eventaug
