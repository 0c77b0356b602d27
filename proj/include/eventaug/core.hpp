// Copyright 2026 The eventaug Authors.
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "eventaug/error.hpp"
#include "eventaug/rng.hpp"

namespace eventaug {

/// Provenance of an augmented message.
struct AugmentedFrom {
  std::string strategy;
  std::string source_id;

  friend bool operator==(const AugmentedFrom&, const AugmentedFrom&) = default;
};

/// One social media post. `origin` is empty for original messages.
struct Message {
  std::string id;
  std::string text;
  std::string user_id;
  std::int64_t timestamp = 0;  // seconds since epoch
  std::vector<std::string> entities;
  std::optional<std::string> location;
  std::optional<int> label;
  std::optional<AugmentedFrom> origin;

  bool is_augmented() const noexcept { return origin.has_value(); }

  friend bool operator==(const Message&, const Message&) = default;
};

/// Dense row-major matrix of 32-bit embeddings with one id per row.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;

  EmbeddingMatrix(std::size_t rows, std::size_t dim)
      : rows_(rows), dim_(dim), data_(rows * dim, 0.0f), ids_(rows) {
    for (std::size_t i = 0; i < rows; ++i) ids_[i] = std::to_string(i);
  }

  EmbeddingMatrix(std::size_t dim, std::vector<std::string> ids, std::vector<float> data)
      : rows_(ids.size()), dim_(dim), data_(std::move(data)), ids_(std::move(ids)) {
    if (data_.size() != rows_ * dim_) {
      throw DimensionError("embedding data length " + std::to_string(data_.size()) +
                           " != rows*dim " + std::to_string(rows_ * dim_));
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return rows_ == 0; }

  std::span<float> row(std::size_t i) noexcept { return {data_.data() + i * dim_, dim_}; }
  std::span<const float> row(std::size_t i) const noexcept {
    return {data_.data() + i * dim_, dim_};
  }
  float& at(std::size_t r, std::size_t c) noexcept { return data_[r * dim_ + c]; }
  float at(std::size_t r, std::size_t c) const noexcept { return data_[r * dim_ + c]; }

  std::span<const float> data() const noexcept { return data_; }
  std::span<float> data() noexcept { return data_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::vector<std::string>& ids() noexcept { return ids_; }

  /// Throws NonFiniteError / ValidationError when an invariant is broken.
  void validate() const {
    if (data_.size() != rows_ * dim_ || ids_.size() != rows_) {
      throw DimensionError("embedding matrix shape is inconsistent");
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
      if (!std::isfinite(data_[i])) {
        throw NonFiniteError("non-finite embedding value at row " + std::to_string(i / dim_) +
                             ", column " + std::to_string(i % dim_));
      }
    }
    std::unordered_set<std::string_view> seen;
    for (const auto& id : ids_) {
      if (!seen.insert(id).second) throw ValidationError("duplicate embedding id '" + id + "'");
    }
  }

  /// New matrix holding the given rows in the given order.
  EmbeddingMatrix select(std::span<const std::size_t> rows) const {
    EmbeddingMatrix out;
    out.rows_ = rows.size();
    out.dim_ = dim_;
    out.data_.reserve(rows.size() * dim_);
    out.ids_.reserve(rows.size());
    for (std::size_t r : rows) {
      auto src = row(r);
      out.data_.insert(out.data_.end(), src.begin(), src.end());
      out.ids_.push_back(ids_[r]);
    }
    return out;
  }

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> data_;
  std::vector<std::string> ids_;
};

/// Train/validation/test fractions and shuffle seed.
struct SplitSpec {
  double train_ratio = 0.7;
  double val_ratio = 0.1;
  double test_ratio = 0.2;
  std::uint64_t seed = 42;

  void validate() const {
    for (double r : {train_ratio, val_ratio, test_ratio}) {
      if (!(r > 0.0 && r < 1.0)) throw ValidationError("split ratios must lie in (0,1)");
    }
    if (std::abs(train_ratio + val_ratio + test_ratio - 1.0) > 1e-9) {
      throw ValidationError("split ratios must sum to 1");
    }
  }
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

template <typename T>
struct SplitLists {
  std::vector<T> train;
  std::vector<T> val;
  std::vector<T> test;
};

/// Partition sizes for n items: floor(n * ratio) for val and test, the rest
/// goes to train. A 1e-9 slack absorbs binary rounding of the ratios.
inline std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitSpec& spec) {
  spec.validate();
  auto part = [n](double ratio) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratio + 1e-9));
  };
  const std::size_t val = part(spec.val_ratio);
  const std::size_t test = part(spec.test_ratio);
  return {n - val - test, val, test};
}

/// In-place Fisher-Yates shuffle driven by an RngStream.
template <typename T>
void shuffle(std::vector<T>& items, RngStream& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_index(i));
    std::swap(items[i - 1], items[j]);
  }
}

/// Shuffle 0..n-1 with the split seed, then cut contiguous train/val/test
/// blocks. Indices inside each block keep the shuffled order.
inline SplitIndices split_indices(std::size_t n, const SplitSpec& spec) {
  const auto sizes = split_sizes(n, spec);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  RngStream rng(spec.seed, 0x5b117);
  shuffle(order, rng);
  SplitIndices out;
  auto it = order.begin();
  out.train.assign(it, it + static_cast<std::ptrdiff_t>(sizes[0]));
  it += static_cast<std::ptrdiff_t>(sizes[0]);
  out.val.assign(it, it + static_cast<std::ptrdiff_t>(sizes[1]));
  it += static_cast<std::ptrdiff_t>(sizes[1]);
  out.test.assign(it, order.end());
  return out;
}

/// Split aligned ids/labels into train/val/test id lists.
inline SplitLists<std::string> split(std::span<const std::string> ids, std::span<const int> labels,
                                     const SplitSpec& spec) {
  if (ids.size() != labels.size()) {
    throw ValidationError("split: ids and labels are not aligned (" + std::to_string(ids.size()) +
                          " vs " + std::to_string(labels.size()) + ")");
  }
  const auto idx = split_indices(ids.size(), spec);
  SplitLists<std::string> out;
  for (auto i : idx.train) out.train.push_back(ids[i]);
  for (auto i : idx.val) out.val.push_back(ids[i]);
  for (auto i : idx.test) out.test.push_back(ids[i]);
  return out;
}

}  // namespace eventaug
