// Copyright 2026 The eventaug Authors.
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <unordered_map>
#include <vector>

#include "eventaug/core.hpp"
#include "eventaug/corpus.hpp"
#include "eventaug/error.hpp"

namespace eventaug {

/// Labeled fused embeddings. Augmented rows remember the row of their
/// source so they can follow it into the training split.
struct LabeledDataset {
  EmbeddingMatrix features;
  std::vector<int> labels;
  std::vector<std::ptrdiff_t> source;  // -1 for originals
  int num_classes = 0;

  std::size_t size() const noexcept { return labels.size(); }
  bool is_original(std::size_t i) const { return source[i] < 0; }

  std::vector<int> labels_of(std::span<const std::size_t> rows) const {
    std::vector<int> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(labels[r]);
    return out;
  }
};

/// Keeps the labeled messages of `corpus` (rows aligned with `fused`).
inline LabeledDataset make_labeled_dataset(const Corpus& corpus, const EmbeddingMatrix& fused) {
  if (fused.rows() != corpus.size()) {
    throw DimensionError("fused rows (" + std::to_string(fused.rows()) + ") != corpus size (" +
                         std::to_string(corpus.size()) + ")");
  }
  std::vector<std::size_t> keep;
  std::unordered_map<std::string, std::size_t> row_of_id;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& m = corpus.messages[i];
    if (fused.ids()[i] != m.id) {
      throw ValidationError("fused row " + std::to_string(i) + " is '" + fused.ids()[i] +
                            "', expected '" + m.id + "'");
    }
    if (!m.label) continue;
    row_of_id.emplace(m.id, keep.size());
    keep.push_back(i);
  }
  LabeledDataset ds;
  ds.features = fused.select(keep);
  ds.num_classes = corpus.num_classes;
  for (auto i : keep) {
    const auto& m = corpus.messages[i];
    ds.labels.push_back(*m.label);
    if (m.origin) {
      auto it = row_of_id.find(m.origin->source_id);
      if (it == row_of_id.end()) {
        throw ValidationError("augmented message '" + m.id + "' has an unlabeled source");
      }
      ds.source.push_back(static_cast<std::ptrdiff_t>(it->second));
    } else {
      ds.source.push_back(-1);
    }
  }
  return ds;
}

/// Splits the original rows with split_indices(); augmented rows join
/// train when their source is in train and are dropped otherwise, so no
/// variant of a held-out message is ever trained on or evaluated.
inline SplitIndices partition(const LabeledDataset& ds, const SplitSpec& spec,
                              bool include_augmented = true) {
  std::vector<std::size_t> originals;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.is_original(i)) originals.push_back(i);
  }
  const auto idx = split_indices(originals.size(), spec);
  SplitIndices out;
  std::vector<char> in_train(ds.size(), 0);
  for (auto k : idx.train) {
    out.train.push_back(originals[k]);
    in_train[originals[k]] = 1;
  }
  for (auto k : idx.val) out.val.push_back(originals[k]);
  for (auto k : idx.test) out.test.push_back(originals[k]);
  if (include_augmented) {
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (!ds.is_original(i) && in_train[static_cast<std::size_t>(ds.source[i])]) {
        out.train.push_back(i);
      }
    }
  }
  return out;
}

}  // namespace eventaug
