// Copyright 2026 The eventaug Authors.
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "eventaug/classifier.hpp"
#include "eventaug/dataset.hpp"
#include "eventaug/metrics.hpp"
#include "eventaug/perturb.hpp"

namespace eventaug {

struct RatioStudyConfig {
  std::vector<double> ratios = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  SplitSpec split;
  TrainConfig train;                  // its `implicit` field is ignored
  PerturbationConfig implicit;        // used by the "aug" arm
  std::uint64_t subsample_seed = 7;
};

struct RatioRow {
  double ratio = 0.0;
  std::string arm;  // "noaug" or "aug"
  EvalReport report;
  std::size_t train_rows = 0;
  std::vector<int> excluded_classes;
};

struct RatioStudyResult {
  std::vector<RatioRow> rows;
  std::vector<std::string> warnings;

  std::string to_csv() const {
    std::string out = "ratio,arm,micro_f1,macro_f1\n";
    char buf[128];
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof buf, "%g,%s,%.6f,%.6f\n", r.ratio, r.arm.c_str(), r.report.micro_f1,
                    r.report.macro_f1);
      out += buf;
    }
    return out;
  }
};

/// Original training rows kept at `ratio`: floor(ratio * originals) of
/// them, capped at the training split, drawn with a seeded shuffle and
/// returned in training-split order. Ratios are fractions of all original
/// labeled messages, so with a 70/10/20 split the 0.7 row uses the whole
/// training split.
inline std::vector<std::size_t> subsample_training(const std::vector<std::size_t>& train_originals,
                                                   std::size_t total_originals, double ratio,
                                                   std::uint64_t seed) {
  const auto want = static_cast<std::size_t>(
      std::floor(ratio * static_cast<double>(total_originals) + 1e-9));
  const std::size_t count = std::min(want, train_originals.size());
  std::vector<std::size_t> pos(train_originals.size());
  std::iota(pos.begin(), pos.end(), std::size_t{0});
  RngStream rng(seed, static_cast<std::uint64_t>(std::llround(ratio * 1e6)));
  shuffle(pos, rng);
  pos.resize(count);
  std::sort(pos.begin(), pos.end());
  std::vector<std::size_t> out;
  out.reserve(count);
  for (auto p : pos) out.push_back(train_originals[p]);
  return out;
}

/// Trains with and without augmentation at each training ratio and
/// evaluates both on the fixed test split. The "aug" arm adds the explicit
/// variants of the sampled sources and enables the implicit mixer; the
/// "noaug" arm uses sampled originals only.
inline RatioStudyResult ratio_study(const LabeledDataset& ds, const RatioStudyConfig& config) {
  for (double r : config.ratios) {
    if (!(r > 0.0 && r <= 1.0)) throw ValidationError("ratio_study: ratios must be in (0,1]");
  }
  const auto split = partition(ds, config.split, /*include_augmented=*/false);
  std::size_t originals = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) originals += ds.is_original(i) ? 1 : 0;

  std::vector<std::vector<std::size_t>> variants(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!ds.is_original(i)) variants[static_cast<std::size_t>(ds.source[i])].push_back(i);
  }

  const auto test_x = ds.features.select(split.test);
  const auto test_y = ds.labels_of(split.test);
  std::set<int> test_classes(test_y.begin(), test_y.end());

  RatioStudyResult result;
  for (double ratio : config.ratios) {
    const auto base = subsample_training(split.train, originals, ratio, config.subsample_seed);
    std::set<int> seen;
    for (auto r : base) seen.insert(ds.labels[r]);
    std::vector<int> excluded;
    for (int c : test_classes) {
      if (!seen.count(c)) excluded.push_back(c);
    }
    if (!excluded.empty()) {
      std::string w = "ratio " + std::to_string(ratio) + ": class(es)";
      for (int c : excluded) w += " " + std::to_string(c);
      w += " absent from training subset; excluded from macro F1";
      result.warnings.push_back(std::move(w));
    }

    for (const bool augmented : {false, true}) {
      std::vector<std::size_t> rows = base;
      if (augmented) {
        for (auto r : base) rows.insert(rows.end(), variants[r].begin(), variants[r].end());
      }
      const auto x = ds.features.select(rows);
      const auto y = ds.labels_of(rows);
      TrainConfig tc = config.train;
      tc.implicit.reset();
      std::optional<DatasetStats> stats;
      if (augmented) {
        tc.implicit = config.implicit;
        stats = dataset_std(x);
      }
      const auto model = train(x, y, ds.num_classes, tc, stats ? &*stats : nullptr);
      const auto pred = predict(model, test_x);
      result.rows.push_back({ratio, augmented ? "aug" : "noaug",
                             evaluate(pred.labels, test_y, ds.num_classes, excluded), rows.size(),
                             excluded});
    }
  }
  return result;
}

}  // namespace eventaug
