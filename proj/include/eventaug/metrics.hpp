// Copyright 2026 The eventaug Authors.
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eventaug/error.hpp"

namespace eventaug {

struct ClassScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;    // gold count
  std::int64_t predicted = 0;  // predicted count
  bool in_macro = false;
};

struct EvalReport {
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  std::int64_t total = 0;
  std::int64_t correct = 0;
  std::vector<ClassScore> per_class;
  std::vector<std::vector<std::int64_t>> confusion;  // [gold][predicted]

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["micro_f1"] = micro_f1;
    j["macro_f1"] = macro_f1;
    j["total"] = total;
    j["correct"] = correct;
    auto classes = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < per_class.size(); ++c) {
      const auto& s = per_class[c];
      classes.push_back({{"class", c},
                         {"precision", s.precision},
                         {"recall", s.recall},
                         {"f1", s.f1},
                         {"support", s.support},
                         {"predicted", s.predicted},
                         {"in_macro", s.in_macro}});
    }
    j["per_class"] = std::move(classes);
    j["confusion"] = confusion;
    return j;
  }
};

/// Micro and macro F1 for single-label multiclass predictions.
///
/// Micro F1 is accuracy. Macro F1 averages per-class F1 over the classes
/// that occur in gold or predictions, minus any in `excluded`. A 0/0 in
/// precision, recall or F1 counts as 0.
inline EvalReport evaluate(std::span<const int> preds, std::span<const int> golds, int num_classes,
                           std::span<const int> excluded = {}) {
  if (preds.size() != golds.size()) {
    throw ValidationError("evaluate: " + std::to_string(preds.size()) + " predictions vs " +
                          std::to_string(golds.size()) + " gold labels");
  }
  if (preds.empty()) throw ValidationError("evaluate: no instances");
  if (num_classes < 1) throw ValidationError("evaluate: num_classes must be >= 1");
  const auto c_count = static_cast<std::size_t>(num_classes);

  EvalReport r;
  r.confusion.assign(c_count, std::vector<std::int64_t>(c_count, 0));
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] < 0 || preds[i] >= num_classes || golds[i] < 0 || golds[i] >= num_classes) {
      throw ValidationError("evaluate: label out of range at instance " + std::to_string(i));
    }
    ++r.confusion[static_cast<std::size_t>(golds[i])][static_cast<std::size_t>(preds[i])];
  }
  r.total = static_cast<std::int64_t>(preds.size());
  r.per_class.resize(c_count);
  double macro_sum = 0.0;
  int macro_n = 0;
  for (std::size_t c = 0; c < c_count; ++c) {
    auto& s = r.per_class[c];
    const std::int64_t tp = r.confusion[c][c];
    for (std::size_t k = 0; k < c_count; ++k) {
      s.support += r.confusion[c][k];
      s.predicted += r.confusion[k][c];
    }
    r.correct += tp;
    s.precision = s.predicted > 0 ? static_cast<double>(tp) / static_cast<double>(s.predicted) : 0.0;
    s.recall = s.support > 0 ? static_cast<double>(tp) / static_cast<double>(s.support) : 0.0;
    const double denom = s.precision + s.recall;
    s.f1 = denom > 0.0 ? 2.0 * s.precision * s.recall / denom : 0.0;
    bool skip = false;
    for (int e : excluded) skip = skip || e == static_cast<int>(c);
    s.in_macro = !skip && (s.support > 0 || s.predicted > 0);
    if (s.in_macro) {
      macro_sum += s.f1;
      ++macro_n;
    }
  }
  r.micro_f1 = static_cast<double>(r.correct) / static_cast<double>(r.total);
  r.macro_f1 = macro_n > 0 ? macro_sum / macro_n : 0.0;
  return r;
}

}  // namespace eventaug
