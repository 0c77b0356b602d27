// Copyright 2026 The eventaug Authors.
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Message corpora as JSON Lines. One object per line:
//
//   {"id": "m1", "text": "...", "user_id": "u1", "timestamp": 1350000000,
//    "entities": ["Sydney"], "location": "AU", "label": 3,
//    "origin": {"strategy": "paraphrase", "source_id": "m0"}}
//
// `entities` is derived with naive_entities() when the key is absent.
// `location`, `label` and `origin` are optional (absent or null).

#include <array>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "eventaug/core.hpp"
#include "eventaug/embedding_io.hpp"
#include "eventaug/error.hpp"

namespace eventaug {

struct Corpus {
  std::vector<Message> messages;
  int num_classes = 0;
  std::vector<std::string> class_names;

  std::size_t size() const noexcept { return messages.size(); }

  /// Row index of every message id.
  std::unordered_map<std::string, std::size_t> index() const {
    std::unordered_map<std::string, std::size_t> out;
    out.reserve(messages.size());
    for (std::size_t i = 0; i < messages.size(); ++i) out.emplace(messages[i].id, i);
    return out;
  }

  /// Recomputes num_classes and checks the corpus invariants. `line_of`
  /// maps message index to source line for error reports (index+1 if empty).
  void finalize(std::span<const std::size_t> line_of = {}) {
    auto line = [&](std::size_t i) { return line_of.empty() ? i + 1 : line_of[i]; };
    std::vector<LineIssue> issues;
    std::unordered_map<std::string, std::size_t> seen;
    int max_label = -1;
    for (std::size_t i = 0; i < messages.size(); ++i) {
      const auto& m = messages[i];
      if (m.id.empty()) issues.push_back({line(i), "empty id"});
      auto [it, fresh] = seen.emplace(m.id, i);
      if (!fresh) {
        issues.push_back({line(i), "duplicate id '" + m.id + "' (first at line " +
                                       std::to_string(line(it->second)) + ")"});
      }
      if (m.label) {
        if (*m.label < 0) issues.push_back({line(i), "negative label"});
        max_label = std::max(max_label, *m.label);
      }
    }
    for (std::size_t i = 0; i < messages.size(); ++i) {
      const auto& m = messages[i];
      if (!m.origin) continue;
      auto it = seen.find(m.origin->source_id);
      if (it == seen.end() || messages[it->second].origin) {
        issues.push_back({line(i), "augmented message '" + m.id + "' has dangling source_id '" +
                                       m.origin->source_id + "'"});
      }
    }
    if (!issues.empty()) throw CorpusError(std::move(issues));
    num_classes = max_label + 1;
  }
};

namespace detail {

inline bool is_edge_punct(unsigned char c) { return std::ispunct(c) && c != '#' && c != '@'; }

inline std::string_view trim_punct(std::string_view s, bool& trailing_cut) {
  while (!s.empty() && is_edge_punct(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  trailing_cut = false;
  while (!s.empty() && is_edge_punct(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
    trailing_cut = true;
  }
  return s;
}

}  // namespace detail

/// Fallback entity extraction for corpora without annotations.
///
/// Yields hashtags (without '#') and maximal runs of capitalized words, in
/// order of first occurrence, without duplicates. Edge punctuation is
/// trimmed from each token, and trailing punctuation closes a run.
inline std::vector<std::string> naive_entities(std::string_view text) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  auto emit = [&](std::string s) {
    if (!s.empty() && seen.insert(s).second) out.push_back(std::move(s));
  };
  std::string run;
  auto close_run = [&] {
    emit(std::move(run));
    run.clear();
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    std::size_t end = pos;
    while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
    if (end == pos) break;
    std::string_view token = text.substr(pos, end - pos);
    pos = end;

    bool trailing = false;
    if (token.front() == '#') {
      close_run();
      while (!token.empty() && token.front() == '#') token.remove_prefix(1);
      emit(std::string(detail::trim_punct(token, trailing)));
      continue;
    }
    const bool leading = detail::is_edge_punct(static_cast<unsigned char>(token.front()));
    const auto word = detail::trim_punct(token, trailing);
    if (word.empty() || !std::isupper(static_cast<unsigned char>(word.front()))) {
      close_run();
      continue;
    }
    if (leading) close_run();
    if (!run.empty()) run.push_back(' ');
    run.append(word);
    if (trailing) close_run();
  }
  close_run();
  return out;
}

inline Message message_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("line is not a JSON object");
  auto require_string = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) {
      throw ValidationError(std::string("missing or non-string '") + key + "'");
    }
    return it->get<std::string>();
  };
  Message m;
  m.id = require_string("id");
  if (m.id.empty()) throw ValidationError("empty 'id'");
  m.text = require_string("text");
  m.user_id = require_string("user_id");
  auto ts = j.find("timestamp");
  if (ts == j.end() || !ts->is_number_integer()) {
    throw ValidationError("missing or non-integer 'timestamp'");
  }
  m.timestamp = ts->get<std::int64_t>();

  if (auto it = j.find("entities"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw ValidationError("'entities' must be an array");
    for (const auto& e : *it) {
      if (!e.is_string()) throw ValidationError("'entities' must contain strings");
      m.entities.push_back(e.get<std::string>());
    }
  } else {
    m.entities = naive_entities(m.text);
  }
  if (auto it = j.find("location"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw ValidationError("'location' must be a string");
    m.location = it->get<std::string>();
  }
  if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw ValidationError("'label' must be an integer");
    const auto label = it->get<std::int64_t>();
    if (label < 0 || label > std::numeric_limits<int>::max()) {
      throw ValidationError("'label' out of range");
    }
    m.label = static_cast<int>(label);
  }
  if (auto it = j.find("origin"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) throw ValidationError("'origin' must be an object");
    auto s = it->find("strategy");
    auto src = it->find("source_id");
    if (s == it->end() || !s->is_string() || src == it->end() || !src->is_string()) {
      throw ValidationError("'origin' needs string 'strategy' and 'source_id'");
    }
    m.origin = AugmentedFrom{s->get<std::string>(), src->get<std::string>()};
  }
  return m;
}

inline nlohmann::ordered_json message_to_json(const Message& m) {
  nlohmann::ordered_json j;
  j["id"] = m.id;
  j["text"] = m.text;
  j["user_id"] = m.user_id;
  j["timestamp"] = m.timestamp;
  j["entities"] = m.entities;
  if (m.location) j["location"] = *m.location;
  if (m.label) j["label"] = *m.label;
  if (m.origin) {
    j["origin"] = {{"strategy", m.origin->strategy}, {"source_id", m.origin->source_id}};
  }
  return j;
}

/// Parse JSONL text. Collects every problem with its line number.
inline Corpus parse_corpus_text(std::string_view text) {
  Corpus corpus;
  std::vector<LineIssue> issues;
  std::vector<std::size_t> line_of;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(start, nl - start);
    ++line_no;
    start = nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      if (nl == text.size()) break;
      continue;
    }
    try {
      corpus.messages.push_back(message_from_json(nlohmann::json::parse(line)));
      line_of.push_back(line_no);
    } catch (const nlohmann::json::exception& e) {
      issues.push_back({line_no, std::string("malformed JSON: ") + e.what()});
    } catch (const ValidationError& e) {
      issues.push_back({line_no, e.what()});
    }
    if (nl == text.size()) break;
  }
  try {
    corpus.finalize(line_of);
  } catch (const CorpusError& e) {
    issues.insert(issues.end(), e.issues().begin(), e.issues().end());
  }
  if (!issues.empty()) {
    std::stable_sort(issues.begin(), issues.end(),
                     [](const LineIssue& a, const LineIssue& b) { return a.line < b.line; });
    throw CorpusError(std::move(issues));
  }
  return corpus;
}

inline Corpus parse_corpus(const std::filesystem::path& path) {
  return parse_corpus_text(detail::read_file_bytes(path));
}

inline std::string corpus_to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& m : corpus.messages) {
    out += message_to_json(m).dump();
    out += '\n';
  }
  return out;
}

inline void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  detail::write_file_bytes(path, corpus_to_jsonl(corpus));
}

/// Corpus plus one embedding row per message, in corpus order.
struct AlignedDataset {
  Corpus corpus;
  EmbeddingMatrix embeddings;
};

/// Reorders `emb` rows to corpus order. Extra rows in `emb` are dropped.
inline AlignedDataset attach_embeddings(Corpus corpus, const EmbeddingMatrix& emb) {
  if (emb.dim() == 0) throw DimensionError("embedding dimension is 0");
  std::unordered_map<std::string_view, std::size_t> row_of;
  row_of.reserve(emb.rows());
  for (std::size_t r = 0; r < emb.rows(); ++r) row_of.emplace(emb.ids()[r], r);

  std::vector<std::size_t> order;
  order.reserve(corpus.size());
  std::vector<std::string> missing;
  std::size_t missing_count = 0;
  for (const auto& m : corpus.messages) {
    auto it = row_of.find(m.id);
    if (it == row_of.end()) {
      if (missing.size() < 10) missing.push_back(m.id);
      ++missing_count;
    } else {
      order.push_back(it->second);
    }
  }
  if (missing_count > 0) {
    std::string msg = std::to_string(missing_count) + " message id(s) missing from embeddings:";
    for (const auto& id : missing) msg += " " + id;
    if (missing_count > missing.size()) msg += " ...";
    throw ValidationError(msg);
  }
  return {std::move(corpus), emb.select(order)};
}

/// Two temporal features per message: whole days since the earliest
/// message and seconds into the UTC day, each min-max scaled to [0,1]
/// over the corpus. A constant column scales to 0.
inline std::vector<std::array<double, 2>> temporal_features(const Corpus& corpus) {
  const std::size_t n = corpus.size();
  std::vector<std::array<double, 2>> raw(n);
  if (n == 0) return raw;
  std::int64_t t0 = corpus.messages[0].timestamp;
  for (const auto& m : corpus.messages) t0 = std::min(t0, m.timestamp);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ts = corpus.messages[i].timestamp;
    const auto day = (ts - t0) / 86400;
    auto sec = ts % 86400;
    if (sec < 0) sec += 86400;
    raw[i] = {static_cast<double>(day), static_cast<double>(sec)};
  }
  for (int c = 0; c < 2; ++c) {
    double lo = raw[0][c], hi = raw[0][c];
    for (const auto& r : raw) {
      lo = std::min(lo, r[c]);
      hi = std::max(hi, r[c]);
    }
    for (auto& r : raw) r[c] = hi > lo ? (r[c] - lo) / (hi - lo) : 0.0;
  }
  return raw;
}

/// Hash-derived pair in [0,1) for a location string; zeros when absent.
inline std::array<double, 2> location_features(const std::optional<std::string>& location) {
  if (!location || location->empty()) return {0.0, 0.0};
  const auto h = fnv1a64(*location);
  return {static_cast<double>(h >> 32) * 0x1.0p-32,
          static_cast<double>(h & 0xFFFFFFFFULL) * 0x1.0p-32};
}

}  // namespace eventaug
