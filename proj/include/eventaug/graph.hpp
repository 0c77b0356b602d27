// Copyright 2026 The eventaug Authors.
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "eventaug/core.hpp"
#include "eventaug/corpus.hpp"
#include "eventaug/error.hpp"

namespace eventaug {

/// Message/user/entity graph. Edges are message-user (authored-by) and
/// message-entity (mentions); nothing else.
///
/// Entity nodes are keyed case-insensitively (ASCII folding); the display
/// name is the first spelling encountered in corpus order.
class HeteroGraph {
 public:
  std::size_t num_messages() const noexcept { return message_ids_.size(); }
  std::size_t num_users() const noexcept { return user_ids_.size(); }
  std::size_t num_entities() const noexcept { return entity_names_.size(); }
  std::size_t num_user_edges() const noexcept { return message_user_.size(); }
  std::size_t num_entity_edges() const noexcept {
    std::size_t n = 0;
    for (const auto& e : message_entities_) n += e.size();
    return n;
  }

  const std::vector<std::string>& message_ids() const noexcept { return message_ids_; }
  const std::vector<std::string>& user_ids() const noexcept { return user_ids_; }
  const std::vector<std::string>& entity_names() const noexcept { return entity_names_; }

  std::size_t user_of(std::size_t message) const { return message_user_.at(message); }
  const std::vector<std::size_t>& entities_of(std::size_t message) const {
    return message_entities_.at(message);
  }
  const std::vector<std::size_t>& messages_of_user(std::size_t user) const {
    return user_messages_.at(user);
  }
  const std::vector<std::size_t>& messages_of_entity(std::size_t entity) const {
    return entity_messages_.at(entity);
  }

  std::size_t message_index(const std::string& id) const {
    auto it = message_row_.find(id);
    if (it == message_row_.end()) throw ValidationError("unknown message id '" + id + "'");
    return it->second;
  }

  /// Other messages by the same user, and other messages sharing at least
  /// one entity. Both lists hold row indices sorted by message id.
  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> neighbor_rows(
      std::size_t message) const {
    std::vector<std::size_t> by_user;
    for (auto j : user_messages_.at(message_user_.at(message))) {
      if (j != message) by_user.push_back(j);
    }
    std::vector<std::size_t> by_entity;
    for (auto e : message_entities_.at(message)) {
      for (auto j : entity_messages_[e]) {
        if (j != message) by_entity.push_back(j);
      }
    }
    auto by_id = [this](std::size_t a, std::size_t b) { return message_ids_[a] < message_ids_[b]; };
    std::sort(by_user.begin(), by_user.end(), by_id);
    std::sort(by_entity.begin(), by_entity.end(), by_id);
    by_entity.erase(std::unique(by_entity.begin(), by_entity.end()), by_entity.end());
    return {std::move(by_user), std::move(by_entity)};
  }

  nlohmann::ordered_json stats_json() const {
    nlohmann::ordered_json j;
    j["nodes"] = {{"message", num_messages()}, {"user", num_users()}, {"entity", num_entities()}};
    j["edges"] = {{"authored_by", num_user_edges()}, {"mentions", num_entity_edges()}};
    return j;
  }

  /// Full node and typed edge lists, for inspection.
  nlohmann::ordered_json dump_json() const {
    nlohmann::ordered_json j;
    j["nodes"] = {{"message", message_ids_}, {"user", user_ids_}, {"entity", entity_names_}};
    auto authored = nlohmann::ordered_json::array();
    auto mentions = nlohmann::ordered_json::array();
    for (std::size_t m = 0; m < num_messages(); ++m) {
      authored.push_back({message_ids_[m], user_ids_[message_user_[m]]});
      for (auto e : message_entities_[m]) mentions.push_back({message_ids_[m], entity_names_[e]});
    }
    j["edges"] = {{"authored_by", std::move(authored)}, {"mentions", std::move(mentions)}};
    return j;
  }

  friend HeteroGraph build_graph(const Corpus& corpus);

 private:
  std::vector<std::string> message_ids_;
  std::unordered_map<std::string, std::size_t> message_row_;
  std::vector<std::string> user_ids_;
  std::vector<std::string> entity_names_;
  std::vector<std::size_t> message_user_;
  std::vector<std::vector<std::size_t>> message_entities_;
  std::vector<std::vector<std::size_t>> user_messages_;
  std::vector<std::vector<std::size_t>> entity_messages_;
};

inline std::string fold_case(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

/// Augmented messages carry copied metadata, so they attach to the same
/// user and entity nodes as their source.
inline HeteroGraph build_graph(const Corpus& corpus) {
  HeteroGraph g;
  std::unordered_map<std::string, std::size_t> user_node;
  std::unordered_map<std::string, std::size_t> entity_node;
  const std::size_t n = corpus.size();
  g.message_ids_.reserve(n);
  g.message_user_.reserve(n);
  g.message_entities_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& m = corpus.messages[i];
    if (!g.message_row_.emplace(m.id, i).second) {
      throw ValidationError("duplicate message id '" + m.id + "'");
    }
    g.message_ids_.push_back(m.id);

    auto [uit, new_user] = user_node.emplace(m.user_id, g.user_ids_.size());
    if (new_user) {
      g.user_ids_.push_back(m.user_id);
      g.user_messages_.emplace_back();
    }
    g.message_user_.push_back(uit->second);
    g.user_messages_[uit->second].push_back(i);

    auto& mine = g.message_entities_[i];
    for (const auto& name : m.entities) {
      if (name.empty()) continue;
      auto [eit, new_entity] = entity_node.emplace(fold_case(name), g.entity_names_.size());
      if (new_entity) {
        g.entity_names_.push_back(name);
        g.entity_messages_.emplace_back();
      }
      if (std::find(mine.begin(), mine.end(), eit->second) == mine.end()) {
        mine.push_back(eit->second);
        g.entity_messages_[eit->second].push_back(i);
      }
    }
    std::sort(mine.begin(), mine.end());
  }
  return g;
}

/// Neighbor ids of one message: (same user, shared entity). Sorted, without
/// the message itself.
inline std::pair<std::vector<std::string>, std::vector<std::string>> neighborhood(
    const HeteroGraph& graph, const std::string& message_id) {
  auto [by_user, by_entity] = graph.neighbor_rows(graph.message_index(message_id));
  std::pair<std::vector<std::string>, std::vector<std::string>> out;
  for (auto j : by_user) out.first.push_back(graph.message_ids()[j]);
  for (auto j : by_entity) out.second.push_back(graph.message_ids()[j]);
  return out;
}

struct FusionParams {
  double self_weight = 1.0;
  double user_weight = 0.5;
  double entity_weight = 0.5;
  int layers = 1;

  void validate() const {
    for (double w : {self_weight, user_weight, entity_weight}) {
      if (!std::isfinite(w)) throw ValidationError("fusion weights must be finite");
    }
    if (layers < 1) throw ValidationError("fusion layers must be >= 1");
  }
};

namespace detail {

inline void check_aligned(const Corpus& corpus, const EmbeddingMatrix& emb) {
  if (emb.rows() != corpus.size()) {
    throw DimensionError("embedding rows (" + std::to_string(emb.rows()) +
                         ") != corpus size (" + std::to_string(corpus.size()) + ")");
  }
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (emb.ids()[i] != corpus.messages[i].id) {
      throw ValidationError("embedding row " + std::to_string(i) + " is '" + emb.ids()[i] +
                            "', expected '" + corpus.messages[i].id + "'");
    }
  }
}

inline void accumulate_mean(std::vector<double>& acc, double weight,
                            const std::vector<std::vector<double>>& rows,
                            const std::vector<std::size_t>& members) {
  if (members.empty() || weight == 0.0) return;
  std::vector<double> sum(acc.size(), 0.0);
  for (auto j : members) {
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += rows[j][k];
  }
  const double scale = weight / static_cast<double>(members.size());
  for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += scale * sum[k];
}

}  // namespace detail

/// Structure-fused message embeddings.
///
/// Each row starts as the message embedding with the two temporal features
/// appended (dim + 2). Every layer replaces row i with
///
///   normalize(w_s * x_i + w_u * mean{x_j : same user} + w_e * mean{x_j : shared entity})
///
/// where neighborhoods exclude i, an empty neighborhood contributes zero,
/// and a zero vector is left unnormalized. Neighbors are summed in message
/// id order, so the result does not depend on corpus order.
inline EmbeddingMatrix fuse(const HeteroGraph& graph, const EmbeddingMatrix& message_emb,
                            const Corpus& corpus, const FusionParams& params = {}) {
  params.validate();
  detail::check_aligned(corpus, message_emb);
  if (graph.num_messages() != corpus.size()) {
    throw DimensionError("graph does not match corpus");
  }
  const std::size_t n = corpus.size();
  const std::size_t dim = message_emb.dim() + 2;
  const auto temporal = temporal_features(corpus);

  std::vector<std::vector<double>> x(n, std::vector<double>(dim));
  for (std::size_t i = 0; i < n; ++i) {
    auto src = message_emb.row(i);
    std::copy(src.begin(), src.end(), x[i].begin());
    x[i][dim - 2] = temporal[i][0];
    x[i][dim - 1] = temporal[i][1];
  }

  std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> nbrs(n);
  for (std::size_t i = 0; i < n; ++i) nbrs[i] = graph.neighbor_rows(i);

  for (int layer = 0; layer < params.layers; ++layer) {
    std::vector<std::vector<double>> next(n, std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      auto& v = next[i];
      for (std::size_t k = 0; k < dim; ++k) v[k] = params.self_weight * x[i][k];
      detail::accumulate_mean(v, params.user_weight, x, nbrs[i].first);
      detail::accumulate_mean(v, params.entity_weight, x, nbrs[i].second);
      double norm = 0.0;
      for (double a : v) norm += a * a;
      norm = std::sqrt(norm);
      if (norm > 0.0) {
        for (auto& a : v) a /= norm;
      }
    }
    x = std::move(next);
  }

  std::vector<float> data;
  data.reserve(n * dim);
  for (const auto& row : x) {
    for (double a : row) data.push_back(static_cast<float>(a));
  }
  return EmbeddingMatrix(dim, message_emb.ids(), std::move(data));
}

/// User node vectors: mean embedding of the user's messages followed by the
/// location pair of the user's earliest message (ties by id).
inline EmbeddingMatrix user_node_features(const HeteroGraph& graph, const EmbeddingMatrix& emb,
                                          const Corpus& corpus) {
  detail::check_aligned(corpus, emb);
  const std::size_t dim = emb.dim() + 2;
  std::vector<float> data;
  data.reserve(graph.num_users() * dim);
  for (std::size_t u = 0; u < graph.num_users(); ++u) {
    const auto& members = graph.messages_of_user(u);
    std::vector<double> mean(emb.dim(), 0.0);
    for (auto j : members) {
      auto r = emb.row(j);
      for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += r[k];
    }
    for (auto& a : mean) a /= static_cast<double>(members.size());
    auto earliest = *std::min_element(members.begin(), members.end(), [&](auto a, auto b) {
      const auto& ma = corpus.messages[a];
      const auto& mb = corpus.messages[b];
      return std::tie(ma.timestamp, ma.id) < std::tie(mb.timestamp, mb.id);
    });
    const auto loc = location_features(corpus.messages[earliest].location);
    for (double a : mean) data.push_back(static_cast<float>(a));
    data.push_back(static_cast<float>(loc[0]));
    data.push_back(static_cast<float>(loc[1]));
  }
  return EmbeddingMatrix(dim, graph.user_ids(), std::move(data));
}

/// Entity node vectors: mean embedding of the messages mentioning the entity.
inline EmbeddingMatrix entity_node_features(const HeteroGraph& graph, const EmbeddingMatrix& emb,
                                            const Corpus& corpus) {
  detail::check_aligned(corpus, emb);
  std::vector<float> data;
  data.reserve(graph.num_entities() * emb.dim());
  for (std::size_t e = 0; e < graph.num_entities(); ++e) {
    const auto& members = graph.messages_of_entity(e);
    std::vector<double> mean(emb.dim(), 0.0);
    for (auto j : members) {
      auto r = emb.row(j);
      for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += r[k];
    }
    for (double a : mean) data.push_back(static_cast<float>(a / static_cast<double>(members.size())));
  }
  return EmbeddingMatrix(emb.dim(), graph.entity_names(), std::move(data));
}

}  // namespace eventaug
