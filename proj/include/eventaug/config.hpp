// Copyright 2026 The eventaug Authors.
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Layered run configuration: profile defaults, then a config file, then
// command-line flags. Config files are INI:
//
//   [run]      profile, seed, out
//   [data]     corpus, embeddings, model, encoder, encoder_dim
//   [split]    train, val, test
//   [fusion]   self_weight, user_weight, entity_weight, layers
//   [augment]  strategies, copies, train_only, cache_dir, mock, endpoint,
//              model, max_tokens, temperature, auth_env, max_retries,
//              max_in_flight
//   [implicit] method, alpha, sigma, clip_c, alpha_var, keep_ratio,
//              noise_level, fdp_mode
//   [train]    epochs, batch_size, learning_rate, implicit, threads
//   [study]    ratios, subsample_seed
//   [diagnose] bins
//
// Lists are comma separated. A JSON object with the same sections (such as
// a resolved-config.json snapshot) is accepted wherever an INI file is.

#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "eventaug/classifier.hpp"
#include "eventaug/core.hpp"
#include "eventaug/embedding_io.hpp"
#include "eventaug/error.hpp"
#include "eventaug/explicit_aug.hpp"
#include "eventaug/graph.hpp"
#include "eventaug/perturb.hpp"

namespace eventaug {

inline const std::vector<std::string>& profile_names() {
  static const std::vector<std::string> names = {"kawarith6", "twitter2012", "twitter2018", "custom"};
  return names;
}

struct RunConfig {
  std::string profile = "custom";
  std::uint64_t seed = 42;
  std::string out_dir = "out";

  std::string corpus_path;
  std::string embeddings_path;
  std::string model_path;
  std::string encoder;  // "" or "hashing"
  std::size_t encoder_dim = 768;

  SplitSpec split;
  FusionParams fusion;

  std::vector<Strategy> strategies = {Strategy{StrategyKind::Paraphrase}};
  int copies = 1;
  bool train_only = false;
  std::string cache_dir;  // "" means <out>/cache
  std::string mock;       // "", "echo" or "hash"
  ProviderConfig provider;

  PerturbationConfig perturb;
  TrainConfig train;
  bool implicit = true;

  std::vector<double> ratios = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  std::uint64_t subsample_seed = 7;
  std::size_t bins = 100;

  /// Copies the derived fields into place: the run seed drives the split
  /// and training streams.
  void finalize() {
    split.seed = seed;
    train.seed = seed;
    train.implicit.reset();
    if (implicit) train.implicit = perturb;
  }

  void validate() const {
    try {
      split.validate();
      fusion.validate();
      perturb.validate();
      train.validate();
      provider.validate();
    } catch (const ValidationError& e) {
      throw ConfigError(e.what());
    }
    if (copies < 0) throw ConfigError("augment.copies must be >= 0");
    if (!mock.empty() && mock != "echo" && mock != "hash") {
      throw ConfigError("augment.mock must be echo or hash, got '" + mock + "'");
    }
    if (!encoder.empty() && encoder != "hashing") {
      throw ConfigError("data.encoder must be empty or hashing, got '" + encoder + "'");
    }
    if (encoder_dim < 1) throw ConfigError("data.encoder_dim must be >= 1");
    for (double r : ratios) {
      if (!(r > 0.0 && r <= 1.0)) throw ConfigError("study.ratios must lie in (0,1]");
    }
    if (bins < 1) throw ConfigError("diagnose.bins must be >= 1");
  }

  nlohmann::ordered_json to_json() const;
};

/// Flat "section.key" -> value overrides, in application order.
using ConfigOverrides = std::vector<std::pair<std::string, std::string>>;

namespace detail {

inline std::string trim(std::string s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

inline long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
}

inline std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    const auto u = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return u;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

}  // namespace detail

/// Applies one override. Unknown keys are errors.
inline void apply_override(RunConfig& c, const std::string& key, const std::string& raw) {
  using namespace detail;
  const std::string v = trim(raw);
  auto dbl = [&] { return to_double(key, v); };
  auto integer = [&] { return static_cast<int>(to_int(key, v)); };
  auto size = [&] { return static_cast<std::size_t>(to_u64(key, v)); };

  if (key == "run.profile") {
    c.profile = v;
  } else if (key == "run.seed") {
    c.seed = to_u64(key, v);
  } else if (key == "run.out") {
    c.out_dir = v;
  } else if (key == "data.corpus") {
    c.corpus_path = v;
  } else if (key == "data.embeddings") {
    c.embeddings_path = v;
  } else if (key == "data.model") {
    c.model_path = v;
  } else if (key == "data.encoder") {
    c.encoder = v;
  } else if (key == "data.encoder_dim") {
    c.encoder_dim = size();
  } else if (key == "split.train") {
    c.split.train_ratio = dbl();
  } else if (key == "split.val") {
    c.split.val_ratio = dbl();
  } else if (key == "split.test") {
    c.split.test_ratio = dbl();
  } else if (key == "fusion.self_weight") {
    c.fusion.self_weight = dbl();
  } else if (key == "fusion.user_weight") {
    c.fusion.user_weight = dbl();
  } else if (key == "fusion.entity_weight") {
    c.fusion.entity_weight = dbl();
  } else if (key == "fusion.layers") {
    c.fusion.layers = integer();
  } else if (key == "augment.strategies") {
    c.strategies.clear();
    for (const auto& name : split_list(v)) {
      auto s = Strategy::parse(name);
      if (!s) throw ConfigError(key + ": unknown strategy '" + name + "'");
      c.strategies.push_back(*s);
    }
  } else if (key == "augment.copies") {
    c.copies = integer();
  } else if (key == "augment.train_only") {
    c.train_only = to_bool(key, v);
  } else if (key == "augment.cache_dir") {
    c.cache_dir = v;
  } else if (key == "augment.mock") {
    c.mock = v;
  } else if (key == "augment.endpoint") {
    c.provider.endpoint = v;
  } else if (key == "augment.model") {
    c.provider.model = v;
  } else if (key == "augment.max_tokens") {
    c.provider.max_tokens = integer();
  } else if (key == "augment.temperature") {
    c.provider.temperature = dbl();
  } else if (key == "augment.auth_env") {
    c.provider.auth_env = v;
  } else if (key == "augment.max_retries") {
    c.provider.max_retries = integer();
  } else if (key == "augment.max_in_flight") {
    c.provider.max_in_flight = integer();
  } else if (key == "implicit.method") {
    auto m = parse_method(v);
    if (!m) throw ConfigError(key + ": unknown method '" + v + "'");
    c.perturb.method = *m;
  } else if (key == "implicit.alpha") {
    c.perturb.alpha = dbl();
  } else if (key == "implicit.sigma") {
    c.perturb.sigma = dbl();
  } else if (key == "implicit.clip_c") {
    c.perturb.clip_c = dbl();
  } else if (key == "implicit.alpha_var") {
    c.perturb.alpha_var = dbl();
  } else if (key == "implicit.keep_ratio") {
    c.perturb.keep_ratio = dbl();
  } else if (key == "implicit.noise_level") {
    c.perturb.noise_level = dbl();
  } else if (key == "implicit.fdp_mode") {
    auto m = parse_fdp_mode(v);
    if (!m) throw ConfigError(key + ": unknown FDP mode '" + v + "'");
    c.perturb.fdp_mode = *m;
  } else if (key == "train.epochs") {
    c.train.epochs = integer();
  } else if (key == "train.batch_size") {
    c.train.batch_size = size();
  } else if (key == "train.learning_rate") {
    c.train.learning_rate = dbl();
  } else if (key == "train.implicit") {
    c.implicit = to_bool(key, v);
  } else if (key == "train.threads") {
    c.train.threads = static_cast<unsigned>(to_u64(key, v));
  } else if (key == "study.ratios") {
    c.ratios.clear();
    for (const auto& r : split_list(v)) c.ratios.push_back(to_double(key, r));
  } else if (key == "study.subsample_seed") {
    c.subsample_seed = to_u64(key, v);
  } else if (key == "diagnose.bins") {
    c.bins = size();
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

/// Reads an INI or JSON config file into overrides.
inline ConfigOverrides read_config_file(const std::filesystem::path& path) {
  ConfigOverrides out;
  std::string text;
  try {
    text = detail::read_file_bytes(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::ordered_json j;
    try {
      j = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
    for (const auto& [section, body] : j.items()) {
      if (!body.is_object()) throw ConfigError(path.string() + ": section '" + section + "' is not an object");
      for (const auto& [key, value] : body.items()) {
        std::string v;
        if (value.is_string()) {
          v = value.get<std::string>();
        } else if (value.is_array()) {
          for (const auto& item : value) {
            if (!v.empty()) v += ",";
            v += item.is_string() ? item.get<std::string>() : item.dump();
          }
        } else {
          v = value.dump();
        }
        out.emplace_back(section + "." + key, v);
      }
    }
    return out;
  }
  boost::property_tree::ptree tree;
  try {
    std::istringstream in(text);
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(path.string() + ": line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(path.string() + ": key '" + section + "' is outside a section");
    for (const auto& [key, value] : body) out.emplace_back(section + "." + key, value.data());
  }
  return out;
}

/// Resolves profile, then file, then flag overrides. The profile is taken
/// from the flags if given there, else from the file, else "custom".
inline RunConfig resolve_config(const std::optional<std::filesystem::path>& config_file,
                                const ConfigOverrides& flags) {
  const ConfigOverrides file = config_file ? read_config_file(*config_file) : ConfigOverrides{};
  std::string profile = "custom";
  for (const auto* layer : {&file, &flags}) {
    for (const auto& [k, v] : *layer) {
      if (k == "run.profile") profile = detail::trim(v);
    }
  }
  auto perturb = profile_config(profile);
  if (!perturb) throw ConfigError("unknown profile '" + profile + "'");
  RunConfig c;
  c.profile = profile;
  c.perturb = *perturb;
  for (const auto* layer : {&file, &flags}) {
    for (const auto& [k, v] : *layer) apply_override(c, k, v);
  }
  c.finalize();
  c.validate();
  return c;
}

inline nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["run"] = {{"profile", profile}, {"seed", seed}, {"out", out_dir}};
  j["data"] = {{"corpus", corpus_path},
               {"embeddings", embeddings_path},
               {"model", model_path},
               {"encoder", encoder},
               {"encoder_dim", encoder_dim}};
  j["split"] = {{"train", split.train_ratio}, {"val", split.val_ratio}, {"test", split.test_ratio}};
  j["fusion"] = {{"self_weight", fusion.self_weight},
                 {"user_weight", fusion.user_weight},
                 {"entity_weight", fusion.entity_weight},
                 {"layers", fusion.layers}};
  auto names = nlohmann::ordered_json::array();
  for (const auto& s : strategies) names.push_back(s.name());
  j["augment"] = {{"strategies", names},
                  {"copies", copies},
                  {"train_only", train_only},
                  {"cache_dir", cache_dir},
                  {"mock", mock},
                  {"endpoint", provider.endpoint},
                  {"model", provider.model},
                  {"max_tokens", provider.max_tokens},
                  {"temperature", provider.temperature},
                  {"auth_env", provider.auth_env},
                  {"max_retries", provider.max_retries},
                  {"max_in_flight", provider.max_in_flight}};
  j["implicit"] = {{"method", to_string(perturb.method)},
                  {"alpha", perturb.alpha},
                  {"sigma", perturb.sigma},
                  {"clip_c", perturb.clip_c},
                  {"alpha_var", perturb.alpha_var},
                  {"keep_ratio", perturb.keep_ratio},
                  {"noise_level", perturb.noise_level},
                  {"fdp_mode", to_string(perturb.fdp_mode)}};
  j["train"] = {{"epochs", train.epochs},
                {"batch_size", train.batch_size},
                {"learning_rate", train.learning_rate},
                {"implicit", implicit},
                {"threads", train.threads}};
  j["study"] = {{"ratios", ratios}, {"subsample_seed", subsample_seed}};
  j["diagnose"] = {{"bins", bins}};
  return j;
}

/// Writes <dir>/resolved-config.json.
inline std::filesystem::path write_resolved_config(const RunConfig& c, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(dir.string(), "cannot create output directory: " + ec.message());
  const auto path = dir / "resolved-config.json";
  detail::write_file_bytes(path, c.to_json().dump(2) + "\n");
  return path;
}

}  // namespace eventaug
