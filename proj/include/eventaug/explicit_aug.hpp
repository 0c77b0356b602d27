// Copyright 2026 The eventaug Authors.
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Text-level augmentation through an LLM provider.
//
// Every request is a single user prompt rendered from a versioned template.
// Successful responses are cached on disk, one JSON file per cache key:
//
//   <cache_dir>/<16 hex digits>.json
//   {"cache_key", "source_id", "strategy", "template_version", "prompt",
//    "raw_response", "text", "model", "latency_ms"}
//
// The key hashes (strategy descriptor, template version, source text), so
// a template change or a different copy index never reuses a stale answer.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "eventaug/core.hpp"
#include "eventaug/corpus.hpp"
#include "eventaug/dataset.hpp"
#include "eventaug/embedding_io.hpp"
#include "eventaug/error.hpp"
#include "eventaug/rng.hpp"

namespace eventaug {

inline constexpr std::string_view kPromptTemplateVersion = "v1";

enum class StrategyKind { Paraphrase, AddContext, StyleTransfer, KeepEntity, ExtractRewrite };
enum class ExtractVariant { Keywords, Entities, KnowledgeGraph };

struct Strategy {
  StrategyKind kind = StrategyKind::Paraphrase;
  ExtractVariant variant = ExtractVariant::Keywords;  // extract-rewrite only

  /// CLI spelling: paraphrase, add-context, style-transfer, keep-entity,
  /// extract-rewrite:keywords, extract-rewrite:entities, extract-rewrite:kg.
  std::string name() const {
    switch (kind) {
      case StrategyKind::Paraphrase: return "paraphrase";
      case StrategyKind::AddContext: return "add-context";
      case StrategyKind::StyleTransfer: return "style-transfer";
      case StrategyKind::KeepEntity: return "keep-entity";
      case StrategyKind::ExtractRewrite:
        switch (variant) {
          case ExtractVariant::Keywords: return "extract-rewrite:keywords";
          case ExtractVariant::Entities: return "extract-rewrite:entities";
          case ExtractVariant::KnowledgeGraph: return "extract-rewrite:kg";
        }
    }
    return "?";
  }

  static std::optional<Strategy> parse(std::string_view s) {
    for (const auto& st : all()) {
      if (st.name() == s) return st;
    }
    if (s == "extract-rewrite") return Strategy{StrategyKind::ExtractRewrite, ExtractVariant::Keywords};
    return std::nullopt;
  }

  /// The five top-level strategies (extract-rewrite with keywords).
  static std::vector<Strategy> five() {
    return {{StrategyKind::Paraphrase},
            {StrategyKind::AddContext},
            {StrategyKind::StyleTransfer},
            {StrategyKind::KeepEntity},
            {StrategyKind::ExtractRewrite, ExtractVariant::Keywords}};
  }

  static std::vector<Strategy> all() {
    auto out = five();
    out.push_back({StrategyKind::ExtractRewrite, ExtractVariant::Entities});
    out.push_back({StrategyKind::ExtractRewrite, ExtractVariant::KnowledgeGraph});
    return out;
  }

  friend bool operator==(const Strategy& a, const Strategy& b) {
    return a.kind == b.kind && (a.kind != StrategyKind::ExtractRewrite || a.variant == b.variant);
  }
};

struct ProviderConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-4o-mini";
  int max_tokens = 1000;
  double temperature = 1.0;
  std::string auth_env = "OPENAI_API_KEY";
  int max_retries = 3;
  int max_in_flight = 4;
  int timeout_seconds = 60;
  int retry_base_delay_ms = 500;

  void validate() const {
    if (max_tokens < 1) throw ConfigError("provider max_tokens must be >= 1");
    if (max_in_flight < 1) throw ConfigError("provider max_in_flight must be >= 1");
    if (max_retries < 0) throw ConfigError("provider max_retries must be >= 0");
    if (endpoint.empty()) throw ConfigError("provider endpoint is empty");
  }
};

/// Chat-completion request body: {model, messages, max_tokens, temperature}.
inline nlohmann::ordered_json provider_request_body(const ProviderConfig& config,
                                                    std::string_view prompt) {
  nlohmann::ordered_json body;
  body["model"] = config.model;
  body["messages"] = nlohmann::ordered_json::array(
      {nlohmann::ordered_json{{"role", "user"}, {"content", std::string(prompt)}}});
  body["max_tokens"] = config.max_tokens;
  body["temperature"] = config.temperature;
  return body;
}

struct Completion {
  std::string text;
  std::string model;
  double latency_ms = 0.0;
};

/// LLM backend. Implementations must be safe to call concurrently.
class Provider {
 public:
  virtual ~Provider() = default;

  Completion complete(const std::string& prompt) {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return do_complete(prompt);
  }

  std::size_t calls() const noexcept { return calls_.load(std::memory_order_relaxed); }
  virtual int max_in_flight() const { return 1; }

 protected:
  virtual Completion do_complete(const std::string& prompt) = 0;

 private:
  std::atomic<std::size_t> calls_{0};
};

namespace detail {

inline constexpr std::string_view kMessageOpen = "<message>\n";
inline constexpr std::string_view kMessageClose = "\n</message>";

}  // namespace detail

/// Source text embedded in a rendered prompt, or empty if absent.
inline std::string prompt_source_text(std::string_view prompt) {
  const auto a = prompt.find(detail::kMessageOpen);
  if (a == std::string_view::npos) return {};
  const auto start = a + detail::kMessageOpen.size();
  const auto b = prompt.find(detail::kMessageClose, start);
  if (b == std::string_view::npos) return {};
  return std::string(prompt.substr(start, b - start));
}

/// Returns the source message unchanged.
class EchoProvider final : public Provider {
 protected:
  Completion do_complete(const std::string& prompt) override {
    return {prompt_source_text(prompt), "mock-echo", 0.0};
  }
};

/// Deterministic offline stand-in: the source text with a tag derived from
/// the prompt hash, so every (strategy, copy, text) gets a distinct answer.
class HashMockProvider final : public Provider {
 protected:
  Completion do_complete(const std::string& prompt) override {
    static constexpr std::array<std::string_view, 6> kLeads = {
        "Update:", "Reported:", "Now:", "Heads up:", "Latest:", "Seen:"};
    const auto h = fnv1a64(prompt);
    char tag[24];
    std::snprintf(tag, sizeof tag, " [%08x]", static_cast<unsigned>(h & 0xFFFFFFFFu));
    return {std::string(kLeads[h % kLeads.size()]) + " " + prompt_source_text(prompt) + tag,
            "mock-hash", 0.0};
  }
};

/// Renders the prompt for one strategy. `copy` > 0 asks for a further
/// distinct variant.
inline std::string render_prompt(const Strategy& strategy, const Message& message, int copy = 0) {
  if (message.text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw ValidationError("render_prompt: message '" + message.id + "' has empty text");
  }
  std::string p = "You are generating training data for social event detection.\n";
  bool structured = false;
  switch (strategy.kind) {
    case StrategyKind::Paraphrase:
      p += "Task: paraphrase the social media message below. Keep its meaning but change the "
           "wording and sentence structure.\n";
      break;
    case StrategyKind::AddContext:
      p += "Task: expand the social media message below with relevant background context that "
           "makes the event it reports easier to understand. Keep every original fact.\n";
      break;
    case StrategyKind::StyleTransfer:
      p += "Task: rewrite the social media message below in a different style (for example "
           "another tone or level of formality). Do not change what it says.\n";
      break;
    case StrategyKind::KeepEntity:
      p += "Task: rewrite the social media message below into a varied version. The entities "
           "listed under DO NOT CHANGE must remain unchanged and appear verbatim.\n";
      p += "DO NOT CHANGE:\n";
      if (message.entities.empty()) p += "(none listed)\n";
      for (const auto& e : message.entities) p += "- " + e + "\n";
      break;
    case StrategyKind::ExtractRewrite:
      structured = true;
      p += "Task: work in two steps.\n";
      switch (strategy.variant) {
        case ExtractVariant::Keywords:
          p += "Step 1 (extract): using your background knowledge, list the keywords of the "
               "message that carry the most information about the event.\n";
          break;
        case ExtractVariant::Entities:
          p += "Step 1 (extract): list the key entities of the message, such as people, "
               "organizations, locations and dates.\n";
          break;
        case ExtractVariant::KnowledgeGraph:
          p += "Step 1 (extract): build a small knowledge graph of the message as "
               "(subject, relation, object) triples connecting its entities.\n";
          break;
      }
      p += "Step 2 (rewrite): using only what you extracted, write a restructured version of "
           "the message that keeps that information but presents it differently.\n";
      break;
  }
  if (copy > 0) {
    p += "This is variant " + std::to_string(copy + 1) + "; make it differ from earlier variants.\n";
  }
  p += "\nMessage:\n";
  p += detail::kMessageOpen;
  p += message.text;
  p += detail::kMessageClose;
  p += "\n\n";
  p += structured ? "Answer in exactly this format:\nExtracted: <step 1 result>\nRewritten: <the "
                    "rewritten message>\n"
                  : "Reply with the rewritten message only.\n";
  return p;
}

/// Cleans an LLM answer: takes the text after the last "Rewritten:" marker
/// if present, drops markdown fences and surrounding quotes, and collapses
/// whitespace.
inline std::string postprocess_response(std::string_view raw) {
  std::string s(raw);
  if (auto p = s.rfind("Rewritten:"); p != std::string::npos) s = s.substr(p + 10);
  std::string no_fence;
  std::istringstream lines(s);
  for (std::string line; std::getline(lines, line);) {
    auto first = line.find_first_not_of(" \t");
    if (first != std::string::npos && line.compare(first, 3, "```") == 0) continue;
    no_fence += line;
    no_fence += '\n';
  }
  std::string out;
  bool space = false;
  for (char c : no_fence) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
    } else {
      if (space) out.push_back(' ');
      space = false;
      out.push_back(c);
    }
  }
  auto strip_pair = [&](std::string_view open, std::string_view close) {
    if (out.size() >= open.size() + close.size() && out.starts_with(open) && out.ends_with(close)) {
      out = out.substr(open.size(), out.size() - open.size() - close.size());
      return true;
    }
    return false;
  };
  while (strip_pair("\"", "\"") || strip_pair("'", "'") || strip_pair("“", "”")) {
  }
  return out;
}

/// True iff every source entity occurs in `augmented_text`, ignoring ASCII case.
inline bool check_entity_preservation(const Message& source, std::string_view augmented_text) {
  std::string hay(augmented_text);
  for (auto& c : hay) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (const auto& e : source.entities) {
    std::string needle = e;
    for (auto& c : needle) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (hay.find(needle) == std::string::npos) return false;
  }
  return true;
}

inline bool check_entity_preservation(const Message& source, const Message& augmented) {
  return check_entity_preservation(source, augmented.text);
}

struct AugmentationRecord {
  std::string source_id;
  std::string strategy;
  std::string template_version{kPromptTemplateVersion};
  std::string prompt;
  std::string raw_response;
  std::string text;
  std::string model;
  double latency_ms = 0.0;
  std::string cache_key;

  nlohmann::ordered_json to_json() const {
    return {{"cache_key", cache_key},   {"source_id", source_id},       {"strategy", strategy},
            {"template_version", template_version}, {"prompt", prompt}, {"raw_response", raw_response},
            {"text", text},             {"model", model},               {"latency_ms", latency_ms}};
  }

  static AugmentationRecord from_json(const nlohmann::json& j) {
    AugmentationRecord r;
    r.cache_key = j.at("cache_key").get<std::string>();
    r.source_id = j.at("source_id").get<std::string>();
    r.strategy = j.at("strategy").get<std::string>();
    r.template_version = j.at("template_version").get<std::string>();
    r.prompt = j.at("prompt").get<std::string>();
    r.raw_response = j.at("raw_response").get<std::string>();
    r.text = j.at("text").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.latency_ms = j.at("latency_ms").get<double>();
    return r;
  }
};

/// Strategy name plus copy index; part of the cache key.
inline std::string strategy_descriptor(const Strategy& s, int copy) {
  return s.name() + "/copy=" + std::to_string(copy);
}

inline std::string cache_key(const Strategy& s, int copy, std::string_view source_text) {
  std::string material = strategy_descriptor(s, copy);
  material += '\x1f';
  material += kPromptTemplateVersion;
  material += '\x1f';
  material += source_text;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(material)));
  return buf;
}

/// Directory of AugmentationRecord files. Concurrent put() of distinct keys
/// is safe: each write goes to a unique temp file and is renamed into place.
class AugmentationCache {
 public:
  explicit AugmentationCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError(dir_.string(), "cannot create cache directory: " + ec.message());
    const auto probe = dir_ / ".write-probe";
    {
      std::ofstream out(probe);
      if (!out) throw IoError(dir_.string(), "cache directory is not writable");
    }
    std::filesystem::remove(probe, ec);
  }

  const std::filesystem::path& dir() const noexcept { return dir_; }

  std::optional<AugmentationRecord> get(const std::string& key) const {
    const auto path = dir_ / (key + ".json");
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return std::nullopt;
    try {
      auto rec = AugmentationRecord::from_json(nlohmann::json::parse(detail::read_file_bytes(path)));
      if (rec.cache_key != key || rec.template_version != kPromptTemplateVersion) return std::nullopt;
      return rec;
    } catch (const std::exception&) {
      return std::nullopt;  // unreadable entries are treated as misses and rewritten
    }
  }

  void put(const AugmentationRecord& rec) const {
    const auto path = dir_ / (rec.cache_key + ".json");
    std::ostringstream tid;
    tid << std::this_thread::get_id();
    auto tmp = path;
    tmp += "." + tid.str() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError(tmp.string(), "cannot write cache entry");
      out << rec.to_json().dump(2) << '\n';
      if (!out) throw IoError(tmp.string(), "cannot write cache entry");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError(path.string(), "cannot commit cache entry: " + ec.message());
  }

 private:
  std::filesystem::path dir_;
};

/// Id of the `copy`-th variant of `source_id` under `strategy`.
inline std::string augmented_id(const std::string& source_id, const Strategy& strategy, int copy) {
  return source_id + "~" + strategy.name() + "~" + std::to_string(copy);
}

struct VariantResult {
  Message message;
  AugmentationRecord record;
  bool cache_hit = false;
};

/// One augmented variant of an original message. Metadata (user, time,
/// entities, location, label) is copied from the source; only id, text and
/// origin differ. Throws AugmentationRejected for an empty answer or, under
/// keep-entity, when an entity went missing; ProviderError propagates.
inline VariantResult generate_variant(Provider& provider, const Strategy& strategy,
                                      const Message& source, int copy = 0,
                                      const AugmentationCache* cache = nullptr) {
  if (source.origin) {
    throw ValidationError("cannot augment augmented message '" + source.id + "'");
  }
  VariantResult out;
  auto& rec = out.record;
  rec.prompt = render_prompt(strategy, source, copy);
  rec.cache_key = cache_key(strategy, copy, source.text);
  rec.source_id = source.id;
  rec.strategy = strategy.name();

  std::optional<AugmentationRecord> hit = cache ? cache->get(rec.cache_key) : std::nullopt;
  if (hit) {
    rec.raw_response = hit->raw_response;
    rec.text = hit->text;
    rec.model = hit->model;
    rec.latency_ms = hit->latency_ms;
    out.cache_hit = true;
  } else {
    const auto t0 = std::chrono::steady_clock::now();
    auto completion = provider.complete(rec.prompt);
    const auto t1 = std::chrono::steady_clock::now();
    rec.raw_response = std::move(completion.text);
    rec.model = std::move(completion.model);
    rec.latency_ms = completion.latency_ms > 0.0
                         ? completion.latency_ms
                         : std::chrono::duration<double, std::milli>(t1 - t0).count();
    rec.text = postprocess_response(rec.raw_response);
  }

  if (rec.text.empty()) {
    throw AugmentationRejected("empty response for '" + source.id + "' (" + rec.strategy + ")");
  }
  if (strategy.kind == StrategyKind::KeepEntity && !check_entity_preservation(source, rec.text)) {
    throw AugmentationRejected("keep-entity output for '" + source.id + "' dropped an entity");
  }
  if (cache && !hit) cache->put(rec);

  out.message = source;
  out.message.id = augmented_id(source.id, strategy, copy);
  out.message.text = rec.text;
  out.message.origin = AugmentedFrom{strategy.name(), source.id};
  return out;
}

inline Message augment_message(Provider& provider, const Strategy& strategy, const Message& source,
                               int copy = 0) {
  return generate_variant(provider, strategy, source, copy).message;
}

struct SkipRecord {
  enum class Reason { Provider, Rejected, Invalid };
  std::string source_id;
  std::string strategy;
  int copy = 0;
  Reason reason = Reason::Provider;
  std::string detail;
};

struct AugmentOptions {
  int copies_per_strategy = 1;
  /// Concurrent requests; 0 means the provider's own limit.
  int max_in_flight = 0;
  /// When set, only labeled originals in this split's training part are
  /// augmented (same membership rule as partition()).
  std::optional<SplitSpec> train_only;
  std::optional<std::filesystem::path> cache_dir;
};

struct AugmentCorpusResult {
  Corpus corpus;
  std::vector<SkipRecord> skipped;
  std::size_t originals = 0;
  std::size_t generated = 0;
  std::size_t cache_hits = 0;
  std::size_t provider_calls = 0;
  std::size_t attempted = 0;
};

/// Originals followed by their variants (source order, then strategy, then
/// copy). Per-variant failures become skip records and never abort the run.
inline AugmentCorpusResult augment_corpus(const Corpus& corpus, const std::vector<Strategy>& strategies,
                                          Provider& provider, const AugmentOptions& options = {}) {
  if (options.copies_per_strategy < 0) throw ValidationError("copies_per_strategy must be >= 0");
  std::optional<AugmentationCache> cache;
  if (options.cache_dir) cache.emplace(*options.cache_dir);

  std::vector<std::size_t> sources;
  if (options.train_only) {
    std::vector<std::size_t> labeled;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const auto& m = corpus.messages[i];
      if (!m.origin && m.label) labeled.push_back(i);
    }
    const auto idx = split_indices(labeled.size(), *options.train_only);
    for (auto k : idx.train) sources.push_back(labeled[k]);
    std::sort(sources.begin(), sources.end());
  } else {
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (!corpus.messages[i].origin) sources.push_back(i);
    }
  }

  struct Task {
    std::size_t source;
    Strategy strategy;
    int copy;
  };
  std::vector<Task> tasks;
  for (auto s : sources) {
    for (const auto& st : strategies) {
      for (int c = 0; c < options.copies_per_strategy; ++c) tasks.push_back({s, st, c});
    }
  }

  std::vector<std::optional<VariantResult>> done(tasks.size());
  std::vector<std::optional<SkipRecord>> failed(tasks.size());
  const std::size_t calls_before = provider.calls();
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t; (t = next.fetch_add(1)) < tasks.size();) {
      const auto& task = tasks[t];
      const auto& src = corpus.messages[task.source];
      auto skip = [&](SkipRecord::Reason r, const char* what) {
        failed[t] = SkipRecord{src.id, task.strategy.name(), task.copy, r, what};
      };
      try {
        done[t] = generate_variant(provider, task.strategy, src, task.copy, cache ? &*cache : nullptr);
      } catch (const ProviderError& e) {
        skip(SkipRecord::Reason::Provider, e.what());
      } catch (const AugmentationRejected& e) {
        skip(SkipRecord::Reason::Rejected, e.what());
      } catch (const ValidationError& e) {
        skip(SkipRecord::Reason::Invalid, e.what());
      } catch (const IoError& e) {
        skip(SkipRecord::Reason::Invalid, e.what());
      }
    }
  };
  int lanes = options.max_in_flight > 0 ? options.max_in_flight : provider.max_in_flight();
  lanes = std::max(1, std::min<int>(lanes, static_cast<int>(std::max<std::size_t>(tasks.size(), 1))));
  if (lanes == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < lanes; ++i) pool.emplace_back(worker);
  }

  AugmentCorpusResult result;
  result.attempted = tasks.size();
  for (const auto& m : corpus.messages) {
    if (!m.origin) {
      result.corpus.messages.push_back(m);
      ++result.originals;
    }
  }
  for (const auto& m : corpus.messages) {
    if (m.origin) result.corpus.messages.push_back(m);  // keep earlier variants
  }
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (done[t]) {
      result.cache_hits += done[t]->cache_hit ? 1 : 0;
      result.corpus.messages.push_back(std::move(done[t]->message));
      ++result.generated;
    } else if (failed[t]) {
      result.skipped.push_back(std::move(*failed[t]));
    }
  }
  result.provider_calls = provider.calls() - calls_before;
  result.corpus.class_names = corpus.class_names;
  result.corpus.finalize();
  return result;
}

}  // namespace eventaug
