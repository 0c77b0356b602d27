// Copyright 2026 The eventaug Authors.
//
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <gtest/gtest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "eventaug/explicit_aug.hpp"
#include "eventaug/http_provider.hpp"

namespace eventaug {
namespace {

namespace fs = std::filesystem;

Message storm_message() {
  Message m;
  m.id = "m1";
  m.text = "Storm hits Miami tonight";
  m.user_id = "u7";
  m.timestamp = 1700000000;
  m.entities = {"Miami", "Storm"};
  m.location = "Florida";
  m.label = 2;
  return m;
}

Corpus ten_messages() {
  Corpus c;
  for (int i = 0; i < 10; ++i) {
    Message m;
    m.id = "s" + std::to_string(i);
    m.text = "Flood warning " + std::to_string(i) + " for Jakarta";
    m.user_id = "u" + std::to_string(i % 3);
    m.timestamp = 1700000000 + 60 * i;
    m.entities = {"Jakarta"};
    m.label = i % 2;
    c.messages.push_back(m);
  }
  c.finalize();
  return c;
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

// Returns a fixed answer, or fails when the source text contains "FAIL".
class ScriptedProvider final : public Provider {
 public:
  explicit ScriptedProvider(std::string answer = "") : answer_(std::move(answer)) {}

 protected:
  Completion do_complete(const std::string& prompt) override {
    const auto src = prompt_source_text(prompt);
    if (src.find("FAIL") != std::string::npos) throw ProviderError("scripted failure", 503);
    return {answer_.empty() ? src : answer_, "scripted", 1.0};
  }

 private:
  std::string answer_;
};

// Strategies and prompts

TEST(Strategies, NamesRoundTrip) {
  for (const auto& s : Strategy::all()) EXPECT_EQ(Strategy::parse(s.name()), s);
  EXPECT_EQ(Strategy::parse("extract-rewrite")->name(), "extract-rewrite:keywords");
  EXPECT_FALSE(Strategy::parse("summarize").has_value());
  EXPECT_EQ(Strategy::five().size(), 5u);
}

TEST(Prompts, ParaphraseIsByteStableAndEmbedsText) {
  const auto m = storm_message();
  const Strategy s{StrategyKind::Paraphrase};
  const auto p = render_prompt(s, m);
  EXPECT_EQ(p, render_prompt(s, m));
  EXPECT_NE(p.find("<message>\nStorm hits Miami tonight\n</message>"), std::string::npos);
  EXPECT_NE(p.find("paraphrase"), std::string::npos);
  EXPECT_EQ(prompt_source_text(p), m.text);
  EXPECT_NE(render_prompt(s, m, 1), p);
}

TEST(Prompts, KeepEntityListsEntities) {
  const auto p = render_prompt({StrategyKind::KeepEntity}, storm_message());
  EXPECT_NE(p.find("DO NOT CHANGE:\n- Miami\n- Storm\n"), std::string::npos);
  EXPECT_NE(p.find("remain unchanged"), std::string::npos);
}

TEST(Prompts, ExtractRewriteHasTwoStepsPerVariant) {
  std::set<std::string> distinct;
  for (auto v : {ExtractVariant::Keywords, ExtractVariant::Entities, ExtractVariant::KnowledgeGraph}) {
    const auto p = render_prompt({StrategyKind::ExtractRewrite, v}, storm_message());
    EXPECT_NE(p.find("Step 1 (extract)"), std::string::npos);
    EXPECT_NE(p.find("Step 2 (rewrite)"), std::string::npos);
    EXPECT_NE(p.find("Rewritten:"), std::string::npos);
    distinct.insert(p);
  }
  EXPECT_EQ(distinct.size(), 3u);
}

TEST(Prompts, EmptyTextIsRejected) {
  auto m = storm_message();
  m.text = "  \n ";
  EXPECT_THROW(render_prompt({StrategyKind::Paraphrase}, m), ValidationError);
}

TEST(Postprocess, CleansTypicalAnswers) {
  EXPECT_EQ(postprocess_response("  \"Storm  in\nMiami\"  "), "Storm in Miami");
  EXPECT_EQ(postprocess_response("Extracted: storm, Miami\nRewritten: Miami braces for a storm"),
            "Miami braces for a storm");
  EXPECT_EQ(postprocess_response("```\nhello world\n```"), "hello world");
  EXPECT_EQ(postprocess_response("   "), "");
}

TEST(EntityPreservation, CaseInsensitiveSubstring) {
  const auto m = storm_message();
  EXPECT_TRUE(check_entity_preservation(m, "a STORM over miami"));
  EXPECT_FALSE(check_entity_preservation(m, "a storm over Orlando"));
  Message none = m;
  none.entities.clear();
  EXPECT_TRUE(check_entity_preservation(none, ""));
}

// Single variants

TEST(Variant, EchoPreservesMetadataAndSetsOrigin) {
  EchoProvider echo;
  const auto src = storm_message();
  const Strategy s{StrategyKind::Paraphrase};
  const auto v = augment_message(echo, s, src);
  EXPECT_EQ(v.id, "m1~paraphrase~0");
  EXPECT_EQ(v.text, src.text);
  EXPECT_EQ(v.user_id, src.user_id);
  EXPECT_EQ(v.timestamp, src.timestamp);
  EXPECT_EQ(v.entities, src.entities);
  EXPECT_EQ(v.location, src.location);
  EXPECT_EQ(v.label, src.label);
  ASSERT_TRUE(v.origin.has_value());
  EXPECT_EQ(v.origin->source_id, "m1");
  EXPECT_EQ(v.origin->strategy, "paraphrase");
  EXPECT_EQ(echo.calls(), 1u);
  EXPECT_THROW(augment_message(echo, s, v), ValidationError);
}

TEST(Variant, KeepEntityRejectsDroppedEntity) {
  ScriptedProvider drops("A storm is hitting the coast");
  EXPECT_THROW(augment_message(drops, {StrategyKind::KeepEntity}, storm_message()), AugmentationRejected);
  EXPECT_NO_THROW(augment_message(drops, {StrategyKind::Paraphrase}, storm_message()));
  ScriptedProvider blank("\"\"");
  EXPECT_THROW(augment_message(blank, {StrategyKind::Paraphrase}, storm_message()), AugmentationRejected);
}

TEST(Variant, HashMockIsDeterministicAndDistinctPerCopy) {
  HashMockProvider a, b;
  const Strategy s{StrategyKind::StyleTransfer};
  const auto x = augment_message(a, s, storm_message(), 0);
  EXPECT_EQ(x.text, augment_message(b, s, storm_message(), 0).text);
  EXPECT_NE(x.text, augment_message(a, s, storm_message(), 1).text);
  EXPECT_NE(x.text.find("Storm hits Miami tonight"), std::string::npos);
}

// Cache

TEST(Cache, KeyDependsOnStrategyCopyAndText) {
  const Strategy p{StrategyKind::Paraphrase};
  const auto k = cache_key(p, 0, "hello");
  EXPECT_EQ(k.size(), 16u);
  EXPECT_EQ(k, cache_key(p, 0, "hello"));
  EXPECT_NE(k, cache_key(p, 1, "hello"));
  EXPECT_NE(k, cache_key(p, 0, "hello!"));
  EXPECT_NE(k, cache_key({StrategyKind::AddContext}, 0, "hello"));
}

TEST(Cache, RecordRoundTripAndCorruptEntryIsMiss) {
  const auto dir = fresh_dir("eventaug_cache_rt");
  AugmentationCache cache(dir);
  AugmentationRecord r;
  r.cache_key = "00000000000000ab";
  r.source_id = "m1";
  r.strategy = "paraphrase";
  r.prompt = "p";
  r.raw_response = "raw";
  r.text = "t";
  r.model = "x";
  r.latency_ms = 2.5;
  cache.put(r);
  const auto back = cache.get(r.cache_key);
  ASSERT_TRUE(back.has_value());
  EXPECT_EQ(back->to_json(), r.to_json());
  std::ofstream(dir / "00000000000000cd.json") << "{not json";
  EXPECT_FALSE(cache.get("00000000000000cd").has_value());
  EXPECT_FALSE(cache.get("ffffffffffffffff").has_value());
}

TEST(Cache, UnwritableDirectoryIsIoError) {
  const auto dir = fresh_dir("eventaug_cache_blocked");
  fs::create_directories(dir);
  std::ofstream(dir / "file") << "x";
  EXPECT_THROW(AugmentationCache(dir / "file" / "sub"), IoError);
}

// Corpus augmentation

TEST(AugmentCorpus, OneParaphrasePerMessageDoublesTheCorpus) {
  EchoProvider echo;
  const auto r = augment_corpus(ten_messages(), {{StrategyKind::Paraphrase}}, echo);
  EXPECT_EQ(r.corpus.size(), 20u);
  EXPECT_EQ(r.generated, 10u);
  EXPECT_EQ(r.originals, 10u);
  EXPECT_TRUE(r.skipped.empty());
  for (std::size_t i = 0; i < 10; ++i) EXPECT_FALSE(r.corpus.messages[i].origin);
  for (std::size_t i = 10; i < 20; ++i) {
    EXPECT_EQ(r.corpus.messages[i].origin->source_id, "s" + std::to_string(i - 10));
  }
}

TEST(AugmentCorpus, OutputIsIndependentOfConcurrency) {
  HashMockProvider a, b;
  AugmentOptions one, many;
  one.max_in_flight = 1;
  many.max_in_flight = 8;
  one.copies_per_strategy = many.copies_per_strategy = 2;
  const auto x = augment_corpus(ten_messages(), Strategy::five(), a, one);
  const auto y = augment_corpus(ten_messages(), Strategy::five(), b, many);
  EXPECT_EQ(x.corpus.messages, y.corpus.messages);
  EXPECT_EQ(x.corpus.size(), 110u);
}

TEST(AugmentCorpus, WarmCacheMakesNoProviderCalls) {
  const auto dir = fresh_dir("eventaug_cache_warm");
  AugmentOptions opt;
  opt.cache_dir = dir;
  HashMockProvider cold_provider;
  const auto cold = augment_corpus(ten_messages(), {{StrategyKind::Paraphrase}, {StrategyKind::KeepEntity}},
                                   cold_provider, opt);
  EXPECT_EQ(cold.provider_calls, 20u);
  EXPECT_EQ(cold.cache_hits, 0u);
  ScriptedProvider warm_provider("should never be used");
  const auto warm = augment_corpus(ten_messages(), {{StrategyKind::Paraphrase}, {StrategyKind::KeepEntity}},
                                   warm_provider, opt);
  EXPECT_EQ(warm.provider_calls, 0u);
  EXPECT_EQ(warm.cache_hits, 20u);
  EXPECT_EQ(warm.corpus.messages, cold.corpus.messages);
}

TEST(AugmentCorpus, FailuresBecomeSkipRecords) {
  auto c = ten_messages();
  c.messages[3].text = "FAIL please";
  c.messages[7].text = "also FAIL";
  ScriptedProvider p;
  const auto r = augment_corpus(c, {{StrategyKind::Paraphrase}}, p);
  EXPECT_EQ(r.corpus.size(), 18u);
  ASSERT_EQ(r.skipped.size(), 2u);
  EXPECT_EQ(r.skipped[0].source_id, "s3");
  EXPECT_EQ(r.skipped[1].source_id, "s7");
  EXPECT_EQ(r.skipped[0].reason, SkipRecord::Reason::Provider);
}

TEST(AugmentCorpus, TrainOnlyAugmentsTrainingOriginals) {
  EchoProvider echo;
  AugmentOptions opt;
  opt.train_only = SplitSpec{};
  const auto c = ten_messages();
  const auto r = augment_corpus(c, {{StrategyKind::Paraphrase}}, echo, opt);
  const auto idx = split_indices(10, SplitSpec{});
  std::set<std::string> train_ids;
  for (auto k : idx.train) train_ids.insert(c.messages[k].id);
  EXPECT_EQ(r.generated, 7u);
  for (const auto& m : r.corpus.messages) {
    if (m.origin) {
      EXPECT_TRUE(train_ids.count(m.origin->source_id)) << m.id;
    }
  }
}

// HTTP provider against a local server

class LocalServer {
 public:
  explicit LocalServer(std::vector<int> statuses) : statuses_(std::move(statuses)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mu_);
      bodies_.push_back(req.body);
      auth_.push_back(req.get_header_value("Authorization"));
      const int status = statuses_[std::min(bodies_.size() - 1, statuses_.size() - 1)];
      res.status = status;
      if (status == 200) {
        nlohmann::json reply = {{"model", "served-model"},
                                {"choices", {{{"message", {{"role", "assistant"}, {"content", "Rewritten text"}}}}}}};
        res.set_content(reply.dump(), "application/json");
      } else {
        res.set_content("{\"error\":\"nope\"}", "application/json");
      }
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }

  ProviderConfig config() const {
    ProviderConfig c;
    c.endpoint = "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
    c.model = "test-model";
    c.auth_env = "EVENTAUG_TEST_TOKEN";
    c.retry_base_delay_ms = 1;
    c.timeout_seconds = 5;
    return c;
  }
  std::vector<std::string> bodies() {
    std::lock_guard lock(mu_);
    return bodies_;
  }
  std::vector<std::string> auth() {
    std::lock_guard lock(mu_);
    return auth_;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::vector<int> statuses_;
  std::mutex mu_;
  std::vector<std::string> bodies_, auth_;
};

TEST(HttpProvider, SendsChatPayloadAndParsesReply) {
  LocalServer server({200});
  ::setenv("EVENTAUG_TEST_TOKEN", "secret", 1);
  HttpProvider p(server.config());
  const auto v = generate_variant(p, {StrategyKind::Paraphrase}, storm_message());
  EXPECT_EQ(v.message.text, "Rewritten text");
  EXPECT_EQ(v.record.model, "served-model");
  const auto bodies = server.bodies();
  ASSERT_EQ(bodies.size(), 1u);
  const auto j = nlohmann::json::parse(bodies[0]);
  EXPECT_EQ(j["model"], "test-model");
  EXPECT_EQ(j["max_tokens"], 1000);
  EXPECT_EQ(j["temperature"], 1.0);
  EXPECT_EQ(j["messages"][0]["role"], "user");
  EXPECT_EQ(j["messages"][0]["content"], render_prompt({StrategyKind::Paraphrase}, storm_message()));
  EXPECT_EQ(server.auth()[0], "Bearer secret");
  ::unsetenv("EVENTAUG_TEST_TOKEN");
}

TEST(HttpProvider, RetriesServerErrorsThenSucceeds) {
  LocalServer server({500, 429, 200});
  HttpProvider p(server.config());
  EXPECT_EQ(p.complete("x").text, "Rewritten text");
  EXPECT_EQ(server.bodies().size(), 3u);
}

TEST(HttpProvider, GivesUpAfterMaxRetries) {
  LocalServer server({503});
  auto cfg = server.config();
  cfg.max_retries = 2;
  HttpProvider p(cfg);
  EXPECT_THROW(p.complete("x"), ProviderError);
  EXPECT_EQ(server.bodies().size(), 3u);
}

TEST(HttpProvider, ClientErrorFailsWithoutRetry) {
  LocalServer server({400});
  HttpProvider p(server.config());
  try {
    p.complete("x");
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.status(), 400);
  }
  EXPECT_EQ(server.bodies().size(), 1u);
}

TEST(HttpProvider, RejectsBadEndpoints) {
  ProviderConfig c;
  c.endpoint = "ftp://example.com/x";
  EXPECT_THROW(HttpProvider{c}, ConfigError);
  c.endpoint = "no-scheme";
  EXPECT_THROW(HttpProvider{c}, ConfigError);
  const auto e = parse_endpoint("http://host:8080");
  EXPECT_EQ(e.base, "http://host:8080");
  EXPECT_EQ(e.path, "/");
}

}  // namespace
}  // namespace eventaug
