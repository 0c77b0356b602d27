// Copyright 2026 The eventaug Authors.
//
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "eventaug/corpus.hpp"
#include "eventaug/encoder.hpp"
#include "eventaug/error.hpp"

namespace eventaug {
namespace {

namespace fs = std::filesystem;
const fs::path kFixtures = EVENTAUG_FIXTURE_DIR;

using Strings = std::vector<std::string>;

// naive_entities

TEST(NaiveEntities, HashtagsAndCapitalizedRuns) {
  EXPECT_EQ(naive_entities("fire in #Sydney near Bondi Beach"), (Strings{"Sydney", "Bondi Beach"}));
}

TEST(NaiveEntities, EmptyAndLowercaseGiveNothing) {
  EXPECT_TRUE(naive_entities("").empty());
  EXPECT_TRUE(naive_entities("nothing capitalized here").empty());
  EXPECT_TRUE(naive_entities("   \t ").empty());
}

TEST(NaiveEntities, DeduplicatesInFirstOccurrenceOrder) {
  EXPECT_EQ(naive_entities("Paris loves Paris and #Paris and #rain"), (Strings{"Paris", "rain"}));
}

TEST(NaiveEntities, PunctuationSplitsRuns) {
  EXPECT_EQ(naive_entities("Storm hits Miami, Florida today"), (Strings{"Storm", "Miami", "Florida"}));
  EXPECT_EQ(naive_entities("(New York) is busy"), (Strings{"New York"}));
  EXPECT_EQ(naive_entities("#NobelPrize! goes to Bolivia."), (Strings{"NobelPrize", "Bolivia"}));
}

TEST(NaiveEntities, IsPureAndDuplicateFree) {
  const std::string text = "Red Cross and red cross and Red Cross #Aid #Aid in Lima Peru";
  const auto a = naive_entities(text);
  EXPECT_EQ(a, naive_entities(text));
  std::set<std::string> unique(a.begin(), a.end());
  EXPECT_EQ(unique.size(), a.size());
}

// parse_corpus

TEST(ParseCorpus, EmptyInputIsEmptyCorpus) {
  const auto c = parse_corpus_text("");
  EXPECT_EQ(c.size(), 0u);
  EXPECT_EQ(c.num_classes, 0);
}

TEST(ParseCorpus, SixClassFixtureHasSixClasses) {
  const auto c = parse_corpus(kFixtures / "six_classes.jsonl");
  EXPECT_EQ(c.size(), 12u);
  EXPECT_EQ(c.num_classes, 6);
}

TEST(ParseCorpus, DerivesEntitiesWhenAbsentAndKeepsGivenOnes) {
  const auto c = parse_corpus_text(
      R"({"id":"a","text":"fire in #Sydney near Bondi Beach","user_id":"u","timestamp":1})"
      "\n"
      R"({"id":"b","text":"Anything","user_id":"u","timestamp":2,"entities":[]})");
  EXPECT_EQ(c.messages[0].entities, (Strings{"Sydney", "Bondi Beach"}));
  EXPECT_TRUE(c.messages[1].entities.empty());
}

TEST(ParseCorpus, DuplicateIdCitesBothLines) {
  const std::string text =
      R"({"id":"m1","text":"a","user_id":"u","timestamp":1})"
      "\n\n"
      R"({"id":"m1","text":"b","user_id":"u","timestamp":2})";
  try {
    parse_corpus_text(text);
    FAIL();
  } catch (const CorpusError& e) {
    ASSERT_EQ(e.issues().size(), 1u);
    EXPECT_EQ(e.issues()[0].line, 3u);
    EXPECT_NE(e.issues()[0].message.find("line 1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(ParseCorpus, CollectsLineNumberedIssues) {
  const std::string text =
      R"({"id":"a","text":"x","user_id":"u","timestamp":1})"
      "\n"
      "not json\n"
      R"({"id":"b","text":"x","user_id":"u"})"
      "\n"
      R"({"id":"c","text":"x","user_id":"u","timestamp":3,"label":-1})"
      "\n"
      R"({"id":"d","text":"x","user_id":"u","timestamp":4,"origin":{"strategy":"paraphrase","source_id":"zz"}})";
  try {
    parse_corpus_text(text);
    FAIL();
  } catch (const CorpusError& e) {
    std::vector<std::size_t> lines;
    for (const auto& i : e.issues()) lines.push_back(i.line);
    EXPECT_EQ(lines, (std::vector<std::size_t>{2, 3, 4, 5}));
  }
}

TEST(ParseCorpus, AugmentedMustPointAtOriginal) {
  const std::string ok =
      R"({"id":"a","text":"x","user_id":"u","timestamp":1,"label":0})"
      "\n"
      R"({"id":"a~p","text":"y","user_id":"u","timestamp":1,"label":0,"origin":{"strategy":"paraphrase","source_id":"a"}})";
  EXPECT_NO_THROW(parse_corpus_text(ok));
  const std::string chained = ok + "\n" +
                              R"({"id":"a~p~p","text":"z","user_id":"u","timestamp":1,"origin":{"strategy":"paraphrase","source_id":"a~p"}})";
  EXPECT_THROW(parse_corpus_text(chained), CorpusError);
}

TEST(ParseCorpus, RoundTripThroughWriter) {
  Corpus c;
  for (int i = 0; i < 6; ++i) {
    Message m;
    m.id = "id" + std::to_string(i);
    m.text = "Text \"quoted\" é " + std::to_string(i);
    m.user_id = "u" + std::to_string(i % 2);
    m.timestamp = -5 + 1000LL * i;
    m.entities = {"E" + std::to_string(i)};
    if (i % 2) m.location = "City " + std::to_string(i);
    if (i != 3) m.label = i % 3;
    c.messages.push_back(m);
  }
  Message aug = c.messages[0];
  aug.id = "id0~x";
  aug.origin = AugmentedFrom{"paraphrase", "id0"};
  c.messages.push_back(aug);
  c.finalize();
  const auto dir = fs::temp_directory_path() / "eventaug_ingest_rt";
  fs::create_directories(dir);
  write_corpus(c, dir / "c.jsonl");
  const auto back = parse_corpus(dir / "c.jsonl");
  EXPECT_EQ(back.messages, c.messages);
  EXPECT_EQ(back.num_classes, 3);
}

TEST(ParseCorpus, MissingFileIsIoError) {
  EXPECT_THROW(parse_corpus("/nonexistent/corpus.jsonl"), IoError);
}

// attach_embeddings

Corpus three_messages() {
  return parse_corpus_text(
      R"({"id":"a","text":"x","user_id":"u","timestamp":1})"
      "\n"
      R"({"id":"b","text":"x","user_id":"u","timestamp":2})"
      "\n"
      R"({"id":"c","text":"x","user_id":"u","timestamp":3})");
}

TEST(AttachEmbeddings, ReordersShuffledRowsToCorpusOrder) {
  EmbeddingMatrix emb(2, {"c", "a", "b"}, {3, 3, 1, 1, 2, 2});
  const auto aligned = attach_embeddings(three_messages(), emb);
  EXPECT_EQ(aligned.embeddings.ids(), (Strings{"a", "b", "c"}));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(aligned.embeddings.at(i, 1), static_cast<float>(i + 1));
}

TEST(AttachEmbeddings, MissingIdIsNamed) {
  EmbeddingMatrix emb(2, {"c", "a"}, {3, 3, 1, 1});
  try {
    attach_embeddings(three_messages(), emb);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find(" b"), std::string::npos);
  }
}

TEST(AttachEmbeddings, ListsAtMostTenMissingIds) {
  Corpus c;
  for (int i = 0; i < 15; ++i) c.messages.push_back({"m" + std::to_string(i), "t", "u", i, {}, {}, {}, {}});
  c.finalize();
  EmbeddingMatrix emb(1, {"other"}, {0.0f});
  try {
    attach_embeddings(c, emb);
    FAIL();
  } catch (const ValidationError& e) {
    const std::string w = e.what();
    EXPECT_NE(w.find("15 message id(s)"), std::string::npos);
    EXPECT_NE(w.find("m9"), std::string::npos);
    EXPECT_EQ(w.find("m10"), std::string::npos);
  }
}

TEST(AttachEmbeddings, RejectsZeroDimAndKeeps768) {
  EXPECT_THROW(attach_embeddings(three_messages(), EmbeddingMatrix(0, {"a", "b", "c"}, {})), DimensionError);
  EmbeddingMatrix wide(3, 768);
  wide.ids() = {"a", "b", "c"};
  EXPECT_EQ(attach_embeddings(three_messages(), wide).embeddings.dim(), 768u);
}

// Temporal and location features

TEST(TemporalFeatures, DaysAndSecondsAreMinMaxScaled) {
  Corpus c;
  // day 0 at 06:00, day 2 at 18:00, day 1 at 00:00
  c.messages.push_back({"a", "t", "u", 6 * 3600, {}, {}, {}, {}});
  c.messages.push_back({"b", "t", "u", 2 * 86400 + 18 * 3600, {}, {}, {}, {}});
  c.messages.push_back({"c", "t", "u", 86400, {}, {}, {}, {}});
  const auto f = temporal_features(c);
  // days since earliest (06:00 day 0): 0, 2, 0 -> 0, 1, 0
  EXPECT_DOUBLE_EQ(f[0][0], 0.0);
  EXPECT_DOUBLE_EQ(f[1][0], 1.0);
  EXPECT_DOUBLE_EQ(f[2][0], 0.0);
  // seconds of day: 21600, 64800, 0 -> 1/3, 1, 0
  EXPECT_DOUBLE_EQ(f[0][1], 21600.0 / 64800.0);
  EXPECT_DOUBLE_EQ(f[1][1], 1.0);
  EXPECT_DOUBLE_EQ(f[2][1], 0.0);
}

TEST(TemporalFeatures, ConstantColumnsScaleToZero) {
  Corpus c;
  c.messages.push_back({"a", "t", "u", 100, {}, {}, {}, {}});
  c.messages.push_back({"b", "t", "u", 100, {}, {}, {}, {}});
  for (const auto& r : temporal_features(c)) {
    EXPECT_EQ(r[0], 0.0);
    EXPECT_EQ(r[1], 0.0);
  }
}

TEST(LocationFeatures, StableUnitPairAndZerosWhenAbsent) {
  const auto a = location_features(std::string("Kuwait City"));
  EXPECT_EQ(a, location_features(std::string("Kuwait City")));
  for (double v : a) {
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
  EXPECT_NE(a, location_features(std::string("Jakarta")));
  EXPECT_EQ(location_features(std::nullopt), (std::array<double, 2>{0.0, 0.0}));
}

// Hashing encoder fallback

TEST(HashingEncoder, DeterministicUnitNorm) {
  HashingEncoder enc(64);
  const auto a = enc.encode("Storm hits Miami");
  EXPECT_EQ(a, enc.encode("storm HITS miami"));
  double n = 0.0;
  for (float v : a) n += double(v) * v;
  EXPECT_NEAR(n, 1.0, 1e-6);
  const auto z = enc.encode("");
  EXPECT_TRUE(std::all_of(z.begin(), z.end(), [](float v) { return v == 0.0f; }));
}

}  // namespace
}  // namespace eventaug
