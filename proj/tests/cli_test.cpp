// Copyright 2026 The eventaug Authors.
//
// SPDX-License-Identifier: Apache-2.0

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "eventaug/corpus.hpp"
#include "eventaug/embedding_io.hpp"

namespace eventaug {
namespace {

namespace fs = std::filesystem;
const fs::path kCli = EVENTAUG_CLI_PATH;
const fs::path kFixtures = EVENTAUG_FIXTURE_DIR;

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("eventaug_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  RunResult run(const std::vector<std::string>& args) {
    std::string cmd = quote(kCli.string());
    for (const auto& a : args) cmd += " " + quote(a);
    const auto out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    cmd += " >" + quote(out.string()) + " 2>" + quote(err.string());
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  // 60 messages in three classes with disjoint vocabularies and users.
  fs::path separable_corpus() {
    const char* words[3][4] = {{"flood", "river", "rain", "levee"},
                               {"wildfire", "smoke", "blaze", "embers"},
                               {"earthquake", "tremor", "aftershock", "rubble"}};
    Corpus c;
    for (int i = 0; i < 60; ++i) {
      const int k = i % 3;
      Message m;
      m.id = "p" + std::to_string(i);
      m.text = std::string(words[k][0]) + " " + words[k][1 + i % 3] + " " + words[k][(i / 3) % 4] + " update";
      m.user_id = "u" + std::to_string(k) + "_" + std::to_string(i % 2);
      m.timestamp = 1700000000 + 600LL * i;
      m.label = k;
      c.messages.push_back(m);
    }
    c.finalize();
    const auto p = path("separable.jsonl");
    write_corpus(c, p);
    return p;
  }

  fs::path dir_;
};

// augment-text

TEST_F(CliTest, AugmentTextWithEchoMockAndWarmCache) {
  const auto corpus = kFixtures / "six_classes.jsonl";
  auto r = run({"augment-text", "--corpus", corpus.string(), "--out", path("a").string(), "--mock"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("originals=12 generated=12 skipped=0 cache_hits=0 provider_calls=12"), std::string::npos)
      << r.out;
  const auto augmented = parse_corpus(path("a") / "augmented.jsonl");
  EXPECT_EQ(augmented.size(), 24u);
  EXPECT_TRUE(fs::exists(path("a") / "skipped.jsonl"));
  EXPECT_TRUE(fs::exists(path("a") / "resolved-config.json"));
  const auto first = slurp(path("a") / "augmented.jsonl");

  r = run({"augment-text", "--corpus", corpus.string(), "--out", path("a").string(), "--mock", "echo"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("cache_hits=12 provider_calls=0"), std::string::npos) << r.out;
  EXPECT_EQ(slurp(path("a") / "augmented.jsonl"), first);
}

TEST_F(CliTest, AugmentTextWithTwoStrategies) {
  const auto r = run({"augment-text", "--corpus", (kFixtures / "graph5.jsonl").string(), "--out",
                      path("b").string(), "--mock", "--strategy", "keep-entity", "--strategy", "paraphrase"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(parse_corpus(path("b") / "augmented.jsonl").size(), 15u);
  const auto cfg = nlohmann::json::parse(slurp(path("b") / "resolved-config.json"));
  EXPECT_EQ(cfg["augment"]["strategies"], nlohmann::json({"keep-entity", "paraphrase"}));
}

TEST_F(CliTest, ProviderExhaustionExitsThree) {
  std::ofstream(path("dead.ini")) << "[augment]\nendpoint = http://127.0.0.1:9/v1/chat/completions\n"
                                     "max_retries = 0\n";
  const auto r = run({"augment-text", "--config", path("dead.ini").string(), "--corpus",
                      (kFixtures / "graph5.jsonl").string(), "--out", path("c").string()});
  EXPECT_EQ(r.code, 3) << r.out << r.err;
  EXPECT_NE(r.out.find("generated=0 skipped=5"), std::string::npos) << r.out;
  const auto skipped = slurp(path("c") / "skipped.jsonl");
  EXPECT_EQ(std::count(skipped.begin(), skipped.end(), '\n'), 5);
}

// fuse

TEST_F(CliTest, FuseAddsTemporalDimsAndIsByteReproducible) {
  const auto corpus = (kFixtures / "graph5.jsonl").string();
  const std::vector<float> data(5 * 4, 0.25f);
  write_embeddings(EmbeddingMatrix(4, {"m1", "m2", "m3", "m4", "m5"}, data), path("raw.sedemb"));
  for (const char* out : {"f1", "f2"}) {
    const auto r = run({"fuse", "--corpus", corpus, "--embeddings", path("raw.sedemb").string(), "--out",
                        path(out).string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  const auto fused = read_embeddings(path("f1") / "fused.sedemb");
  EXPECT_EQ(fused.dim(), 6u);
  EXPECT_EQ(fused.rows(), 5u);
  EXPECT_EQ(slurp(path("f1") / "fused.sedemb"), slurp(path("f2") / "fused.sedemb"));
  const auto stats = nlohmann::json::parse(slurp(path("f1") / "graph-stats.json"));
  EXPECT_EQ(stats["nodes"]["message"], 5);
  EXPECT_EQ(stats["nodes"]["user"], 3);
  EXPECT_EQ(stats["nodes"]["entity"], 4);
  EXPECT_EQ(stats["edges"]["mentions"], 6);
}

TEST_F(CliTest, FuseWithoutEmbeddingsOrEncoderIsConfigError) {
  const auto r = run({"fuse", "--corpus", (kFixtures / "graph5.jsonl").string(), "--out", path("x").string()});
  EXPECT_EQ(r.code, 2);
}

// train, eval, ratio-study, diagnose

TEST_F(CliTest, TrainSeparableCorpusThenEval) {
  const auto corpus = separable_corpus().string();
  ASSERT_EQ(run({"fuse", "--corpus", corpus, "--encoder", "hashing", "--encoder-dim", "64", "--out",
                 path("fused").string()})
                .code,
            0);
  const auto fused = (path("fused") / "fused.sedemb").string();
  auto r = run({"train", "--corpus", corpus, "--embeddings", fused, "--epochs", "60", "--out", path("t1").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("micro_f1=1.0000"), std::string::npos) << r.out;
  ASSERT_EQ(run({"train", "--corpus", corpus, "--embeddings", fused, "--epochs", "60", "--out",
                 path("t2").string()})
                .code,
            0);
  EXPECT_EQ(slurp(path("t1") / "report.json"), slurp(path("t2") / "report.json"));
  EXPECT_EQ(slurp(path("t1") / "model.sedmdl"), slurp(path("t2") / "model.sedmdl"));

  r = run({"eval", "--corpus", corpus, "--embeddings", fused, "--model", (path("t1") / "model.sedmdl").string(),
           "--out", path("e").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = nlohmann::json::parse(slurp(path("e") / "eval-report.json"));
  EXPECT_EQ(report["micro_f1"], 1.0);
}

TEST_F(CliTest, ProfileResolvesImplicitSettings) {
  const auto corpus = separable_corpus().string();
  ASSERT_EQ(run({"fuse", "--corpus", corpus, "--encoder", "hashing", "--out", path("fused").string()}).code, 0);
  const auto r = run({"train", "--profile", "twitter2012", "--corpus", corpus, "--embeddings",
                      (path("fused") / "fused.sedemb").string(), "--epochs", "2", "--out", path("t").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto cfg = nlohmann::json::parse(slurp(path("t") / "resolved-config.json"));
  EXPECT_EQ(cfg["implicit"]["alpha"], 0.6);
  EXPECT_EQ(cfg["implicit"]["sigma"], 0.1);
  EXPECT_EQ(cfg["run"]["profile"], "twitter2012");
}

TEST_F(CliTest, RatioStudyWritesFourteenRows) {
  const auto corpus = separable_corpus().string();
  ASSERT_EQ(run({"fuse", "--corpus", corpus, "--encoder", "hashing", "--out", path("fused").string()}).code, 0);
  const auto r = run({"ratio-study", "--corpus", corpus, "--embeddings", (path("fused") / "fused.sedemb").string(),
                      "--epochs", "3", "--out", path("rs").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(path("rs") / "ratio-study.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "ratio,arm,micro_f1,macro_f1");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 15);
}

TEST_F(CliTest, DiagnoseWritesPlotsAndIdgpZeroChangesNothing) {
  EmbeddingMatrix m(50, 8);
  RngStream rng(1, 1);
  for (std::size_t i = 0; i < 50; ++i) m.ids()[i] = "d" + std::to_string(i);
  for (auto& v : m.data()) v = static_cast<float>(rng.normal());
  write_embeddings(m, path("e.sedemb"));
  auto r = run({"diagnose", "--embeddings", path("e.sedemb").string(), "--out", path("d").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"histogram.csv", "pca.csv", "moments.csv", "pca_variance.csv", "histogram.svg", "pca.svg"}) {
    EXPECT_TRUE(fs::exists(path("d") / f)) << f;
  }
  r = run({"diagnose", "--embeddings", path("e.sedemb").string(), "--method", "IDGP", "--alpha-var", "0", "--out",
           path("d0").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string header, before, after;
  std::getline(lines, header);
  std::getline(lines, before);
  std::getline(lines, after);
  auto numbers = [](const std::string& line) {
    std::istringstream in(line);
    std::string a, b;
    in >> a >> b;
    return a.substr(a.find('=')) + b.substr(b.find('='));
  };
  EXPECT_EQ(numbers(before), numbers(after));
}

// Exit codes and configuration

TEST_F(CliTest, ConfigErrorsExitTwo) {
  const auto corpus = (kFixtures / "graph5.jsonl").string();
  EXPECT_EQ(run({"fuse", "--profile", "nope", "--corpus", corpus, "--out", path("x").string()}).code, 2);
  EXPECT_EQ(run({"train", "--alpha", "abc", "--out", path("x").string()}).code, 2);
  EXPECT_EQ(run({"train", "--alpha", "1.5", "--out", path("x").string()}).code, 2);
  EXPECT_EQ(run({"train", "--out", path("x").string()}).code, 2);
  EXPECT_EQ(run({"no-such-command"}).code, 2);
  std::ofstream(path("bad.ini")) << "[implicit]\nunknown_key = 1\n";
  EXPECT_EQ(run({"fuse", "--config", path("bad.ini").string()}).code, 2);
}

TEST_F(CliTest, SingleClassTrainingExitsFour) {
  Corpus c;
  for (int i = 0; i < 10; ++i) c.messages.push_back({"o" + std::to_string(i), "same words", "u", i, {}, {}, 0, {}});
  c.finalize();
  write_corpus(c, path("one.jsonl"));
  ASSERT_EQ(run({"fuse", "--corpus", path("one.jsonl").string(), "--encoder", "hashing", "--out",
                 path("f").string()})
                .code,
            0);
  const auto r = run({"train", "--corpus", path("one.jsonl").string(), "--embeddings",
                      (path("f") / "fused.sedemb").string(), "--out", path("t").string()});
  EXPECT_EQ(r.code, 4) << r.err;
}

TEST_F(CliTest, FlagsOverrideFileOverridesProfile) {
  std::ofstream(path("run.ini")) << "[run]\nprofile = twitter2012\n\n[implicit]\nalpha = 0.2\nclip_c = 0.3\n"
                                    "\n[train]\nepochs = 7\n";
  const auto corpus = separable_corpus().string();
  ASSERT_EQ(run({"fuse", "--corpus", corpus, "--encoder", "hashing", "--out", path("fused").string()}).code, 0);
  const auto fused = (path("fused") / "fused.sedemb").string();
  auto r = run({"train", "--config", path("run.ini").string(), "--alpha", "0.9", "--corpus", corpus,
                "--embeddings", fused, "--out", path("t").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto cfg = nlohmann::json::parse(slurp(path("t") / "resolved-config.json"));
  EXPECT_EQ(cfg["implicit"]["alpha"], 0.9);   // flag
  EXPECT_EQ(cfg["implicit"]["clip_c"], 0.3);  // file
  EXPECT_EQ(cfg["implicit"]["sigma"], 0.1);   // profile
  EXPECT_EQ(cfg["train"]["epochs"], 7);

  // The snapshot reproduces the run.
  r = run({"train", "--config", (path("t") / "resolved-config.json").string(), "--out", path("t2").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("t") / "report.json"), slurp(path("t2") / "report.json"));
}

}  // namespace
}  // namespace eventaug
