// Copyright 2026 The eventaug Authors.
//
// SPDX-License-Identifier: Apache-2.0

// eventaug: command-line front end for the augmentation pipeline.
//
//   eventaug <command> [--config FILE] [--profile NAME] [--seed N] [--out DIR]
//            [--mock [echo|hash]] [setting flags...]
//
// Setting flags override the config file, which overrides the profile.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eventaug/commands.hpp"
#include "eventaug/config.hpp"

namespace {

struct FlagBinding {
  std::string key;
  std::string value;
  std::vector<std::string> values;
  CLI::Option* option = nullptr;
  bool is_list = false;
};

}  // namespace

int main(int argc, char** argv) {
  using namespace eventaug;
  CLI::App app{"Explicit and implicit data augmentation for social event detection"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::string> config_path;
  app.add_option("--config", config_path, "INI or JSON config file");

  std::vector<std::unique_ptr<FlagBinding>> bindings;
  auto setting = [&](const std::string& flag, const std::string& key, const std::string& help) {
    auto b = std::make_unique<FlagBinding>();
    b->key = key;
    b->option = app.add_option(flag, b->value, help + " [" + key + "]");
    bindings.push_back(std::move(b));
  };
  auto list_setting = [&](const std::string& flag, const std::string& key, const std::string& help) {
    auto b = std::make_unique<FlagBinding>();
    b->key = key;
    b->is_list = true;
    b->option = app.add_option(flag, b->values, help + " (repeatable) [" + key + "]");
    bindings.push_back(std::move(b));
  };

  setting("--profile", "run.profile", "kawarith6, twitter2012, twitter2018 or custom");
  setting("--seed", "run.seed", "Seed for splits, training and perturbation");
  setting("--out", "run.out", "Output directory");
  setting("--corpus", "data.corpus", "Corpus JSONL");
  setting("--embeddings", "data.embeddings", "SEDEMB01 embeddings (fused ones after fuse)");
  setting("--model", "data.model", "SEDMDL01 model for eval");
  setting("--encoder", "data.encoder", "Built-in text encoder when no embeddings are given");
  setting("--encoder-dim", "data.encoder_dim", "Dimension of the built-in encoder");
  setting("--train-ratio", "split.train", "Training fraction");
  setting("--val-ratio", "split.val", "Validation fraction");
  setting("--test-ratio", "split.test", "Test fraction");
  list_setting("--strategy", "augment.strategies", "Explicit augmentation strategy");
  setting("--copies", "augment.copies", "Variants per strategy and message");
  setting("--cache-dir", "augment.cache_dir", "Response cache directory");
  setting("--endpoint", "augment.endpoint", "Chat-completion endpoint URL");
  setting("--llm-model", "augment.model", "Provider model name");
  setting("--max-tokens", "augment.max_tokens", "Provider max_tokens");
  setting("--max-in-flight", "augment.max_in_flight", "Concurrent provider requests");
  setting("--method", "implicit.method", "GP, PGP, IDGP, CGP or FDP");
  setting("--alpha", "implicit.alpha", "Mixer threshold");
  setting("--sigma", "implicit.sigma", "Noise standard deviation");
  setting("--clip-c", "implicit.clip_c", "CGP bound");
  setting("--alpha-var", "implicit.alpha_var", "IDGP variance control");
  setting("--keep-ratio", "implicit.keep_ratio", "FDP keep ratio");
  setting("--noise-level", "implicit.noise_level", "FDP noise level");
  setting("--fdp-mode", "implicit.fdp_mode", "high, low or band");
  setting("--epochs", "train.epochs", "Training epochs");
  setting("--batch-size", "train.batch_size", "Mini-batch size");
  setting("--lr", "train.learning_rate", "Learning rate");
  setting("--threads", "train.threads", "Gradient threads");
  list_setting("--ratio", "study.ratios", "Training ratio for ratio-study");
  setting("--bins", "diagnose.bins", "Histogram bins");

  std::vector<std::string> mock;
  auto* mock_opt = app.add_option("--mock", mock, "Offline provider: echo (default) or hash")->expected(0, 1);
  bool train_only = false;
  app.add_flag("--train-only", train_only, "Augment training-split messages only");
  bool no_implicit = false;
  app.add_flag("--no-implicit", no_implicit, "Disable the implicit augmentation mixer");

  std::string command;
  for (const auto& name : command_names()) {
    app.add_subcommand(name)->callback([&command, name] { command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  ConfigOverrides flags;
  for (const auto& b : bindings) {
    if (b->option->count() == 0) continue;
    if (b->is_list) {
      std::string joined;
      for (const auto& v : b->values) joined += (joined.empty() ? "" : ",") + v;
      flags.emplace_back(b->key, joined);
    } else {
      flags.emplace_back(b->key, b->value);
    }
  }
  if (mock_opt->count() > 0) {
    flags.emplace_back("augment.mock", mock.empty() || mock.front().empty() ? "echo" : mock.front());
  }
  if (train_only) flags.emplace_back("augment.train_only", "true");
  if (no_implicit) flags.emplace_back("train.implicit", "false");

  RunConfig config;
  try {
    config = resolve_config(config_path ? std::optional<std::filesystem::path>(*config_path) : std::nullopt,
                            flags);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return run_command(command, config, std::cout, std::cerr);
}
