// Copyright 2026 The eventaug Authors.
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Pipeline commands. Each takes a resolved RunConfig, writes its outputs
// and resolved-config.json under config.out_dir, and reports to `out`.
//
//   augment-text  corpus                -> augmented.jsonl, skipped.jsonl
//   fuse          corpus + embeddings   -> fused.sedemb, graph-stats.json
//   train         corpus + fused        -> model.sedmdl, report.json
//   eval          corpus + fused + model-> eval-report.json
//   ratio-study   corpus + fused        -> ratio-study.csv
//   diagnose      fused                 -> histogram/pca/moments CSV + SVG
//
// run_command() maps failures to exit codes: 2 configuration, 3 provider
// exhaustion, 4 degenerate data, 1 anything else.

#include <cstdio>
#include <filesystem>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eventaug/classifier.hpp"
#include "eventaug/config.hpp"
#include "eventaug/corpus.hpp"
#include "eventaug/dataset.hpp"
#include "eventaug/diagnostics.hpp"
#include "eventaug/embedding_io.hpp"
#include "eventaug/encoder.hpp"
#include "eventaug/error.hpp"
#include "eventaug/explicit_aug.hpp"
#include "eventaug/graph.hpp"
#include "eventaug/http_provider.hpp"
#include "eventaug/metrics.hpp"
#include "eventaug/perturb.hpp"
#include "eventaug/ratio_study.hpp"

namespace eventaug {

enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitConfig = 2,
  kExitProvider = 3,
  kExitDegenerate = 4,
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"augment-text", "fuse",        "train",
                                                 "eval",         "ratio-study", "diagnose"};
  return names;
}

namespace detail {

inline std::string require_path(const std::string& value, const char* key) {
  if (value.empty()) throw ConfigError(std::string("missing required setting ") + key);
  return value;
}

inline std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::unique_ptr<Provider> make_provider(const RunConfig& c) {
  if (c.mock == "echo") return std::make_unique<EchoProvider>();
  if (c.mock == "hash") return std::make_unique<HashMockProvider>();
  try {
    return std::make_unique<HttpProvider>(c.provider);
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
}

/// Labeled dataset from a corpus and the fused embeddings of its messages.
inline LabeledDataset load_labeled(const RunConfig& c) {
  auto corpus = parse_corpus(require_path(c.corpus_path, "data.corpus"));
  const auto fused = read_embeddings(require_path(c.embeddings_path, "data.embeddings"));
  auto aligned = attach_embeddings(std::move(corpus), fused);
  return make_labeled_dataset(aligned.corpus, aligned.embeddings);
}

}  // namespace detail

inline int cmd_augment_text(const RunConfig& c, std::ostream& out) {
  const auto corpus = parse_corpus(detail::require_path(c.corpus_path, "data.corpus"));
  const std::filesystem::path dir = c.out_dir;
  write_resolved_config(c, dir);
  auto provider = detail::make_provider(c);

  AugmentOptions options;
  options.copies_per_strategy = c.copies;
  options.max_in_flight = c.provider.max_in_flight;
  if (c.train_only) options.train_only = c.split;
  options.cache_dir = c.cache_dir.empty() ? dir / "cache" : std::filesystem::path(c.cache_dir);
  const auto result = augment_corpus(corpus, c.strategies, *provider, options);

  write_corpus(result.corpus, dir / "augmented.jsonl");
  std::string skipped;
  std::size_t provider_failures = 0;
  for (const auto& s : result.skipped) {
    static constexpr const char* kReason[] = {"provider", "rejected", "invalid"};
    provider_failures += s.reason == SkipRecord::Reason::Provider ? 1 : 0;
    nlohmann::ordered_json j = {{"source_id", s.source_id},
                                {"strategy", s.strategy},
                                {"copy", s.copy},
                                {"reason", kReason[static_cast<int>(s.reason)]},
                                {"detail", s.detail}};
    skipped += j.dump() + "\n";
  }
  detail::write_file_bytes(dir / "skipped.jsonl", skipped);

  out << "originals=" << result.originals << " generated=" << result.generated
      << " skipped=" << result.skipped.size() << " cache_hits=" << result.cache_hits
      << " provider_calls=" << result.provider_calls << "\n";
  if (provider_failures > 0 && result.generated == 0) {
    throw ProviderError("every provider request failed (" + std::to_string(provider_failures) + ")");
  }
  return kExitOk;
}

inline int cmd_fuse(const RunConfig& c, std::ostream& out) {
  auto corpus = parse_corpus(detail::require_path(c.corpus_path, "data.corpus"));
  const std::filesystem::path dir = c.out_dir;
  write_resolved_config(c, dir);
  EmbeddingMatrix raw;
  if (!c.embeddings_path.empty()) {
    raw = read_embeddings(c.embeddings_path);
  } else if (c.encoder == "hashing") {
    raw = HashingEncoder(c.encoder_dim).encode_corpus(corpus);
  } else {
    throw ConfigError("fuse needs data.embeddings or data.encoder=hashing");
  }
  auto aligned = attach_embeddings(std::move(corpus), raw);
  const auto graph = build_graph(aligned.corpus);
  const auto fused = fuse(graph, aligned.embeddings, aligned.corpus, c.fusion);
  write_embeddings(fused, dir / "fused.sedemb");
  detail::write_file_bytes(dir / "graph-stats.json", graph.stats_json().dump(2) + "\n");
  out << "messages=" << fused.rows() << " dim=" << fused.dim() << " users=" << graph.num_users()
      << " entities=" << graph.num_entities() << "\n";
  return kExitOk;
}

inline int cmd_train(const RunConfig& c, std::ostream& out) {
  const auto ds = detail::load_labeled(c);
  const std::filesystem::path dir = c.out_dir;
  write_resolved_config(c, dir);
  const auto split = partition(ds, c.split, /*include_augmented=*/true);
  const auto x = ds.features.select(split.train);
  const auto y = ds.labels_of(split.train);
  std::optional<DatasetStats> stats;
  if (c.train.implicit) stats = dataset_std(x);
  std::vector<double> losses;
  auto model = train(x, y, ds.num_classes, c.train, stats ? &*stats : nullptr, &losses);

  nlohmann::ordered_json report;
  report["rows"] = {{"train", split.train.size()}, {"val", split.val.size()}, {"test", split.test.size()}};
  report["implicit"] = c.train.implicit.has_value();
  report["final_loss"] = losses.empty() ? 0.0 : losses.back();
  if (!split.val.empty()) {
    const auto pv = predict(model, ds.features.select(split.val));
    report["val"] = evaluate(pv.labels, ds.labels_of(split.val), ds.num_classes).to_json();
  }
  const auto pt = predict(model, ds.features.select(split.test));
  const auto test = evaluate(pt.labels, ds.labels_of(split.test), ds.num_classes);
  report["test"] = test.to_json();

  write_model(model, dir / "model.sedmdl");
  detail::write_file_bytes(dir / "report.json", report.dump(2) + "\n");
  out << "micro_f1=" << detail::fixed(test.micro_f1, 4) << " macro_f1=" << detail::fixed(test.macro_f1, 4)
      << " train_rows=" << split.train.size() << " test_rows=" << split.test.size() << "\n";
  return kExitOk;
}

inline int cmd_eval(const RunConfig& c, std::ostream& out) {
  const auto ds = detail::load_labeled(c);
  const auto model = read_model(detail::require_path(c.model_path, "data.model"));
  const std::filesystem::path dir = c.out_dir;
  write_resolved_config(c, dir);
  const auto split = partition(ds, c.split, /*include_augmented=*/false);
  const auto pred = predict(model, ds.features.select(split.test));
  const auto report = evaluate(pred.labels, ds.labels_of(split.test), static_cast<int>(model.num_classes));
  detail::write_file_bytes(dir / "eval-report.json", report.to_json().dump(2) + "\n");
  out << "micro_f1=" << detail::fixed(report.micro_f1, 4)
      << " macro_f1=" << detail::fixed(report.macro_f1, 4) << " test_rows=" << split.test.size() << "\n";
  return kExitOk;
}

inline int cmd_ratio_study(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const auto ds = detail::load_labeled(c);
  const std::filesystem::path dir = c.out_dir;
  write_resolved_config(c, dir);
  RatioStudyConfig rc;
  rc.ratios = c.ratios;
  rc.split = c.split;
  rc.train = c.train;
  rc.implicit = c.perturb;
  rc.subsample_seed = c.subsample_seed;
  const auto result = ratio_study(ds, rc);
  for (const auto& w : result.warnings) err << "warning: " << w << "\n";
  const auto csv = result.to_csv();
  detail::write_file_bytes(dir / "ratio-study.csv", csv);
  out << csv;
  return kExitOk;
}

inline int cmd_diagnose(const RunConfig& c, std::ostream& out) {
  const auto before = read_embeddings(detail::require_path(c.embeddings_path, "data.embeddings"));
  const std::filesystem::path dir = c.out_dir;
  write_resolved_config(c, dir);
  PerturbationConfig pc = c.perturb;
  pc.alpha = 1.0;
  const auto stats = dataset_std(before);
  RngStream rng(c.seed, 3);
  const auto after = mix(before, pc, &stats, rng);
  const auto files = export_plots(before, after, dir, c.bins);
  const auto m = moments(before, after, /*pooled=*/true);
  out << "method=" << to_string(pc.method) << " rows=" << before.rows() << " dim=" << before.dim() << "\n"
      << "mean_before=" << detail::fixed(m.mean_before[0]) << " std_before=" << detail::fixed(m.std_before[0])
      << "\n"
      << "mean_after=" << detail::fixed(m.mean_after[0]) << " std_after=" << detail::fixed(m.std_after[0])
      << "\n"
      << "files=" << files.csv.size() + files.svg.size() << "\n";
  return kExitOk;
}

/// Runs one command and maps errors to exit codes; messages go to `err`.
inline int run_command(const std::string& name, const RunConfig& c, std::ostream& out, std::ostream& err) {
  try {
    if (name == "augment-text") return cmd_augment_text(c, out);
    if (name == "fuse") return cmd_fuse(c, out);
    if (name == "train") return cmd_train(c, out);
    if (name == "eval") return cmd_eval(c, out);
    if (name == "ratio-study") return cmd_ratio_study(c, out, err);
    if (name == "diagnose") return cmd_diagnose(c, out);
    throw ConfigError("unknown command '" + name + "'");
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ProviderError& e) {
    err << "provider error: " << e.what() << "\n";
    return kExitProvider;
  } catch (const DegenerateDataError& e) {
    err << "degenerate data: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitOther;
  }
}

}  // namespace eventaug
