// Copyright 2026 The eventaug Authors.
//
// SPDX-License-Identifier: Apache-2.0

// End-to-end walk through the library on a small synthetic corpus:
// LLM-style text augmentation with the offline hash provider, hashing
// encoder, graph fusion, and a classifier trained with and without the
// implicit mixer.

#include <cstdio>
#include <string>
#include <vector>

#include "eventaug/classifier.hpp"
#include "eventaug/corpus.hpp"
#include "eventaug/dataset.hpp"
#include "eventaug/encoder.hpp"
#include "eventaug/explicit_aug.hpp"
#include "eventaug/graph.hpp"
#include "eventaug/metrics.hpp"
#include "eventaug/perturb.hpp"

using namespace eventaug;

namespace {

Corpus synthetic_corpus() {
  const std::vector<std::vector<std::string>> events = {
      {"Flooding closes roads in #Brisbane after heavy rain", "River Brisbane bursts its banks tonight",
       "Rain keeps falling on Brisbane, more roads shut"},
      {"Huge crowd at the Final in Madrid tonight", "Madrid celebrates as Real Madrid lift the cup",
       "Fans flood the streets of Madrid after the Final"},
      {"Earthquake shakes Lima this morning", "Buildings evacuated in Lima after the quake",
       "Aftershocks felt across Peru near Lima"},
  };
  Corpus corpus;
  RngStream rng(11, 0);
  std::int64_t t = 1'700'000'000;
  for (int copy = 0; copy < 8; ++copy) {
    for (int label = 0; label < static_cast<int>(events.size()); ++label) {
      for (std::size_t k = 0; k < events[label].size(); ++k) {
        Message m;
        m.id = "m" + std::to_string(corpus.size());
        m.text = events[label][k] + " #" + std::to_string(copy);
        m.user_id = "u" + std::to_string(rng.uniform_index(12));
        m.timestamp = t;
        t += 600 + static_cast<std::int64_t>(rng.uniform_index(3600));
        m.entities = naive_entities(m.text);
        m.label = label;
        corpus.messages.push_back(std::move(m));
      }
    }
  }
  corpus.finalize();
  return corpus;
}

EvalReport run(const LabeledDataset& ds, bool implicit) {
  const auto split = partition(ds, SplitSpec{});
  const auto x = ds.features.select(split.train);
  const auto y = ds.labels_of(split.train);
  TrainConfig tc;
  tc.epochs = 50;
  if (implicit) {
    PerturbationConfig pc;
    pc.method = Method::GP;
    pc.alpha = 0.6;
    pc.sigma = 0.05;
    tc.implicit = pc;
  }
  const auto stats = dataset_std(x);
  const auto model = train(x, y, ds.num_classes, tc, &stats);
  const auto pred = predict(model, ds.features.select(split.test));
  return evaluate(pred.labels, ds.labels_of(split.test), ds.num_classes);
}

}  // namespace

int main() {
  const auto corpus = synthetic_corpus();
  HashMockProvider provider;
  AugmentOptions options;
  options.train_only = SplitSpec{};
  const auto augmented = augment_corpus(
      corpus, {Strategy{StrategyKind::Paraphrase}, Strategy{StrategyKind::KeepEntity}}, provider, options);
  std::printf("originals=%zu generated=%zu skipped=%zu\n", augmented.originals, augmented.generated,
              augmented.skipped.size());
  if (augmented.corpus.size() > augmented.originals) {
    const auto& v = augmented.corpus.messages[augmented.originals];
    std::printf("example variant %s: %s\n", v.id.c_str(), v.text.c_str());
  }

  const HashingEncoder encoder(256);
  const auto graph = build_graph(augmented.corpus);
  const auto fused = fuse(graph, encoder.encode_corpus(augmented.corpus), augmented.corpus);
  std::printf("graph: %zu messages, %zu users, %zu entities, fused dim %zu\n", graph.num_messages(),
              graph.num_users(), graph.num_entities(), fused.dim());

  const auto ds = make_labeled_dataset(augmented.corpus, fused);
  for (bool implicit : {false, true}) {
    const auto r = run(ds, implicit);
    std::printf("%-12s micro_f1=%.4f macro_f1=%.4f\n", implicit ? "implicit" : "no-implicit", r.micro_f1,
                r.macro_f1);
  }
  return 0;
}
