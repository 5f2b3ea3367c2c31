// Copyright 2026 The ClozeForge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "clozeforge/model.hpp"
#include "clozeforge/ngram_index.hpp"
#include "clozeforge/ops.hpp"
#include "clozeforge/rng.hpp"
#include "clozeforge/sampler.hpp"

using namespace clozeforge;

namespace {

std::vector<Tokens> random_corpus(std::size_t tokens, std::size_t words, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Tokens> out;
  std::size_t total = 0;
  while (total < tokens) {
    Tokens p(50 + uniform_index(rng, 200));
    for (auto& t : p) t = "w" + std::to_string(uniform_index(rng, words));
    total += p.size();
    out.push_back(std::move(p));
  }
  return out;
}

void BM_NgramBuild(benchmark::State& state) {
  const auto corpus = random_corpus(static_cast<std::size_t>(state.range(0)), 2000, 1);
  for (auto _ : state) {
    auto idx = NgramIndex::build(corpus, 5, 1, 1);
    benchmark::DoNotOptimize(idx.total_tokens());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NgramBuild)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_GruForwardBackward(benchmark::State& state) {
  const std::size_t H = static_cast<std::size_t>(state.range(0));
  const std::size_t steps = 80, batch = 32;
  ModelConfig c;
  c.hidden_units = H;
  c.embedding_dim = H;
  MpNet model(c, Vocab::build(std::vector<Tokens>{{"w"}}), 2);
  std::mt19937_64 rng(3);
  Tensor x({steps * batch, H});
  for (auto& v : x.values()) v = uniform01(rng) - 0.5;
  for (auto _ : state) {
    Graph g(Mode::train, 4);
    const auto w = mpnet::gru_vars(g, model.params(), "ctx_fwd");
    const auto states = mpnet::gru(g, w, g.constant(x), steps, batch, false);
    const Var loss = ops::sum(g, states.back());
    g.backward(loss);
    benchmark::DoNotOptimize(g.value(loss)[0]);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(steps * batch));
}
BENCHMARK(BM_GruForwardBackward)->Arg(16)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_SamplerGenerate(benchmark::State& state) {
  const auto passages = random_corpus(static_cast<std::size_t>(state.range(0)), 500, 5);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < passages.size(); ++i) ids.push_back("p" + std::to_string(i));
  std::vector<std::string> entries;
  for (int i = 0; i < 100; ++i) entries.push_back("w" + std::to_string(i));
  const CandidateVocab vocab(entries);
  FrequencyTable labeled;
  labeled.counts.assign(entries.size(), 1);
  labeled.total = entries.size();
  const PositiveTable pos = build_positive_table(labeled, count_unlabeled(passages, vocab), 0.5);
  const CooccurrenceTable cooc(entries.size(), 0.1);
  GenerationOptions opt;
  for (auto _ : state) {
    auto qs = generate_examples(passages, ids, vocab, pos, cooc, opt);
    benchmark::DoNotOptimize(qs.size());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SamplerGenerate)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
