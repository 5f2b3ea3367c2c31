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

#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"

#include "clozeforge/cloth.hpp"
#include "clozeforge/errors.hpp"
#include "clozeforge/sampler.hpp"

using namespace clozeforge;

namespace {

Question make_question(std::vector<std::string> options, std::size_t answer) {
  Question q;
  q.id = "q";
  q.context = {"x", "<BLANK>", "y"};
  q.blank_index = 1;
  for (std::size_t k = 0; k < kNumCandidates; ++k) q.candidates[k] = split_whitespace(options[k]);
  q.answer = answer;
  return q;
}

FrequencyTable table(std::vector<std::uint64_t> counts) {
  FrequencyTable t;
  t.counts = std::move(counts);
  t.total = std::accumulate(t.counts.begin(), t.counts.end(), std::uint64_t{0});
  return t;
}

// Straightforward greedy longest-match oracle over explicit token lists.
std::vector<std::uint64_t> greedy_oracle(const std::vector<Tokens>& corpus, const std::vector<Tokens>& entries) {
  std::vector<std::uint64_t> counts(entries.size(), 0);
  for (const auto& p : corpus) {
    std::size_t i = 0;
    while (i < p.size()) {
      std::size_t best = entries.size(), best_len = 0;
      for (std::size_t e = 0; e < entries.size(); ++e) {
        const auto& t = entries[e];
        if (t.size() > best_len && i + t.size() <= p.size() &&
            std::equal(t.begin(), t.end(), p.begin() + static_cast<std::ptrdiff_t>(i))) {
          best = e;
          best_len = t.size();
        }
      }
      if (best == entries.size()) {
        ++i;
      } else {
        ++counts[best];
        i += best_len;
      }
    }
  }
  return counts;
}

}  // namespace

TEST_CASE("candidate vocabulary and labeled counts") {
  std::vector<Question> qs{make_question({"finish", "win", "take", "join"}, 2)};
  auto stats = build_vocab_from_candidates(qs);
  CHECK(stats.vocab.size() == 4);
  for (auto c : stats.labeled.counts) CHECK(c == 1);

  qs.push_back(make_question({"take", "thank you", "give", "win"}, 1));
  stats = build_vocab_from_candidates(qs);
  CHECK(stats.vocab.size() == 6);
  CHECK(stats.labeled.counts[static_cast<std::size_t>(*stats.vocab.find("take"))] == 2);
  REQUIRE(stats.vocab.find("thank you"));
  CHECK(stats.vocab.tokens(*stats.vocab.find("thank you")) == Tokens{"thank", "you"});
  CHECK(stats.labeled.total == 8);

  CHECK_THROWS_AS(build_vocab_from_candidates(std::vector<Question>{}), DataError);
}

TEST_CASE("unlabeled counts use greedy longest match") {
  const CandidateVocab v({"take", "win", "join"});
  const auto t = count_unlabeled(std::vector<Tokens>{{"take", "take", "win"}}, v);
  CHECK(t.counts[static_cast<std::size_t>(*v.find("take"))] == 2);
  CHECK(t.counts[static_cast<std::size_t>(*v.find("win"))] == 1);
  CHECK(t.counts[static_cast<std::size_t>(*v.find("join"))] == 0);
  CHECK(t.total == 3);

  const CandidateVocab pv({"thank", "you", "thank you"});
  const auto pt = count_unlabeled(std::vector<Tokens>{{"i", "thank", "you", "all"}}, pv);
  CHECK(pt.counts[static_cast<std::size_t>(*pv.find("thank you"))] == 1);
  CHECK(pt.counts[static_cast<std::size_t>(*pv.find("thank"))] == 0);
  CHECK(pt.counts[static_cast<std::size_t>(*pv.find("you"))] == 0);

  const auto empty = count_unlabeled(std::vector<Tokens>{}, v);
  CHECK(empty.total == 0);
  for (auto c : empty.counts) CHECK(c == 0);

  std::mt19937_64 gen(41);
  const std::vector<std::string> words{"a", "b", "c", "d"};
  std::vector<std::string> entries{"a", "b", "a b", "b c d", "c d", "d a b c"};
  const CandidateVocab rv(entries);
  std::vector<Tokens> entry_tokens;
  for (std::size_t i = 0; i < rv.size(); ++i) entry_tokens.push_back(rv.tokens(static_cast<std::int32_t>(i)));
  std::vector<Tokens> corpus;
  for (int p = 0; p < 50; ++p) {
    Tokens t;
    for (int i = 0; i < 40; ++i) t.push_back(words[gen() % words.size()]);
    corpus.push_back(t);
  }
  CHECK(count_unlabeled(corpus, rv).counts == greedy_oracle(corpus, entry_tokens));
}

TEST_CASE("positive table worked values") {
  auto p = build_positive_table(table({10, 30}), table({100, 100}), 0.5);
  CHECK(std::abs(p.p[0] - 0.25) < 1e-12);
  CHECK(std::abs(p.p[1] - 0.75) < 1e-12);
  CHECK(p.capped == 0);

  p = build_positive_table(table({50, 50}), table({10, 190}), 0.5);
  CHECK(p.p[0] == 1.0);
  CHECK(std::abs(p.p[1] - 50.0 / 190.0) < 1e-12);
  CHECK(p.capped == 1);

  p = build_positive_table(table({3, 6, 9}), table({30, 60, 90}), 0.4);
  for (double v : p.p) CHECK(std::abs(v - 0.4) < 1e-12);

  p = build_positive_table(table({5, 5}), table({0, 10}), 0.5);
  CHECK(p.p[0] == 0.0);

  CHECK_THROWS_AS(build_positive_table(table({0, 0}), table({1, 1}), 0.5), DataError);
  CHECK_THROWS_AS(build_positive_table(table({1, 1}), table({0, 0}), 0.5), DataError);
  CHECK_THROWS_AS(build_positive_table(table({1, 1}), table({1, 1}), 0.0), ConfigError);
  CHECK_THROWS_AS(build_positive_table(table({1, 1}), table({1, 1}), 1.5), ConfigError);
}

TEST_CASE("positive table: range, distribution matching and monotonicity") {
  std::mt19937_64 gen(43);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t v = 50;
    std::vector<std::uint64_t> dc(v), du(v);
    for (std::size_t i = 0; i < v; ++i) {
      dc[i] = 1 + gen() % 20;
      du[i] = 1 + gen() % 1000;
    }
    // A gamma small enough that no entry hits the cap.
    auto fc = table(dc), fu = table(du);
    double max_ratio = 0;
    for (std::size_t i = 0; i < v; ++i) {
      max_ratio = std::max(max_ratio, static_cast<double>(dc[i]) / static_cast<double>(du[i]) *
                                          static_cast<double>(fu.total) / static_cast<double>(fc.total));
    }
    const double gamma = std::min(1.0, 0.9 / max_ratio);
    const auto p = build_positive_table(fc, fu, gamma);
    REQUIRE(p.capped == 0);
    double z = 0;
    for (std::size_t i = 0; i < v; ++i) z += p.p[i] * static_cast<double>(du[i]);
    for (std::size_t i = 0; i < v; ++i) {
      CHECK(p.p[i] >= 0.0);
      CHECK(p.p[i] <= 1.0);
      const double matched = p.p[i] * static_cast<double>(du[i]) / z;
      CHECK(std::abs(matched - static_cast<double>(dc[i]) / static_cast<double>(fc.total)) < 1e-12);
    }

    // Capped tables stay in range; raising one labeled count never lowers its p.
    const auto capped = build_positive_table(fc, fu, 1.0);
    for (double x : capped.p) CHECK((x >= 0.0 && x <= 1.0));
    const std::size_t k = gen() % v;
    auto bumped = dc;
    bumped[k] += 1 + gen() % 10;
    const auto after = build_positive_table(table(bumped), fu, gamma);
    CHECK(after.p[k] >= p.p[k]);
  }
}

TEST_CASE("cooccurrence counts") {
  std::vector<Question> qs{make_question({"finish", "win", "take", "join"}, 2)};
  auto stats = build_vocab_from_candidates(qs);
  auto id = [&](const char* s) { return *stats.vocab.find(s); };
  auto t = build_cooccurrence(qs, stats.vocab);
  CHECK(t.count(id("finish"), id("take")) == 1);
  CHECK(t.count(id("win"), id("take")) == 1);
  CHECK(t.count(id("join"), id("take")) == 1);
  CHECK(t.count(id("take"), id("take")) == 0);
  CHECK(t.count(id("take"), id("win")) == 0);

  qs.push_back(qs[0]);
  t = build_cooccurrence(qs, stats.vocab);
  CHECK(t.count(id("win"), id("take")) == 2);

  CHECK(build_cooccurrence(std::vector<Question>{}, stats.vocab).nonzero() == 0);
}

TEST_CASE("negative distribution worked values") {
  const CandidateVocab v({"finish", "join", "take", "win"});
  auto id = [&](const char* s) { return *v.find(s); };
  CooccurrenceTable t(4, 0.1);
  t.add(id("finish"), id("take"), 2);
  t.add(id("win"), id("take"));
  t.add(id("join"), id("take"));
  const auto d = negative_distribution(t, id("take"));
  CHECK(std::abs(d[static_cast<std::size_t>(id("finish"))] - 0.475) < 1e-12);
  CHECK(std::abs(d[static_cast<std::size_t>(id("win"))] - 0.25) < 1e-12);
  CHECK(std::abs(d[static_cast<std::size_t>(id("join"))] - 0.25) < 1e-12);
  CHECK(std::abs(d[static_cast<std::size_t>(id("take"))] - 0.025) < 1e-12);

  CooccurrenceTable u(4, 1.0);
  u.add(id("finish"), id("take"), 7);
  for (double x : negative_distribution(u, id("take"))) CHECK(x == 0.25);
  for (double x : negative_distribution(t, id("win"))) CHECK(std::abs(x - 0.25) < 1e-15);

  CHECK_THROWS_AS(negative_distribution(t, 4), DataError);
  CHECK_THROWS_AS(negative_distribution(t, -1), DataError);
  CHECK_THROWS_AS(CooccurrenceTable(4, 1.5), ConfigError);
}

TEST_CASE("negative distributions sum to one and respect the lambda floor") {
  std::mt19937_64 gen(47);
  for (double lambda : {0.0, 0.1, 0.5, 1.0}) {
    CooccurrenceTable t(30, lambda);
    for (int i = 0; i < 200; ++i) {
      t.add(static_cast<std::int32_t>(gen() % 30), static_cast<std::int32_t>(gen() % 30), 1 + gen() % 5);
    }
    for (std::int32_t w = 0; w < 30; ++w) {
      const auto d = negative_distribution(t, w);
      CHECK(std::abs(std::accumulate(d.begin(), d.end(), 0.0) - 1.0) < 1e-9);
      for (double x : d) CHECK(x >= lambda / 30.0);
    }
  }
}

namespace {

struct Fixture {
  CandidateVocab vocab;
  PositiveTable positives;
  CooccurrenceTable cooc{0};
};

Fixture small_fixture(std::vector<double> p) {
  Fixture f;
  f.vocab = CandidateVocab({"apple", "banana", "cherry", "date", "thank you"});
  f.positives.p = std::move(p);
  f.cooc = CooccurrenceTable(f.vocab.size(), 0.1);
  return f;
}

}  // namespace

TEST_CASE("generation: forced and empty streams") {
  const std::vector<Tokens> passages{{"i", "ate", "an", "apple", "and", "said", "thank", "you", "."}};
  const std::vector<std::string> ids{"u/0"};
  GenerationOptions opt;
  opt.seed = 5;

  auto f = small_fixture({0, 0, 0, 0, 0});
  CHECK(generate_examples(passages, ids, f.vocab, f.positives, f.cooc, opt).empty());

  f = small_fixture({0, 0, 0, 0, 1});
  GenerationStats stats;
  const auto qs = generate_examples(passages, ids, f.vocab, f.positives, f.cooc, opt, &stats);
  REQUIRE(qs.size() == 1);
  CHECK(stats.occurrences == 2);
  const auto& q = qs[0];
  q.validate();
  CHECK(q.subset == Subset::synthetic);
  CHECK(q.candidates[q.answer] == Tokens{"thank", "you"});
  REQUIRE(q.provenance);
  CHECK(q.provenance->position == 6);
  CHECK(q.context[q.blank_index] == kBlankToken);
  CHECK(q.context[q.blank_index + 1] == ".");
  CHECK(q.context[q.blank_index - 1] == "said");
}

TEST_CASE("generation: invariants, reproducibility and worker independence") {
  std::mt19937_64 gen(53);
  std::vector<std::string> entries;
  for (int i = 0; i < 12; ++i) entries.push_back("e" + std::to_string(i));
  entries.push_back("e1 e2");
  const CandidateVocab vocab(entries);
  std::vector<Tokens> passages;
  std::vector<std::string> ids;
  for (int p = 0; p < 40; ++p) {
    Tokens t;
    for (int i = 0; i < 100; ++i) t.push_back(gen() % 2 ? "e" + std::to_string(gen() % 12) : "x");
    passages.push_back(t);
    ids.push_back("u/" + std::to_string(p));
  }
  PositiveTable pos;
  for (std::size_t i = 0; i < vocab.size(); ++i) pos.p.push_back(0.3);
  CooccurrenceTable cooc(vocab.size(), 0.1);
  for (int i = 0; i < 100; ++i) {
    cooc.add(static_cast<std::int32_t>(gen() % vocab.size()), static_cast<std::int32_t>(gen() % vocab.size()));
  }
  GenerationOptions opt;
  opt.seed = 99;
  opt.window = 20;
  const auto a = generate_examples(passages, ids, vocab, pos, cooc, opt);
  const auto b = generate_examples(passages, ids, vocab, pos, cooc, opt);
  opt.threads = 3;
  const auto c = generate_examples(passages, ids, vocab, pos, cooc, opt);
  REQUIRE(!a.empty());
  REQUIRE(a.size() == b.size());
  REQUIRE(a.size() == c.size());
  std::map<std::string, std::size_t> by_passage;
  for (std::size_t i = 0; i < ids.size(); ++i) by_passage[ids[i]] = i;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] == b[i]);
    CHECK(a[i] == c[i]);
    const auto& q = a[i];
    q.validate();
    CHECK(q.context.size() == 20);
    std::set<Tokens> distinct(q.candidates.begin(), q.candidates.end());
    CHECK(distinct.size() == 4);
    const auto& src = passages[by_passage.at(q.provenance->passage_id)];
    const auto& pos_tokens = q.candidates[q.answer];
    CHECK(std::equal(pos_tokens.begin(), pos_tokens.end(),
                     src.begin() + static_cast<std::ptrdiff_t>(q.provenance->position)));
    CHECK(q.provenance->negative_ids.size() == 3);
  }
  opt.seed = 100;
  opt.threads = 1;
  const auto d = generate_examples(passages, ids, vocab, pos, cooc, opt);
  bool differs = d.size() != a.size();
  for (std::size_t i = 0; !differs && i < a.size(); ++i) differs = !(a[i] == d[i]);
  CHECK(differs);
}

TEST_CASE("generation skips occurrences when too few distinct negatives exist") {
  const CandidateVocab vocab({"a", "b", "c"});
  PositiveTable pos;
  pos.p = {1, 1, 1};
  CooccurrenceTable cooc(3, 0.1);
  GenerationStats stats;
  const auto qs = generate_examples(std::vector<Tokens>{{"a", "b", "c"}}, std::vector<std::string>{"u"}, vocab, pos,
                                    cooc, GenerationOptions{}, &stats);
  CHECK(qs.empty());
  CHECK(stats.skipped == 3);
}

TEST_CASE("generated positives match the labeled candidate distribution") {
  // Worked 0.25 / 0.75 table over a, b; c, d, e only serve as negatives.
  const CandidateVocab vocab({"a", "b", "c", "d", "e"});
  const auto labeled = table({10, 30, 0, 0, 0});
  std::vector<Tokens> passages;
  std::vector<std::string> ids;
  for (int p = 0; p < 100; ++p) {
    Tokens t;
    for (int i = 0; i < 100; ++i) t.push_back(i % 2 ? "a" : "b");
    passages.push_back(t);
    ids.push_back("u/" + std::to_string(p));
  }
  const auto unlabeled = count_unlabeled(passages, vocab);
  REQUIRE(unlabeled.total == 10000);
  const auto pos = build_positive_table(labeled, unlabeled, 0.5);
  CHECK(std::abs(pos.p[0] - 0.25) < 1e-12);
  CHECK(std::abs(pos.p[1] - 0.75) < 1e-12);
  const CooccurrenceTable cooc(vocab.size(), 0.1);

  std::vector<double> emitted(vocab.size(), 0.0);
  std::size_t draws = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    GenerationOptions opt;
    opt.seed = seed;
    GenerationStats stats;
    for (const auto& q : generate_examples(passages, ids, vocab, pos, cooc, opt, &stats)) {
      emitted[static_cast<std::size_t>(*vocab.find(join(q.candidates[q.answer])))] += 1;
    }
    draws += stats.occurrences;
  }
  CHECK(draws >= 100000);
  const double n = std::accumulate(emitted.begin(), emitted.end(), 0.0);
  double l1 = 0;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    l1 += std::abs(emitted[i] / n - static_cast<double>(labeled.counts[i]) / static_cast<double>(labeled.total));
  }
  CHECK(l1 < 0.02);
}

TEST_CASE("synthetic questions round-trip through jsonl") {
  const CandidateVocab vocab({"apple", "banana", "cherry", "date", "thank you"});
  PositiveTable pos;
  pos.p = {1, 0.5, 0.5, 0.5, 1};
  const CooccurrenceTable cooc(vocab.size(), 0.1);
  const std::vector<Tokens> passages{{"apple", "banana", "x", "thank", "you", "cherry", "date"}};
  GenerationOptions opt;
  opt.window = 5;
  const auto qs = generate_examples(passages, std::vector<std::string>{"u/1"}, vocab, pos, cooc, opt);
  REQUIRE(!qs.empty());
  const auto path = std::filesystem::temp_directory_path() / "clozeforge_synth.jsonl";
  write_questions_jsonl(path, qs);
  CHECK(read_questions_jsonl(path) == qs);
}
