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

#include "clozeforge/sampler.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <thread>

#include "clozeforge/errors.hpp"
#include "clozeforge/passage.hpp"
#include "clozeforge/rng.hpp"

namespace clozeforge {

CandidateVocab::CandidateVocab(std::vector<std::string> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end());
  entries_.erase(std::unique(entries_.begin(), entries_.end()), entries_.end());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    Tokens t = split_whitespace(entries_[i]);
    if (t.empty()) throw DataError("empty candidate entry");
    max_len_ = std::max(max_len_, t.size());
    tokens_.push_back(std::move(t));
    index_.emplace(entries_[i], static_cast<std::int32_t>(i));
  }
}

std::optional<std::int32_t> CandidateVocab::find(std::string_view entry) const {
  const auto it = index_.find(std::string(entry));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

CandidateStats build_vocab_from_candidates(std::span<const Question> questions) {
  if (questions.empty()) throw DataError("cannot build a candidate vocabulary from no questions");
  std::vector<std::string> all;
  for (const auto& q : questions) {
    for (const auto& c : q.candidates) all.push_back(join(c));
  }
  CandidateStats out{CandidateVocab(all), {}};
  out.labeled.corpus = "labeled";
  out.labeled.counts.assign(out.vocab.size(), 0);
  for (const auto& s : all) ++out.labeled.counts[static_cast<std::size_t>(*out.vocab.find(s))];
  out.labeled.total = all.size();
  return out;
}

std::vector<EntryMatch> match_entries(const Tokens& passage, const CandidateVocab& vocab) {
  std::vector<EntryMatch> out;
  std::string key;
  std::size_t i = 0;
  while (i < passage.size()) {
    std::optional<EntryMatch> best;
    key.clear();
    for (std::size_t len = 1; len <= vocab.max_entry_length() && i + len <= passage.size(); ++len) {
      if (len > 1) key.push_back(' ');
      key += passage[i + len - 1];
      if (auto id = vocab.find(key)) best = EntryMatch{i, len, *id};
    }
    if (best) {
      out.push_back(*best);
      i += best->length;
    } else {
      ++i;
    }
  }
  return out;
}

FrequencyTable count_unlabeled(std::span<const Tokens> passages, const CandidateVocab& vocab) {
  FrequencyTable t;
  t.corpus = "unlabeled";
  t.counts.assign(vocab.size(), 0);
  for (const auto& p : passages) {
    for (const auto& m : match_entries(p, vocab)) {
      ++t.counts[static_cast<std::size_t>(m.entry)];
      ++t.total;
    }
  }
  return t;
}

PositiveTable build_positive_table(const FrequencyTable& labeled, const FrequencyTable& unlabeled, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (labeled.counts.size() != unlabeled.counts.size()) {
    throw DataError("labeled and unlabeled frequency tables cover different vocabularies");
  }
  if (labeled.total == 0) throw DataError("labeled candidate total is zero");
  if (unlabeled.total == 0) throw DataError("unlabeled corpus contains no vocabulary entry");
  PositiveTable t;
  t.gamma = gamma;
  t.p.assign(labeled.counts.size(), 0.0);
  const double scale = gamma * static_cast<double>(unlabeled.total) / static_cast<double>(labeled.total);
  for (std::size_t i = 0; i < t.p.size(); ++i) {
    if (unlabeled.counts[i] == 0) continue;
    const double raw = static_cast<double>(labeled.counts[i]) / static_cast<double>(unlabeled.counts[i]) * scale;
    if (raw >= 1.0) {
      t.p[i] = 1.0;
      if (raw > 1.0) ++t.capped;
    } else {
      t.p[i] = raw;
    }
  }
  return t;
}

void write_positive_table(const std::filesystem::path& path, const CandidateVocab& vocab,
                          const FrequencyTable& labeled, const FrequencyTable& unlabeled,
                          const PositiveTable& table) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(17);
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    out << vocab.entry(static_cast<std::int32_t>(i)) << '\t' << labeled.counts[i] << '\t' << unlabeled.counts[i]
        << '\t' << table.p[i] << '\n';
  }
}

CooccurrenceTable::CooccurrenceTable(std::size_t vocab_size, double lambda) : rows_(vocab_size), lambda_(lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
}

void CooccurrenceTable::add(std::int32_t negative, std::int32_t positive, std::uint64_t n) {
  if (negative < 0 || positive < 0 || static_cast<std::size_t>(std::max(negative, positive)) >= rows_.size()) {
    throw DataError("entry id out of range");
  }
  if (negative == positive) return;  // options within a set are distinct
  Row& row = rows_[static_cast<std::size_t>(positive)];
  auto it = std::lower_bound(row.entries.begin(), row.entries.end(), std::make_pair(negative, std::uint64_t{0}));
  if (it != row.entries.end() && it->first == negative) {
    it->second += n;
  } else {
    row.entries.insert(it, {negative, n});
  }
  row.total += n;
  row.cumulative.clear();
  std::uint64_t acc = 0;
  for (const auto& e : row.entries) row.cumulative.push_back(acc += e.second);
}

std::uint64_t CooccurrenceTable::count(std::int32_t negative, std::int32_t positive) const {
  const Row& row = rows_.at(static_cast<std::size_t>(positive));
  auto it = std::lower_bound(row.entries.begin(), row.entries.end(), std::make_pair(negative, std::uint64_t{0}));
  return it != row.entries.end() && it->first == negative ? it->second : 0;
}

std::size_t CooccurrenceTable::nonzero() const {
  std::size_t n = 0;
  for (const auto& r : rows_) n += r.entries.size();
  return n;
}

std::int32_t CooccurrenceTable::sample_row(std::int32_t positive, std::mt19937_64& rng) const {
  const Row& row = rows_.at(static_cast<std::size_t>(positive));
  if (row.total == 0) return static_cast<std::int32_t>(uniform_index(rng, rows_.size()));
  const std::uint64_t x = static_cast<std::uint64_t>(uniform_index(rng, static_cast<std::size_t>(row.total)));
  const auto it = std::upper_bound(row.cumulative.begin(), row.cumulative.end(), x);
  return row.entries[static_cast<std::size_t>(it - row.cumulative.begin())].first;
}

CooccurrenceTable build_cooccurrence(std::span<const Question> questions, const CandidateVocab& vocab,
                                     double lambda) {
  CooccurrenceTable t(vocab.size(), lambda);
  for (const auto& q : questions) {
    const auto pos = vocab.find(join(q.candidates.at(q.answer)));
    if (!pos) throw DataError("answer of " + q.id + " is not in the candidate vocabulary");
    for (std::size_t k = 0; k < kNumCandidates; ++k) {
      if (k == q.answer) continue;
      const auto neg = vocab.find(join(q.candidates[k]));
      if (!neg) throw DataError("option of " + q.id + " is not in the candidate vocabulary");
      t.add(*neg, *pos);
    }
  }
  return t;
}

std::vector<double> negative_distribution(const CooccurrenceTable& table, std::int32_t positive) {
  const std::size_t v = table.vocab_size();
  if (positive < 0 || static_cast<std::size_t>(positive) >= v) {
    throw DataError("unknown positive entry id " + std::to_string(positive));
  }
  const double lambda = table.lambda();
  std::vector<double> out(v, lambda / static_cast<double>(v));
  const std::uint64_t total = table.row_total(positive);
  for (std::size_t i = 0; i < v; ++i) {
    const double second = total == 0 ? 1.0 / static_cast<double>(v)
                                     : static_cast<double>(table.count(static_cast<std::int32_t>(i), positive)) /
                                           static_cast<double>(total);
    out[i] += (1.0 - lambda) * second;
  }
  return out;
}

namespace {

void generate_passage(const Tokens& passage, const std::string& passage_id, const CandidateVocab& vocab,
                      const PositiveTable& positives, const CooccurrenceTable& cooc,
                      const GenerationOptions& options, std::vector<Question>& out, GenerationStats& stats) {
  std::mt19937_64 rng(derive_seed(options.seed, passage_id));
  const auto matches = match_entries(passage, vocab);
  for (const auto& m : matches) {
    ++stats.occurrences;
    const double p = positives.p[static_cast<std::size_t>(m.entry)];
    if (!(uniform01(rng) < p)) continue;

    std::vector<std::int32_t> negatives;
    std::size_t draws = 0;
    while (negatives.size() < options.negatives && draws < options.max_draws) {
      ++draws;
      const std::int32_t w = uniform01(rng) < cooc.lambda()
                                 ? static_cast<std::int32_t>(uniform_index(rng, vocab.size()))
                                 : cooc.sample_row(m.entry, rng);
      if (w == m.entry || std::find(negatives.begin(), negatives.end(), w) != negatives.end()) continue;
      negatives.push_back(w);
    }
    if (negatives.size() < options.negatives) {
      ++stats.skipped;
      continue;
    }

    std::vector<std::int32_t> order{m.entry};
    order.insert(order.end(), negatives.begin(), negatives.end());
    shuffle(order.begin(), order.end(), rng);

    Tokens blanked(passage.begin(), passage.begin() + static_cast<std::ptrdiff_t>(m.position));
    blanked.emplace_back(kBlankToken);
    blanked.insert(blanked.end(), passage.begin() + static_cast<std::ptrdiff_t>(m.position + m.length),
                   passage.end());
    Window w = extract_window(blanked, m.position, options.window);

    Question q;
    q.id = "synthetic/" + passage_id + "@" + std::to_string(m.position);
    q.subset = Subset::synthetic;
    q.context = std::move(w.tokens);
    q.blank_index = w.blank_index;
    for (std::size_t k = 0; k < kNumCandidates; ++k) {
      q.candidates[k] = vocab.tokens(order[k]);
      if (order[k] == m.entry) q.answer = k;
    }
    q.provenance = Provenance{passage_id, m.position, negatives};
    out.push_back(std::move(q));
    ++stats.emitted;
  }
}

}  // namespace

std::vector<Question> generate_examples(std::span<const Tokens> passages, std::span<const std::string> passage_ids,
                                        const CandidateVocab& vocab, const PositiveTable& positives,
                                        const CooccurrenceTable& cooccurrence, const GenerationOptions& options,
                                        GenerationStats* stats) {
  if (passages.size() != passage_ids.size()) throw DataError("one id per passage required");
  if (positives.p.size() != vocab.size() || cooccurrence.vocab_size() != vocab.size()) {
    throw DataError("sampler tables were built over different vocabularies");
  }
  if (options.negatives + 1 != kNumCandidates) {
    throw ConfigError("negatives per question must be " + std::to_string(kNumCandidates - 1));
  }
  const std::size_t workers = std::max<std::size_t>(1, std::min(options.threads, passages.size()));
  std::vector<std::vector<Question>> parts(workers);
  std::vector<GenerationStats> part_stats(workers);
  const std::size_t per = passages.empty() ? 0 : (passages.size() + workers - 1) / workers;
  auto run = [&](std::size_t w) {
    const std::size_t lo = std::min(passages.size(), w * per);
    const std::size_t hi = std::min(passages.size(), lo + per);
    for (std::size_t i = lo; i < hi; ++i) {
      generate_passage(passages[i], passage_ids[i], vocab, positives, cooccurrence, options, parts[w],
                       part_stats[w]);
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  std::vector<Question> out;
  GenerationStats total;
  for (std::size_t w = 0; w < workers; ++w) {
    out.insert(out.end(), std::make_move_iterator(parts[w].begin()), std::make_move_iterator(parts[w].end()));
    total.occurrences += part_stats[w].occurrences;
    total.emitted += part_stats[w].emitted;
    total.skipped += part_stats[w].skipped;
  }
  if (stats) *stats = total;
  return out;
}

}  // namespace clozeforge
