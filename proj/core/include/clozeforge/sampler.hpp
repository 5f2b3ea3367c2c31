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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "clozeforge/question.hpp"

namespace clozeforge {

/// The sampler's vocabulary: every distinct candidate string seen in labeled
/// option lists, phrases included ("thank you" is one entry). Ids are dense
/// and assigned in lexicographic order of the entry string.
class CandidateVocab {
 public:
  CandidateVocab() = default;
  explicit CandidateVocab(std::vector<std::string> entries);

  std::size_t size() const noexcept { return entries_.size(); }
  const std::string& entry(std::int32_t id) const { return entries_.at(static_cast<std::size_t>(id)); }
  const Tokens& tokens(std::int32_t id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::optional<std::int32_t> find(std::string_view entry) const;
  std::size_t max_entry_length() const noexcept { return max_len_; }

 private:
  std::vector<std::string> entries_;
  std::vector<Tokens> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
  std::size_t max_len_ = 0;
};

struct FrequencyTable {
  std::string corpus;  // "labeled" or "unlabeled"
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;
};

struct CandidateStats {
  CandidateVocab vocab;
  FrequencyTable labeled;  // one count per occurrence in an option list
};

// Throws DataError on an empty question list.
CandidateStats build_vocab_from_candidates(std::span<const Question> questions);

struct EntryMatch {
  std::size_t position = 0;
  std::size_t length = 0;
  std::int32_t entry = 0;
};

// Left-to-right scan taking the longest entry that starts at each position;
// matched tokens are consumed.
std::vector<EntryMatch> match_entries(const Tokens& passage, const CandidateVocab& vocab);

FrequencyTable count_unlabeled(std::span<const Tokens> passages, const CandidateVocab& vocab);

struct PositiveTable {
  std::vector<double> p;
  double gamma = 0.5;
  std::size_t capped = 0;  // entries whose ratio hit the min(1, .) cap
};

/// p(w) = min(1, (#(w,Dc) / #(w,Du)) * gamma * sum(Du) / sum(Dc)), 0 where
/// #(w,Du) = 0. Sampling positives from unlabeled text with these
/// probabilities reproduces the labeled candidate distribution up to the cap.
PositiveTable build_positive_table(const FrequencyTable& labeled, const FrequencyTable& unlabeled,
                                   double gamma = 0.5);

// "entry\t#Dc\t#Du\tp" per line, in vocabulary order.
void write_positive_table(const std::filesystem::path& path, const CandidateVocab& vocab,
                          const FrequencyTable& labeled, const FrequencyTable& unlabeled,
                          const PositiveTable& table);

/// Counts #(w_i, w_p) of wrong option w_i appearing alongside correct option w_p.
class CooccurrenceTable {
 public:
  CooccurrenceTable(std::size_t vocab_size, double lambda = 0.1);

  void add(std::int32_t negative, std::int32_t positive, std::uint64_t n = 1);
  std::uint64_t count(std::int32_t negative, std::int32_t positive) const;
  std::uint64_t row_total(std::int32_t positive) const { return rows_.at(static_cast<std::size_t>(positive)).total; }
  std::size_t vocab_size() const noexcept { return rows_.size(); }
  double lambda() const noexcept { return lambda_; }
  std::size_t nonzero() const;

  // Draws an entry from the count-proportional part of the row (uniform
  // when the row is empty).
  std::int32_t sample_row(std::int32_t positive, std::mt19937_64& rng) const;

 private:
  struct Row {
    std::vector<std::pair<std::int32_t, std::uint64_t>> entries;  // sorted by id
    std::vector<std::uint64_t> cumulative;
    std::uint64_t total = 0;
  };
  std::vector<Row> rows_;
  double lambda_;
};

CooccurrenceTable build_cooccurrence(std::span<const Question> questions, const CandidateVocab& vocab,
                                     double lambda = 0.1);

// lambda/|V| + (1-lambda) * #(w_i,w_p) / sum_j #(w_j,w_p); a zero row uses a
// uniform second term. Throws DataError for an unknown w_p.
std::vector<double> negative_distribution(const CooccurrenceTable& table, std::int32_t positive);

struct GenerationOptions {
  std::uint64_t seed = 0;
  std::size_t negatives = 3;
  std::size_t window = 80;
  std::size_t max_draws = 1000;
  std::size_t threads = 1;
};

struct GenerationStats {
  std::size_t occurrences = 0;  // vocabulary matches scanned
  std::size_t emitted = 0;
  std::size_t skipped = 0;  // rejection loop gave up
};

/// Scans each passage for vocabulary entries and blanks each occurrence of w
/// with probability p(w). A blanked phrase becomes a single <BLANK>; the
/// question's context is the window around it. Negatives are drawn from
/// negative_distribution(., w), redrawing w itself and duplicates. Passage i
/// draws from a stream seeded by (seed, passage_ids[i]), so the output does
/// not depend on `threads`.
std::vector<Question> generate_examples(std::span<const Tokens> passages, std::span<const std::string> passage_ids,
                                        const CandidateVocab& vocab, const PositiveTable& positives,
                                        const CooccurrenceTable& cooccurrence, const GenerationOptions& options,
                                        GenerationStats* stats = nullptr);

}  // namespace clozeforge
