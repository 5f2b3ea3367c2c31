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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "clozeforge/tokenizer.hpp"

namespace clozeforge {

inline constexpr std::size_t kMaxNgramOrder = 5;
// 1 + 2 + 3 + 4 + 5 alignments.
inline constexpr std::size_t kNgramFeatureDim = 15;
inline constexpr std::string_view kNgramMagic = "NGRAM-IDX-1";

using NgramFeatures = std::array<double, kNgramFeatureDim>;

/// Raw counts of every contiguous token sequence of length 1..n_max within
/// each passage of a background corpus. Windows never cross passages.
class NgramIndex {
 public:
  explicit NgramIndex(std::size_t n_max = kMaxNgramOrder, std::uint64_t floor = 1);

  // Passages are split into `shards` contiguous ranges counted on separate
  // threads; the merge is a sum, so the result does not depend on `shards`.
  static NgramIndex build(std::span<const Tokens> passages, std::size_t n_max = kMaxNgramOrder,
                          std::uint64_t floor = 1, std::size_t shards = 1);

  void add_passage(const Tokens& passage);
  void merge(const NgramIndex& other);
  // Drops entries below the floor. build() calls this once at the end.
  void apply_floor();

  // 0 for unseen grams and for orders above n_max. Throws DataError unless
  // 1 <= gram.size() <= 5.
  std::uint64_t count(std::span<const std::string> gram) const;
  std::uint64_t count(std::initializer_list<std::string> gram) const {
    return count(std::span<const std::string>(gram.begin(), gram.size()));
  }

  /// Substitutes `candidate` for context[blank_index] and returns
  /// log(1 + count) of every n-window covering the first candidate token,
  /// ordered (n=1, offset 0), (n=2, offsets -1, 0), ..., (n=5, offsets -4..0).
  /// Windows that run past either end of the context contribute 0.
  NgramFeatures blank_features(const Tokens& context, std::size_t blank_index, const Tokens& candidate) const;

  std::size_t n_max() const noexcept { return n_max_; }
  std::uint64_t floor() const noexcept { return floor_; }
  std::uint64_t total_tokens() const noexcept { return total_tokens_; }
  std::size_t entries(std::size_t n) const { return tables_.at(n - 1).size(); }
  std::size_t entries() const;
  bool operator==(const NgramIndex& other) const;

  // Canonical text form: header line, then "n\tgram\tcount" sorted by n then gram.
  void save(const std::filesystem::path& path) const;
  static NgramIndex load(const std::filesystem::path& path);

  // All entries of order n as (gram, count), sorted by gram.
  std::vector<std::pair<std::string, std::uint64_t>> sorted_entries(std::size_t n) const;

 private:
  std::size_t n_max_;
  std::uint64_t floor_;
  std::uint64_t total_tokens_ = 0;
  std::array<std::unordered_map<std::string, std::uint64_t>, kMaxNgramOrder> tables_;
};

}  // namespace clozeforge
