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
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "clozeforge/tokenizer.hpp"

namespace clozeforge {

/// Token <-> id bijection with frequencies.
///
/// Ids are dense in [0, size()). <PAD>, <UNK> and <BLANK> always hold ids
/// 0, 1 and 2; every other token is numbered by descending frequency with
/// lexicographic tie-breaks. rank() orders all entries, reserved ones
/// included, by the same rule and is a permutation of [0, size()).
class Vocab {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kUnk = 1;
  static constexpr std::int32_t kBlank = 2;

  Vocab();

  // Counts are merged in sorted order, so the result does not depend on the
  // order in which sequences are supplied.
  static Vocab build(std::span<const Tokens> sequences, std::size_t min_count = 1);
  static Vocab from_counts(const std::unordered_map<std::string, std::uint64_t>& counts,
                           std::size_t min_count = 1);

  std::size_t size() const noexcept { return tokens_.size(); }
  bool contains(std::string_view token) const;
  std::int32_t id(std::string_view token) const;  // kUnk when absent
  const std::string& token(std::int32_t id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::uint64_t frequency(std::int32_t id) const { return freqs_.at(static_cast<std::size_t>(id)); }
  std::size_t rank(std::int32_t id) const { return ranks_.at(static_cast<std::size_t>(id)); }

  std::vector<std::int32_t> encode(const Tokens& tokens) const;

  nlohmann::json to_json() const;
  static Vocab from_json(const nlohmann::json& j);

 private:
  void assign(std::vector<std::pair<std::string, std::uint64_t>> entries);

  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> freqs_;
  std::vector<std::size_t> ranks_;
  std::unordered_map<std::string, std::int32_t> index_;
};

}  // namespace clozeforge
