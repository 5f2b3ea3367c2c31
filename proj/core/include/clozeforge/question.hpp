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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clozeforge/tokenizer.hpp"

namespace clozeforge {

inline constexpr std::size_t kNumCandidates = 4;

enum class Subset { middle, high, synthetic };

std::string_view to_string(Subset s);
Subset parse_subset(std::string_view s);

/// Where a synthetic question came from.
struct Provenance {
  std::string passage_id;
  std::size_t position = 0;  // token offset of the blanked entry in the passage
  std::vector<std::int32_t> negative_ids;  // sampler-vocabulary ids

  bool operator==(const Provenance&) const = default;
};

/// One cloze item: a context window with the question's blank at
/// `blank_index`, four candidate fillers (each one or more tokens) and the
/// index of the correct one. Other blanks of the same passage may appear in
/// the window as <BLANK> too.
struct Question {
  std::string id;
  Subset subset = Subset::middle;
  Tokens context;
  std::size_t blank_index = 0;
  std::array<Tokens, kNumCandidates> candidates;
  std::size_t answer = 0;
  std::optional<Provenance> provenance;

  // Throws DataError if an invariant does not hold.
  void validate() const;

  bool operator==(const Question&) const = default;
};

}  // namespace clozeforge
