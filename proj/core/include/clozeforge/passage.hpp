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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "clozeforge/cloth.hpp"
#include "clozeforge/tokenizer.hpp"

namespace clozeforge {

struct Window {
  Tokens tokens;
  std::size_t blank_index = 0;
  std::size_t start = 0;  // passage offset of tokens[0]
};

/// Context window of `width` tokens around `blank_position`: width/2 tokens
/// to the left and the rest minus one to the right (40/39 for width 80). At
/// passage edges the window slides to stay inside the passage; passages
/// shorter than `width` are returned whole and padded with <PAD> at the end.
Window extract_window(const Tokens& passage, std::size_t blank_position, std::size_t width = 80);

// |A ∩ B| / |A ∪ B| over the sets of distinct tokens (1 when both are empty).
double jaccard(const Tokens& a, const Tokens& b);

/// Indices of the candidates to keep: a candidate is dropped iff its Jaccard
/// similarity with any reference exceeds `threshold`.
std::vector<std::size_t> jaccard_dedup(std::span<const Tokens> candidates, std::span<const Tokens> references,
                                       double threshold = 0.85);

// The passage with each blank replaced by its correct option's tokens.
Tokens fill_answers(const Passage& passage);

// Tokenized corpus cache: one passage per line, tokens separated by spaces.
std::vector<Tokens> read_token_lines(const std::filesystem::path& path);
void write_token_lines(const std::filesystem::path& path, std::span<const Tokens> passages);

}  // namespace clozeforge
