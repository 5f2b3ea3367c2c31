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

#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "clozeforge/cloth.hpp"
#include "clozeforge/model.hpp"
#include "clozeforge/vocab.hpp"

namespace clozeforge {

// ConfigError when the path is unset or does not exist.
void require_path(const std::filesystem::path& path, std::string_view what);

// Raw text, one passage per non-empty line, tokenized.
std::vector<Tokens> read_text_passages(const std::filesystem::path& path);

// Questions from an optional CLOTH directory plus an optional question JSONL
// file; either may be empty.
std::vector<Question> load_question_set(const std::filesystem::path& cloth_dir,
                                        const std::filesystem::path& jsonl, std::size_t window);

// DataError naming the first repeated id.
void check_unique_ids(std::span<const Question> questions);

// Vocabulary over contexts and candidates of the given question sets.
Vocab build_question_vocab(std::span<const std::vector<Question>* const> sets, std::size_t min_count = 1);

std::vector<EncodedQuestion> encode_questions(const MpNet& model, std::span<const Question> questions,
                                              const NgramIndex* index);

}  // namespace clozeforge
