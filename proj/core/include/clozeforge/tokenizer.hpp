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

#include <string>
#include <string_view>
#include <vector>

namespace clozeforge {

using Tokens = std::vector<std::string>;

inline constexpr std::string_view kPadToken = "<PAD>";
inline constexpr std::string_view kUnkToken = "<UNK>";
inline constexpr std::string_view kBlankToken = "<BLANK>";

/// Penn-Treebank-style word tokenizer, lowercased.
///
/// Applies the Treebank substitution table (quotes, punctuation, brackets,
/// clitics such as n't/'s/'ll, and the can|not-style splits), then detaches
/// sentence-final periods inside multi-sentence text. A run of underscores is
/// the blank marker and becomes <BLANK>.
Tokens tokenize(std::string_view text);

std::string lowercase(std::string_view text);
std::string join(const Tokens& tokens, std::string_view sep = " ");
// Splits on ASCII whitespace.
Tokens split_whitespace(std::string_view text);

}  // namespace clozeforge
