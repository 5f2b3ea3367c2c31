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
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clozeforge/question.hpp"

namespace clozeforge {

/// A tokenized passage whose blanks are <BLANK> tokens, paired in order with
/// their option lists and answers. Unlabeled passages have no blanks.
struct Passage {
  std::string id;
  Subset subset = Subset::middle;
  Tokens tokens;
  std::vector<std::size_t> blanks;
  std::vector<std::array<Tokens, kNumCandidates>> options;
  std::vector<std::size_t> answers;

  void validate() const;
};

// Parses one CLOTH JSON object: {"article": text with "_" blanks,
// "options": [[4 strings], ...], "answers": ["A".."D", ...]}.
Passage parse_cloth(const nlohmann::json& doc, std::string id, Subset subset);
Passage load_cloth_file(const std::filesystem::path& path, Subset subset);
// Loads <dir>/middle/*.json and <dir>/high/*.json, sorted by file name. The
// passage id is "<subset>/<file stem>".
std::vector<Passage> load_cloth_dir(const std::filesystem::path& dir);

nlohmann::json to_cloth_json(const Passage& passage);
void write_cloth_file(const std::filesystem::path& path, const Passage& passage);
// Writes passages under <dir>/<subset>/<stem>.json (ids must be "<subset>/<stem>").
void write_cloth_dir(const std::filesystem::path& dir, const std::vector<Passage>& passages);

// One question per blank; ids are "<passage id>#<blank number>".
std::vector<Question> make_questions(const Passage& passage, std::size_t window_width);
std::vector<Question> make_questions(const std::vector<Passage>& passages, std::size_t window_width);

// Question records as JSON objects: id, subset, context (tokens),
// blank_index, candidates (4 token lists), answer, optional provenance.
nlohmann::json question_to_json(const Question& q);
Question question_from_json(const nlohmann::json& j);
void write_questions_jsonl(const std::filesystem::path& path, const std::vector<Question>& questions);
std::vector<Question> read_questions_jsonl(const std::filesystem::path& path);

}  // namespace clozeforge
