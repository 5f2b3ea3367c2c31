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

#include "clozeforge/dataset.hpp"

#include <fstream>
#include <map>
#include <unordered_set>

#include "clozeforge/errors.hpp"
#include "clozeforge/tokenizer.hpp"

namespace clozeforge {

namespace fs = std::filesystem;

void require_path(const fs::path& path, std::string_view what) {
  if (path.empty()) throw ConfigError("paths." + std::string(what) + " is not set");
  if (!fs::exists(path)) throw ConfigError("paths." + std::string(what) + " does not exist: " + path.string());
}

std::vector<Tokens> read_text_passages(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<Tokens> out;
  std::string line;
  while (std::getline(in, line)) {
    Tokens t = tokenize(line);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

std::vector<Question> load_question_set(const fs::path& cloth_dir, const fs::path& jsonl, std::size_t window) {
  std::vector<Question> out;
  if (!cloth_dir.empty()) out = make_questions(load_cloth_dir(cloth_dir), window);
  if (!jsonl.empty()) {
    auto extra = read_questions_jsonl(jsonl);
    out.insert(out.end(), std::make_move_iterator(extra.begin()), std::make_move_iterator(extra.end()));
  }
  return out;
}

void check_unique_ids(std::span<const Question> questions) {
  std::unordered_set<std::string> seen;
  for (const auto& q : questions) {
    if (!seen.insert(q.id).second) throw DataError("duplicate question id '" + q.id + "'");
  }
}

Vocab build_question_vocab(std::span<const std::vector<Question>* const> sets, std::size_t min_count) {
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto* set : sets) {
    for (const auto& q : *set) {
      for (const auto& t : q.context) ++counts[t];
      for (const auto& c : q.candidates) {
        for (const auto& t : c) ++counts[t];
      }
    }
  }
  return Vocab::from_counts(counts, min_count);
}

std::vector<EncodedQuestion> encode_questions(const MpNet& model, std::span<const Question> questions,
                                              const NgramIndex* index) {
  std::vector<EncodedQuestion> out;
  out.reserve(questions.size());
  for (const auto& q : questions) out.push_back(model.encode(q, index));
  return out;
}

}  // namespace clozeforge
