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

#include "clozeforge/cloth.hpp"

#include <algorithm>
#include <fstream>

#include "clozeforge/errors.hpp"
#include "clozeforge/passage.hpp"

namespace clozeforge {

std::string_view to_string(Subset s) {
  switch (s) {
    case Subset::middle: return "middle";
    case Subset::high: return "high";
    case Subset::synthetic: return "synthetic";
  }
  return "unknown";
}

Subset parse_subset(std::string_view s) {
  if (s == "middle") return Subset::middle;
  if (s == "high") return Subset::high;
  if (s == "synthetic") return Subset::synthetic;
  throw DataError("unknown subset '" + std::string(s) + "'");
}

void Question::validate() const {
  if (blank_index >= context.size() || context[blank_index] != kBlankToken) {
    throw DataError("question " + id + ": blank_index does not point at <BLANK>");
  }
  if (answer >= kNumCandidates) throw DataError("question " + id + ": answer index out of range");
  for (const auto& c : candidates) {
    if (c.empty()) throw DataError("question " + id + ": empty candidate");
  }
}

void Passage::validate() const {
  for (std::size_t i = 0; i < blanks.size(); ++i) {
    if (blanks[i] >= tokens.size() || (i > 0 && blanks[i] <= blanks[i - 1])) {
      throw DataError("passage " + id + ": blank positions must be increasing and in bounds");
    }
  }
  if (options.size() != blanks.size()) throw DataError("passage " + id + ": blank/option count mismatch");
  if (!answers.empty() && answers.size() != blanks.size()) {
    throw DataError("passage " + id + ": blank/answer count mismatch");
  }
}

Passage parse_cloth(const nlohmann::json& doc, std::string id, Subset subset) {
  if (!doc.is_object() || !doc.contains("article") || !doc.contains("options") || !doc.contains("answers")) {
    throw DataError(id + ": expected an object with article, options and answers");
  }
  Passage p;
  p.id = std::move(id);
  p.subset = subset;
  p.tokens = tokenize(doc.at("article").get<std::string>());
  for (std::size_t i = 0; i < p.tokens.size(); ++i) {
    if (p.tokens[i] == kBlankToken) p.blanks.push_back(i);
  }
  const auto& options = doc.at("options");
  const auto& answers = doc.at("answers");
  if (!options.is_array() || options.size() != p.blanks.size()) {
    throw DataError(p.id + ": blank/option count mismatch (" + std::to_string(p.blanks.size()) + " blanks, " +
                    std::to_string(options.is_array() ? options.size() : 0) + " option lists)");
  }
  if (!answers.is_array() || answers.size() != p.blanks.size()) {
    throw DataError(p.id + ": blank/answer count mismatch");
  }
  for (std::size_t i = 0; i < options.size(); ++i) {
    const auto& opts = options[i];
    if (!opts.is_array() || opts.size() != kNumCandidates) {
      throw DataError(p.id + ": question " + std::to_string(i) + " must have exactly 4 options");
    }
    std::array<Tokens, kNumCandidates> cands;
    for (std::size_t k = 0; k < kNumCandidates; ++k) {
      cands[k] = tokenize(opts[k].get<std::string>());
      if (cands[k].empty()) throw DataError(p.id + ": empty option in question " + std::to_string(i));
    }
    p.options.push_back(std::move(cands));

    const std::string letter = answers[i].is_string() ? answers[i].get<std::string>() : std::string();
    if (letter.size() != 1 || letter[0] < 'A' || letter[0] > 'D') {
      throw DataError(p.id + ": invalid answer letter '" + letter + "'");
    }
    p.answers.push_back(static_cast<std::size_t>(letter[0] - 'A'));
  }
  return p;
}

Passage load_cloth_file(const std::filesystem::path& path, Subset subset) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  try {
    return parse_cloth(doc, std::string(to_string(subset)) + "/" + path.stem().string(), subset);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<Passage> load_cloth_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<Passage> out;
  for (Subset subset : {Subset::middle, Subset::high}) {
    const auto sub = dir / std::string(to_string(subset));
    if (!std::filesystem::is_directory(sub)) continue;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(sub)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) out.push_back(load_cloth_file(f, subset));
  }
  return out;
}

nlohmann::json to_cloth_json(const Passage& passage) {
  Tokens article = passage.tokens;
  for (std::size_t b : passage.blanks) article[b] = "_";
  nlohmann::json doc;
  doc["article"] = join(article);
  doc["options"] = nlohmann::json::array();
  for (const auto& opts : passage.options) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& o : opts) row.push_back(join(o));
    doc["options"].push_back(row);
  }
  doc["answers"] = nlohmann::json::array();
  for (std::size_t a : passage.answers) doc["answers"].push_back(std::string(1, static_cast<char>('A' + a)));
  return doc;
}

void write_cloth_file(const std::filesystem::path& path, const Passage& passage) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_cloth_json(passage).dump(1) << '\n';
}

void write_cloth_dir(const std::filesystem::path& dir, const std::vector<Passage>& passages) {
  for (const auto& p : passages) {
    const auto slash = p.id.find('/');
    const std::string stem = slash == std::string::npos ? p.id : p.id.substr(slash + 1);
    const auto sub = dir / std::string(to_string(p.subset));
    std::filesystem::create_directories(sub);
    write_cloth_file(sub / (stem + ".json"), p);
  }
}

std::vector<Question> make_questions(const Passage& passage, std::size_t window_width) {
  passage.validate();
  if (passage.answers.size() != passage.blanks.size()) throw DataError("passage " + passage.id + " is unlabeled");
  std::vector<Question> out;
  out.reserve(passage.blanks.size());
  for (std::size_t i = 0; i < passage.blanks.size(); ++i) {
    Window w = extract_window(passage.tokens, passage.blanks[i], window_width);
    Question q;
    q.id = passage.id + "#" + std::to_string(i);
    q.subset = passage.subset;
    q.context = std::move(w.tokens);
    q.blank_index = w.blank_index;
    q.candidates = passage.options[i];
    q.answer = passage.answers[i];
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<Question> make_questions(const std::vector<Passage>& passages, std::size_t window_width) {
  std::vector<Question> out;
  for (const auto& p : passages) {
    auto qs = make_questions(p, window_width);
    out.insert(out.end(), std::make_move_iterator(qs.begin()), std::make_move_iterator(qs.end()));
  }
  return out;
}

nlohmann::json question_to_json(const Question& q) {
  nlohmann::json j;
  j["id"] = q.id;
  j["subset"] = std::string(to_string(q.subset));
  j["context"] = q.context;
  j["blank_index"] = q.blank_index;
  j["candidates"] = nlohmann::json::array();
  for (const auto& c : q.candidates) j["candidates"].push_back(c);
  j["answer"] = q.answer;
  if (q.provenance) {
    j["provenance"] = {{"passage_id", q.provenance->passage_id},
                       {"position", q.provenance->position},
                       {"negative_ids", q.provenance->negative_ids}};
  }
  return j;
}

Question question_from_json(const nlohmann::json& j) {
  Question q;
  try {
    q.id = j.value("id", std::string());
    q.subset = parse_subset(j.value("subset", std::string("synthetic")));
    q.context = j.at("context").get<Tokens>();
    q.blank_index = j.at("blank_index").get<std::size_t>();
    const auto& cands = j.at("candidates");
    if (!cands.is_array() || cands.size() != kNumCandidates) throw DataError("expected 4 candidates");
    for (std::size_t k = 0; k < kNumCandidates; ++k) q.candidates[k] = cands[k].get<Tokens>();
    q.answer = j.at("answer").get<std::size_t>();
    if (j.contains("provenance")) {
      const auto& p = j.at("provenance");
      q.provenance = Provenance{p.at("passage_id").get<std::string>(), p.at("position").get<std::size_t>(),
                                p.at("negative_ids").get<std::vector<std::int32_t>>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed question record: ") + e.what());
  }
  q.validate();
  return q;
}

void write_questions_jsonl(const std::filesystem::path& path, const std::vector<Question>& questions) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& q : questions) out << question_to_json(q).dump() << '\n';
}

std::vector<Question> read_questions_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<Question> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(question_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace clozeforge
