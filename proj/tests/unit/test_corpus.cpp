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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "doctest.h"

#include "clozeforge/cloth.hpp"
#include "clozeforge/embeddings.hpp"
#include "clozeforge/errors.hpp"
#include "clozeforge/passage.hpp"
#include "clozeforge/vocab.hpp"

using namespace clozeforge;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("clozeforge_corpus_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Tokens numbered(std::size_t n) {
  Tokens t;
  for (std::size_t i = 0; i < n; ++i) t.push_back("w" + std::to_string(i));
  return t;
}

nlohmann::json apples_doc() {
  return nlohmann::json{{"article", "I _ apples ."},
                        {"options", {{"like", "likes", "liked", "liking"}}},
                        {"answers", {"A"}}};
}

// Set-arithmetic oracle, independent of the library's interned merge.
double set_jaccard(const Tokens& a, const Tokens& b) {
  std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end()), un = sa;
  un.insert(sb.begin(), sb.end());
  if (un.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& t : sa) inter += sb.count(t);
  return static_cast<double>(inter) / static_cast<double>(un.size());
}

}  // namespace

TEST_CASE("tokenizer basics") {
  CHECK(tokenize("I _ apples.") == Tokens{"i", "<BLANK>", "apples", "."});
  CHECK(tokenize("don't") == Tokens{"do", "n't"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("   \n\t").empty());
  CHECK(tokenize("fill in ___ here") == Tokens{"fill", "in", "<BLANK>", "here"});
}

TEST_CASE("tokenizer matches the golden fixture") {
  std::ifstream in(fs::path(CLOZEFORGE_FIXTURE_DIR) / "tokenizer_golden.jsonl");
  REQUIRE(in);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    const auto text = j.at("text").get<std::string>();
    const auto expected = j.at("tokens").get<Tokens>();
    INFO(text);
    CHECK(tokenize(text) == expected);
    ++n;
  }
  CHECK(n == 50);
}

TEST_CASE("vocab reserves ids and ranks by frequency") {
  std::vector<Tokens> corpus{{"b", "a", "b"}, {"c", "a", "b"}};
  const Vocab v = Vocab::build(corpus);
  CHECK(v.size() == 6);
  CHECK(v.token(Vocab::kPad) == "<PAD>");
  CHECK(v.token(Vocab::kUnk) == "<UNK>");
  CHECK(v.token(Vocab::kBlank) == "<BLANK>");
  CHECK(v.id("b") == 3);
  CHECK(v.id("a") == 4);
  CHECK(v.id("c") == 5);
  CHECK(v.id("zebra") == Vocab::kUnk);
  CHECK(v.frequency(v.id("b")) == 3);

  std::vector<std::size_t> ranks;
  for (std::size_t i = 0; i < v.size(); ++i) ranks.push_back(v.rank(static_cast<std::int32_t>(i)));
  std::sort(ranks.begin(), ranks.end());
  for (std::size_t i = 0; i < ranks.size(); ++i) CHECK(ranks[i] == i);
  CHECK(v.rank(v.id("b")) < v.rank(v.id("a")));
  CHECK(v.rank(v.id("a")) < v.rank(v.id("c")));
}

TEST_CASE("vocab is stable under corpus order and round-trips through json") {
  std::mt19937_64 gen(7);
  std::vector<Tokens> corpus;
  for (int p = 0; p < 30; ++p) {
    Tokens t;
    for (int i = 0; i < 20; ++i) t.push_back("t" + std::to_string(gen() % 40));
    corpus.push_back(t);
  }
  const Vocab a = Vocab::build(corpus);
  std::shuffle(corpus.begin(), corpus.end(), gen);
  const Vocab b = Vocab::build(corpus);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto id = static_cast<std::int32_t>(i);
    CHECK(a.token(id) == b.token(id));
    CHECK(a.rank(id) == b.rank(id));
  }
  const Vocab c = Vocab::from_json(a.to_json());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto id = static_cast<std::int32_t>(i);
    CHECK(c.token(id) == a.token(id));
    CHECK(c.frequency(id) == a.frequency(id));
  }
}

TEST_CASE("parse_cloth maps blanks, options and answer letters") {
  const Passage p = parse_cloth(apples_doc(), "middle/x", Subset::middle);
  CHECK(p.tokens == Tokens{"i", "<BLANK>", "apples", "."});
  REQUIRE(p.blanks == std::vector<std::size_t>{1});
  CHECK(p.answers == std::vector<std::size_t>{0});
  const auto qs = make_questions(p, 80);
  REQUIRE(qs.size() == 1);
  CHECK(qs[0].answer == 0);
  CHECK(qs[0].candidates[1] == Tokens{"likes"});
  CHECK(qs[0].id == "middle/x#0");
  qs[0].validate();

  auto bad = apples_doc();
  bad["answers"] = {"E"};
  CHECK_THROWS_WITH_AS(parse_cloth(bad, "x", Subset::middle), doctest::Contains("invalid answer letter"), DataError);

  auto two = apples_doc();
  two["article"] = "I _ apples and _ pears .";
  CHECK_THROWS_WITH_AS(parse_cloth(two, "x", Subset::middle), doctest::Contains("blank/option count mismatch"),
                       DataError);
}

TEST_CASE("cloth directory errors carry the file path") {
  const auto dir = scratch_dir("badpath");
  fs::create_directories(dir / "high");
  auto two = apples_doc();
  two["article"] = "I _ apples and _ pears .";
  std::ofstream(dir / "high" / "broken.json") << two.dump();
  CHECK_THROWS_WITH_AS(load_cloth_dir(dir), doctest::Contains("broken.json"), DataError);
}

TEST_CASE("cloth write/load round-trips questions") {
  std::mt19937_64 gen(11);
  std::vector<Passage> passages;
  const std::vector<std::string> words{"the", "boy", "ran", "to", "school", "thank", "you", "it", "was", "late"};
  for (int k = 0; k < 12; ++k) {
    Passage p;
    p.subset = k % 2 ? Subset::high : Subset::middle;
    p.id = std::string(to_string(p.subset)) + "/p" + std::to_string(k);
    const std::size_t len = 5 + gen() % 120;
    for (std::size_t i = 0; i < len; ++i) {
      if (gen() % 7 == 0) {
        p.blanks.push_back(i);
        p.tokens.push_back(std::string(kBlankToken));
        std::array<Tokens, kNumCandidates> opts;
        for (auto& o : opts) {
          o.push_back(words[gen() % words.size()]);
          if (gen() % 3 == 0) o.push_back(words[gen() % words.size()]);
        }
        p.options.push_back(opts);
        p.answers.push_back(gen() % 4);
      } else {
        p.tokens.push_back(words[gen() % words.size()]);
      }
    }
    passages.push_back(p);
  }
  const auto dir = scratch_dir("roundtrip");
  write_cloth_dir(dir, passages);
  auto loaded = load_cloth_dir(dir);
  std::sort(passages.begin(), passages.end(), [](auto& a, auto& b) {
    return std::make_pair(a.subset, a.id) < std::make_pair(b.subset, b.id);
  });
  REQUIRE(loaded.size() == passages.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].id == passages[i].id);
    CHECK(loaded[i].tokens == passages[i].tokens);
    CHECK(loaded[i].blanks == passages[i].blanks);
    CHECK(loaded[i].options == passages[i].options);
    CHECK(loaded[i].answers == passages[i].answers);
  }
  // Second trip is identical to the first.
  const auto dir2 = scratch_dir("roundtrip2");
  write_cloth_dir(dir2, loaded);
  const auto again = load_cloth_dir(dir2);
  const auto q1 = make_questions(loaded, 80);
  const auto q2 = make_questions(again, 80);
  REQUIRE(q1.size() == q2.size());
  for (std::size_t i = 0; i < q1.size(); ++i) {
    CHECK(q1[i].context == q2[i].context);
    CHECK(q1[i].blank_index == q2[i].blank_index);
    CHECK(q1[i].candidates == q2[i].candidates);
    CHECK(q1[i].answer == q2[i].answer);
  }
}

TEST_CASE("extract_window examples") {
  const Tokens p200 = numbered(200);
  auto w = extract_window(p200, 100, 80);
  CHECK(w.start == 60);
  CHECK(w.blank_index == 40);
  CHECK(w.tokens.size() == 80);
  CHECK(w.tokens.front() == "w60");
  CHECK(w.tokens.back() == "w139");

  w = extract_window(p200, 0, 80);
  CHECK(w.start == 0);
  CHECK(w.blank_index == 0);

  w = extract_window(p200, 199, 80);
  CHECK(w.start == 120);
  CHECK(w.blank_index == 79);

  const Tokens p10 = numbered(10);
  w = extract_window(p10, 7, 80);
  CHECK(w.tokens.size() == 80);
  CHECK(w.blank_index == 7);
  CHECK(std::equal(p10.begin(), p10.end(), w.tokens.begin()));
  CHECK(std::all_of(w.tokens.begin() + 10, w.tokens.end(), [](auto& t) { return t == kPadToken; }));

  CHECK_THROWS_AS(extract_window(p10, 10, 80), DataError);
  CHECK_THROWS_AS(extract_window(p10, 0, 2), ConfigError);
}

TEST_CASE("extract_window property: fixed length and the question's blank at blank_index") {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t len = 1 + gen() % 250;
    const std::size_t width = 3 + gen() % 100;
    Tokens p = numbered(len);
    const std::size_t pos = gen() % len;
    p[pos] = "QUESTION";
    const auto w = extract_window(p, pos, width);
    CHECK(w.tokens.size() == width);
    CHECK(w.tokens[w.blank_index] == "QUESTION");
    CHECK(std::count(w.tokens.begin(), w.tokens.end(), "QUESTION") == 1);
    if (len >= width) CHECK(std::count(w.tokens.begin(), w.tokens.end(), std::string(kPadToken)) == 0);
  }
}

TEST_CASE("other blanks stay <BLANK> inside a question window") {
  auto doc = apples_doc();
  doc["article"] = "I _ apples and _ pears .";
  doc["options"] = {{"like", "likes", "liked", "liking"}, {"hate", "hates", "hated", "hating"}};
  doc["answers"] = {"A", "B"};
  const auto qs = make_questions(parse_cloth(doc, "middle/y", Subset::middle), 80);
  REQUIRE(qs.size() == 2);
  CHECK(qs[0].blank_index == 1);
  CHECK(qs[1].blank_index == 4);
  CHECK(qs[0].context[4] == kBlankToken);
  CHECK(qs[1].context[1] == kBlankToken);
}

TEST_CASE("jaccard examples") {
  CHECK(jaccard({"a", "b", "c"}, {"b", "c", "d"}) == doctest::Approx(0.5));
  CHECK(jaccard({"a", "b"}, {"a", "b"}) == 1.0);
  CHECK(jaccard({"a"}, {"b"}) == 0.0);

  const std::vector<Tokens> refs{{"a", "b", "c"}};
  const std::vector<Tokens> cands{{"a", "b", "c"}, {"x", "y"}, {"b", "c", "d"}};
  CHECK(jaccard_dedup(cands, refs, 0.85) == std::vector<std::size_t>{1, 2});
  CHECK_THROWS_AS(jaccard_dedup(cands, refs, 0.0), ConfigError);
}

TEST_CASE("jaccard is symmetric, dedup matches the set oracle and is idempotent") {
  std::mt19937_64 gen(5);
  auto random_passage = [&] {
    Tokens t;
    const std::size_t n = 1 + gen() % 15;
    for (std::size_t i = 0; i < n; ++i) t.push_back("t" + std::to_string(gen() % 12));
    return t;
  };
  std::vector<Tokens> cands, refs;
  for (int i = 0; i < 200; ++i) cands.push_back(random_passage());
  for (int i = 0; i < 20; ++i) refs.push_back(random_passage());
  for (int i = 0; i < 40; ++i) cands.push_back(refs[gen() % refs.size()]);

  for (double threshold : {0.3, 0.5, 0.85, 1.0}) {
    std::vector<std::size_t> expected;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      bool drop = false;
      for (const auto& r : refs) {
        CHECK(jaccard(cands[i], r) == set_jaccard(r, cands[i]));
        drop = drop || set_jaccard(cands[i], r) > threshold;
      }
      if (!drop) expected.push_back(i);
    }
    const auto kept = jaccard_dedup(cands, refs, threshold);
    CHECK(kept == expected);
    std::vector<Tokens> once;
    for (auto i : kept) once.push_back(cands[i]);
    CHECK(jaccard_dedup(once, refs, threshold).size() == once.size());
  }
}

TEST_CASE("fill_answers splices correct options") {
  Passage p;
  p.tokens = {"i", "<BLANK>", "apples"};
  p.blanks = {1};
  p.options = {{Tokens{"hate"}, Tokens{"like"}, Tokens{"eat"}, Tokens{"buy"}}};
  p.answers = {1};
  CHECK(fill_answers(p) == Tokens{"i", "like", "apples"});

  p.options[0][1] = {"thank", "you"};
  CHECK(fill_answers(p) == Tokens{"i", "thank", "you", "apples"});

  Passage plain;
  plain.tokens = {"no", "blanks"};
  CHECK(fill_answers(plain) == plain.tokens);

  p.answers.clear();
  CHECK_THROWS_AS(fill_answers(p), DataError);
}

TEST_CASE("token line cache round-trips") {
  const auto dir = scratch_dir("lines");
  const std::vector<Tokens> passages{{"a", "b"}, {"c"}, {"d", "e", "f"}};
  write_token_lines(dir / "c.txt", passages);
  CHECK(read_token_lines(dir / "c.txt") == passages);
}

TEST_CASE("embeddings: copy, random init and finetune mask") {
  std::vector<Tokens> corpus{{"a", "a", "a", "b", "b", "c"}};
  const Vocab v = Vocab::build(corpus);
  REQUIRE(v.size() == 6);
  const auto dir = scratch_dir("emb");
  {
    std::ofstream out(dir / "e.txt");
    out << "a 0.1 0.2 0.3\n";
    out << "zzz 1 2 3\n";
    out << "b 0.5 oops 0.1\n";
    out << "\n";
  }
  const auto t = load_embeddings(dir / "e.txt", v, 3, 42);
  CHECK(t.matched == 1);
  CHECK(t.malformed == 1);
  const auto a = static_cast<std::size_t>(v.id("a"));
  CHECK(t.values.at(a, 0) == 0.1);
  CHECK(t.values.at(a, 1) == 0.2);
  CHECK(t.values.at(a, 2) == 0.3);
  for (std::size_t r = 0; r < v.size(); ++r) {
    if (r == a) continue;
    for (std::size_t c = 0; c < 3; ++c) {
      CHECK(t.values.at(r, c) >= -0.05);
      CHECK(t.values.at(r, c) <= 0.05);
    }
  }
  CHECK(std::count(t.finetune.begin(), t.finetune.end(), 1) == 6);

  const auto small = load_embeddings(dir / "e.txt", v, 3, 42, 2);
  CHECK(std::count(small.finetune.begin(), small.finetune.end(), 1) == 2);
  for (std::size_t r = 0; r < v.size(); ++r) {
    CHECK(small.finetune[r] == (v.rank(static_cast<std::int32_t>(r)) < 2 ? 1 : 0));
  }

  {
    std::ofstream out(dir / "wrong.txt");
    out << "a 0.1 0.2\n";
  }
  CHECK_THROWS_AS(load_embeddings(dir / "wrong.txt", v, 3, 42), DataError);
}
