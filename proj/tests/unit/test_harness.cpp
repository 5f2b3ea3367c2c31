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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"

#include "clozeforge/checkpoint.hpp"
#include "clozeforge/commands.hpp"
#include "clozeforge/config.hpp"
#include "clozeforge/dataset.hpp"
#include "clozeforge/errors.hpp"
#include "clozeforge/evaluation.hpp"
#include "clozeforge/passage.hpp"
#include "clozeforge/skill_suite.hpp"
#include "clozeforge/trainer.hpp"
#include "support/model_fixture.hpp"

using namespace clozeforge;
using namespace clozeforge::testing;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kMini = fs::path(CLOZEFORGE_FIXTURE_DIR) / "cloth_mini";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("clozeforge_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// The mini CLOTH fixture copied into a scratch directory, with a resolved config.
RunConfig mini_config(const fs::path& dir, std::vector<std::string> extra = {}) {
  fs::copy(kMini, dir, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
  std::ifstream in(dir / "config.json");
  return resolve_config(json::parse(in), extra, dir);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Question question(std::string id, Subset subset, std::size_t answer) {
  Question q;
  q.id = std::move(id);
  q.subset = subset;
  q.context = {"a", std::string(kBlankToken), "b"};
  q.blank_index = 1;
  q.candidates = {Tokens{"w"}, Tokens{"x"}, Tokens{"y"}, Tokens{"z"}};
  q.answer = answer;
  return q;
}

}  // namespace

TEST_CASE("config defaults, profiles and overrides") {
  const RunConfig d = resolve_config(json::object(), {}, {});
  CHECK(d.batch_size == 32);
  CHECK(d.clip_norm == 5.0);
  CHECK(d.gamma == 0.5);
  CHECK(d.lambda == 0.1);
  CHECK(d.beta == 0.5);
  CHECK(d.schedule == std::vector<LrSchedule::Entry>{{0, 1e-3}, {15000, 1e-4}, {50000, 1e-5}});
  CHECK(d.mix.mode == MixMode::pretrain_then_finetune);
  CHECK(d.model.hidden_units == 128);
  CHECK(d.model.window == 80);

  const RunConfig tiny = resolve_config({{"profile", "tiny"}, {"model", {{"hidden_units", 12}}}}, {}, {});
  CHECK(tiny.model.hidden_units == 12);
  CHECK(tiny.model.window == 12);
  const RunConfig desk = resolve_config(json::object(), {"profile=desk", "model.modules.ngram=false", "beta=0.25",
                                                          "mix.mode=interleave"},
                                        {});
  CHECK(desk.model.hidden_units == 16);
  CHECK_FALSE(desk.model.modules.ngram);
  CHECK(desk.beta == 0.25);
  CHECK(desk.mix.mode == MixMode::interleave);
  for (const auto& name : profile_names()) CHECK_NOTHROW(resolve_config({{"profile", name}}, {}, {}));

  const RunConfig rebased = resolve_config({{"paths", {{"train_dir", "data/train"}, {"test_dir", "/abs/test"}}}}, {},
                                           "/base");
  CHECK(rebased.paths.train_dir == fs::path("/base/data/train"));
  CHECK(rebased.paths.test_dir == fs::path("/abs/test"));

  const RunConfig round = RunConfig::from_json(desk.to_json());
  CHECK(round.to_json() == desk.to_json());
}

TEST_CASE("config validation rejects bad values") {
  auto bad = [](std::vector<std::string> o) { CHECK_THROWS_AS(resolve_config(json::object(), o, {}), ConfigError); };
  bad({"beta=1.5"});
  bad({"lambda=-0.1"});
  bad({"gamma=0"});
  bad({"mix.synthetic_ratio=2"});
  bad({"schedule=[[0,0.001],[0,0.0001]]"});
  bad({"schedule=[[10,0.001],[5,0.0001]]"});
  bad({"batch_size=0"});
  bad({"profile=huge"});
  bad({"nonsense=1"});
  bad({"model.hidden=3"});
  bad({"mix.mode=sometimes"});
  bad({"noequals"});
  bad({"paths.unknown=x"});
  bad({"model.modules.selective_copying=false", "model.modules.dilated_conv=false"});
  CHECK_THROWS_AS(load_config("/nonexistent/config.json", {}), ConfigError);
}

TEST_CASE("overrides parse JSON values and fall back to strings") {
  json doc = json::object();
  apply_override(doc, "a.b=3");
  apply_override(doc, "a.c=[1,2]");
  apply_override(doc, "name=hello world");
  apply_override(doc, "flag=true");
  CHECK(doc["a"]["b"] == 3);
  CHECK(doc["a"]["c"] == json::array({1, 2}));
  CHECK(doc["name"] == "hello world");
  CHECK(doc["flag"] == true);
  CHECK_THROWS_AS(apply_override(doc, "=3"), ConfigError);
  CHECK_THROWS_AS(apply_override(doc, "a..b=3"), ConfigError);
  CHECK_THROWS_AS(apply_override(doc, "name.x=3"), ConfigError);
}

TEST_CASE("batch stream covers each question once per epoch without mixing lengths") {
  const Vocab v = word_vocab(20);
  ModelConfig c = tiny_config();
  c.modules.ngram = false;
  const MpNet model(c, v, 1);
  auto qs = random_questions(23, 12, 20, 1);
  auto more = random_questions(9, 7, 20, 2);
  for (auto& q : more) q.id += "-short";
  qs.insert(qs.end(), more.begin(), more.end());
  const auto enc = encode_all(model, qs, nullptr);
  BatchStream s(enc, 5, 3);
  std::map<std::string, int> seen;
  std::size_t drawn = 0;
  while (drawn < enc.size()) {
    const auto b = s.next();
    REQUIRE(!b.empty());
    CHECK(b.size() <= 5);
    for (const auto& q : b) {
      CHECK(q.context.size() == b.front().context.size());
      ++seen[q.id];
    }
    drawn += b.size();
  }
  CHECK(drawn == enc.size());
  CHECK(seen.size() == enc.size());
  CHECK_THROWS_AS(BatchStream({}, 4, 0), DataError);
}

TEST_CASE("training is deterministic and records the schedule") {
  const Vocab v = word_vocab(20);
  const auto qs = random_questions(40, 12, 20, 3);
  const NgramIndex idx = NgramIndex::build(std::vector<Tokens>{word_list(20)});
  auto run = [&](std::uint64_t seed) {
    MpNet model(tiny_config(), v, 5);
    const auto enc = encode_all(model, qs, &idx);
    TrainOptions o;
    o.batch_size = 8;
    o.max_steps = 6;
    o.seed = seed;
    o.schedule = LrSchedule({{0, 1e-3}, {3, 1e-4}});
    return train_model(model, enc, {}, o).trace;
  };
  const auto a = run(11), b = run(11), c = run(12);
  REQUIRE(a.size() == 6);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].loss == b[i].loss);
    CHECK(a[i].grad_norm == b[i].grad_norm);
    CHECK(a[i].step == i + 1);
    CHECK(a[i].lr == (i + 1 <= 3 ? 1e-3 : 1e-4));
  }
  CHECK(a[1].loss != c[1].loss);

  const LrSchedule defaults;
  CHECK(defaults.rate_at(15000) == 1e-3);
  CHECK(defaults.rate_at(15001) == 1e-4);
  CHECK(defaults.rate_at(50001) == 1e-5);
}

TEST_CASE("mix modes pick batch sources") {
  const Vocab v = word_vocab(20);
  ModelConfig c = tiny_config();
  c.modules.ngram = false;
  MpNet model(c, v, 5);
  const auto lab = encode_all(model, random_questions(10, 12, 20, 4), nullptr);
  auto syn_q = random_questions(10, 12, 20, 5);
  for (auto& q : syn_q) q.id += "-syn";
  const auto syn = encode_all(model, syn_q, nullptr);

  TrainOptions o;
  o.batch_size = 4;
  o.max_steps = 10;
  o.mix.pretrain_steps = 4;
  MpNet m1(c, v, 1);
  const auto t1 = train_model(m1, lab, syn, o).trace;
  for (const auto& r : t1) CHECK(r.source == (r.step <= 4 ? "synthetic" : "labeled"));

  o.mix.pretrain_steps = -1;
  MpNet m2(c, v, 1);
  const auto t2 = train_model(m2, lab, syn, o).trace;
  for (const auto& r : t2) CHECK(r.source == (r.step <= 5 ? "synthetic" : "labeled"));

  o.mix.mode = MixMode::interleave;
  o.mix.synthetic_ratio = 0.0;
  MpNet m3(c, v, 1);
  for (const auto& r : train_model(m3, lab, syn, o).trace) CHECK(r.source == "labeled");
  o.mix.synthetic_ratio = 1.0;
  MpNet m4(c, v, 1);
  for (const auto& r : train_model(m4, lab, syn, o).trace) CHECK(r.source == "synthetic");

  MpNet m5(c, v, 1);
  for (const auto& r : train_model(m5, {}, syn, o).trace) CHECK(r.source == "synthetic");
  MpNet m6(c, v, 1);
  CHECK_THROWS_AS(train_model(m6, {}, {}, o), DataError);
}

TEST_CASE("non-finite loss aborts and keeps the last checkpoint") {
  const fs::path dir = scratch("nan");
  const Vocab v = word_vocab(20);
  ModelConfig c = tiny_config();
  c.modules.ngram = false;
  MpNet model(c, v, 5);
  const auto enc = encode_all(model, random_questions(10, 12, 20, 6), nullptr);
  TrainOptions o;
  o.batch_size = 4;
  o.max_steps = 10;
  o.checkpoint_every = 1;
  o.checkpoint_path = dir / "model.ckpt";
  o.metrics_path = dir / "metrics.jsonl";
  o.on_step = [&](const StepRecord& r) {
    if (r.step == 2) {
      for (double& x : model.params().get("out.b").value.storage()) x = std::nan("");
    }
  };
  CHECK_THROWS_AS(train_model(model, enc, {}, o), NumericError);
  const Checkpoint ck = load_checkpoint(dir / "model.ckpt");
  CHECK(ck.step == 2);
  for (double x : ck.params.get("out.b").value.values()) CHECK(std::isfinite(x));
  std::ifstream m(dir / "metrics.jsonl");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(m, line)) {
    const json j = json::parse(line);
    CHECK(j.contains("step"));
    CHECK(j.contains("lr"));
    CHECK(j.contains("loss"));
    CHECK(j.contains("grad_norm"));
    ++lines;
  }
  CHECK(lines == 2);
}

TEST_CASE("report arithmetic") {
  std::vector<Question> qs;
  std::vector<CandidateProbs> probs;
  std::mt19937_64 rng(8);
  for (int i = 0; i < 57; ++i) {
    qs.push_back(question("q" + std::to_string(i), i % 3 ? Subset::middle : Subset::high, uniform_index(rng, 4)));
    CandidateProbs p{};
    for (auto& x : p) x = uniform01(rng);
    probs.push_back(normalize_probs(p));
  }
  const EvalReport r = make_report(qs, probs);
  const auto& m = r.counts.at(Subset::middle);
  const auto& h = r.counts.at(Subset::high);
  CHECK(m.n + h.n == qs.size());
  CHECK(r.overall == static_cast<double>(m.correct + h.correct) / static_cast<double>(m.n + h.n));
  CHECK(std::abs(r.overall - (m.n * *r.middle + h.n * *r.high) / (m.n + h.n)) < 1e-15);
  CHECK(r.records.size() == qs.size());

  std::vector<CandidateProbs> gold;
  for (const auto& q : qs) {
    CandidateProbs p{};
    p[q.answer] = 1.0;
    gold.push_back(p);
  }
  CHECK(make_report(qs, gold).overall == 1.0);

  const EvalReport back = EvalReport::from_json(r.to_json());
  CHECK(back.to_json() == r.to_json());
  CHECK(r.table().find("overall") != std::string::npos);

  auto dup = qs;
  dup[5].id = dup[4].id;
  CHECK_THROWS_AS(make_report(dup, probs), DataError);
  CHECK_THROWS_AS(make_report(qs, std::span<const CandidateProbs>(probs).first(3)), DataError);

  const EvalReport only_m = make_report(std::span<const Question>(qs).subspan(1, 2),
                                        std::span<const CandidateProbs>(probs).subspan(1, 2));
  CHECK_FALSE(only_m.high.has_value());
  CHECK(only_m.to_json()["high"].is_null());
}

TEST_CASE("balanced random predictor scores near chance") {
  std::vector<Question> qs;
  std::vector<CandidateProbs> probs;
  std::mt19937_64 rng(21);
  for (int i = 0; i < 4000; ++i) {
    qs.push_back(question("q" + std::to_string(i), Subset::middle, uniform_index(rng, 4)));
    CandidateProbs p{};
    p[uniform_index(rng, 4)] = 1.0;
    probs.push_back(p);
  }
  // Three standard errors of a binomial proportion at n = 4000, p = 0.25.
  CHECK(std::abs(make_report(qs, probs).overall - 0.25) < 3 * std::sqrt(0.25 * 0.75 / 4000));
}

TEST_CASE("ensemble worked example and algebra") {
  CHECK(interpolate({0.4, 0.3, 0.2, 0.1}, {0.1, 0.2, 0.3, 0.4}, 0.5) == CandidateProbs{0.25, 0.25, 0.25, 0.25});
  std::vector<Question> one{question("x", Subset::high, 1)};
  const EvalReport r = ensemble(one, {{"x", {0.4, 0.3, 0.2, 0.1}}}, {{"x", {0.1, 0.2, 0.3, 0.4}}}, 0.5);
  CHECK(r.records[0].chosen == 0);
  CHECK_FALSE(r.records[0].correct);

  // LM rows are normalised first.
  const auto n = interpolate({0.25, 0.25, 0.25, 0.25}, {2, 2, 4, 0}, 0.0);
  CHECK(n == CandidateProbs{0.25, 0.25, 0.5, 0.0});
  CHECK_THROWS_AS(normalize_probs({0, 0, 0, 0}), DataError);
  CHECK_THROWS_AS(normalize_probs({-1, 1, 1, 1}), DataError);
  CHECK_THROWS_AS(interpolate({1, 0, 0, 0}, {1, 0, 0, 0}, 1.5), ConfigError);

  CHECK_THROWS_WITH_AS(ensemble(one, {{"x", {1, 0, 0, 0}}}, {{"y", {1, 0, 0, 0}}}, 0.5),
                       doctest::Contains("missing ids: x"), DataError);
}

TEST_CASE("LM probability files") {
  const fs::path dir = scratch("lm");
  write_lm_probs(dir / "lm.jsonl", {{"a", {1, 2, 3, 4}}, {"b", {0, 0, 1, 0}}});
  const auto t = read_lm_probs(dir / "lm.jsonl");
  CHECK(t.at("a") == CandidateProbs{1, 2, 3, 4});
  auto bad = [&](const std::string& text) {
    std::ofstream(dir / "bad.jsonl") << text;
    CHECK_THROWS_AS(read_lm_probs(dir / "bad.jsonl"), DataError);
  };
  bad("{\"id\":\"a\",\"probs\":[1,2,3]}\n");
  bad("{\"id\":\"a\",\"probs\":[1,2,3,-4]}\n");
  bad("{\"id\":\"a\",\"probs\":[1,2,3,4]}\n{\"id\":\"a\",\"probs\":[1,2,3,4]}\n");
  bad("{\"probs\":[1,2,3,4]}\n");
  bad("not json\n");
}

TEST_CASE("ablation bookkeeping") {
  const auto variants = ablation_variants();
  REQUIRE(variants.size() == 5);
  CHECK(variants[0].first == "full");
  CHECK(median({3, 1, 2}) == 2);
  CHECK(median({4, 1, 2, 3}) == 2.5);
  std::size_t calls = 0;
  const auto table = run_ablation(tiny_config(), 3, [&](const ModelConfig& c, std::size_t r) {
    ++calls;
    const MpNet m(c, word_vocab(10), 1);
    return RunOutcome{0.5 + 0.1 * static_cast<double>(c.modules.ngram) + 0.01 * static_cast<double>(r),
                      m.parameter_count()};
  });
  CHECK(calls == 15);
  CHECK(table.rows[0].median == doctest::Approx(0.61));
  CHECK(table.row("w/o n-gram statistics").delta == doctest::Approx(-0.1));
  CHECK(table.row("w/o attentive reader").delta == doctest::Approx(0.0));
  for (std::size_t i = 1; i < table.rows.size(); ++i) CHECK(table.rows[i].parameters < table.rows[0].parameters);
  CHECK(table.table().find("w/o dilated convolution") != std::string::npos);
  CHECK_THROWS_AS(table.row("nope"), DataError);
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ConfigError("x")) == 2);
  CHECK(exit_code_for(DataError("x")) == 3);
  CHECK(exit_code_for(ShapeError("x")) == 3);
  CHECK(exit_code_for(NumericError("x")) == 4);
  CHECK(exit_code_for(std::runtime_error("x")) == 1);
  std::ostringstream out, err;
  CHECK(run_command("frobnicate", RunConfig{}, out, err) == 2);
}

TEST_CASE("build-ngrams: deterministic file, empty corpus gives a header only") {
  const fs::path dir = scratch("ngrams");
  RunConfig c = mini_config(dir);
  std::ostringstream out;
  cmd_build_ngrams(c, out);
  const std::string first = slurp(c.paths.ngram_index);
  cmd_build_ngrams(c, out);
  CHECK(slurp(c.paths.ngram_index) == first);
  const NgramIndex idx = NgramIndex::load(c.paths.ngram_index);
  CHECK(idx.count({"wait", "to"}) == 0);
  CHECK(idx.count({"had", "to", "wait"}) == 1);

  c.paths.ngram_corpora.clear();
  cmd_build_ngrams(c, out);
  const std::string empty = slurp(c.paths.ngram_index);
  CHECK(std::count(empty.begin(), empty.end(), '\n') == 1);
  CHECK(fs::exists(c.paths.output_dir / "build-ngrams.manifest.json"));
}

TEST_CASE("generate: dedup, determinism, schema and empty pool") {
  const fs::path dir = scratch("generate");
  RunConfig c = mini_config(dir);
  std::ostringstream out;
  cmd_generate(c, out);
  const json manifest = json::parse(slurp(c.paths.output_dir / "generate.manifest.json"));
  CHECK(manifest["summary"]["dedup_dropped"] == 1);
  CHECK(manifest["command"] == "generate");
  CHECK(manifest["config"]["seed"] == c.seed);
  const std::string first = slurp(c.paths.synthetic);
  cmd_generate(c, out);
  CHECK(slurp(c.paths.synthetic) == first);
  for (const auto& q : read_questions_jsonl(c.paths.synthetic)) {
    CHECK(q.subset == Subset::synthetic);
    CHECK(q.provenance.has_value());
    CHECK(q.context.size() == c.model.window);
  }

  // Labeled passages alone still form a pool.
  c.paths.background.clear();
  CHECK_NOTHROW(cmd_generate(c, out));

  const fs::path empty_train = dir / "empty_train";
  fs::create_directories(empty_train / "middle");
  std::ofstream(empty_train / "middle" / "e.json")
      << R"({"article": "nothing here .", "options": [], "answers": []})";
  RunConfig e = c;
  e.paths.train_dir = empty_train;
  CHECK_THROWS_AS(cmd_generate(e, out), DataError);
}

TEST_CASE("train and eval through the command layer") {
  const fs::path dir = scratch("train");
  RunConfig c = mini_config(dir, {"max_steps=12"});
  std::ostringstream out;
  cmd_build_ngrams(c, out);
  cmd_generate(c, out);
  cmd_train(c, out);
  const std::string trace = slurp(c.paths.output_dir / "metrics.jsonl");
  cmd_train(c, out);
  CHECK(slurp(c.paths.output_dir / "metrics.jsonl") == trace);
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 12);

  const EvalReport r = cmd_eval(c, out);
  CHECK(r.records.size() == 4);
  CHECK(r.middle.has_value());
  CHECK(r.high.has_value());
  CHECK(fs::exists(c.paths.output_dir / "eval_report.json"));

  // Reloading the checkpoint reproduces the scores.
  CHECK(cmd_eval(c, out).to_json() == r.to_json());

  RunConfig off = c;
  off.model.modules.attentive_reader = false;
  CHECK_THROWS_AS(cmd_eval(off, out), ConfigError);

  // Ensemble from the saved report with the model's own probabilities as the LM.
  write_lm_probs(dir / "lm.jsonl", probs_of(r));
  RunConfig ens = c;
  ens.paths.lm_probs = dir / "lm.jsonl";
  ens.paths.predictions = c.paths.output_dir / "eval_report.json";
  const EvalReport e = cmd_ensemble(ens, out);
  CHECK(e.overall == r.overall);
  for (std::size_t i = 0; i < e.records.size(); ++i) {
    CHECK(e.records[i].chosen == r.records[i].chosen);
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(e.records[i].probs[k] - r.records[i].probs[k]) < 1e-12);
  }

  std::ostringstream err;
  RunConfig missing = c;
  missing.paths.checkpoint = dir / "nope.ckpt";
  CHECK(run_command("eval", missing, out, err) == 2);
  RunConfig dup = c;
  dup.paths.test_questions = dir / "dup.jsonl";
  write_questions_jsonl(dup.paths.test_questions, {question("middle/m201#0", Subset::middle, 0)});
  CHECK(run_command("eval", dup, out, err) == 3);
}

TEST_CASE("skill suite structure") {
  SkillSuiteOptions o;
  o.train_questions = 400;
  o.test_questions = 200;
  const SkillSuite s = make_skill_suite(o);
  CHECK(s.train.size() == 400);
  CHECK(s.test.size() == 200);
  const SkillSuite again = make_skill_suite(o);
  CHECK(again.train == s.train);
  CHECK(again.test == s.test);

  std::set<std::string> train_tokens;
  for (const auto& q : s.train) {
    for (const auto& c : q.candidates) train_tokens.insert(c[0]);
    train_tokens.insert(q.context.begin(), q.context.end());
  }
  std::map<SkillFamily, std::size_t> counts;
  std::array<std::size_t, 4> answers{};
  for (const auto& q : s.test) {
    CHECK_NOTHROW(q.validate());
    CHECK(q.context.size() == o.window);
    ++counts[family_of(q)];
    ++answers[q.answer];
    switch (family_of(q)) {
      case SkillFamily::collocation:
        for (const auto& c : q.candidates) CHECK_FALSE(train_tokens.count(c[0]));
        CHECK_FALSE(train_tokens.count(q.context[q.blank_index - 1]));
        break;
      case SkillFamily::long_range: {
        std::size_t present = 0;
        for (std::size_t k = 0; k < 4; ++k) {
          for (std::size_t t = 0; t < q.context.size(); ++t) {
            if (q.context[t] != q.candidates[k][0]) continue;
            ++present;
            CHECK(k == q.answer);
            const std::size_t gap = t > q.blank_index ? t - q.blank_index : q.blank_index - t;
            CHECK(gap >= 30);
          }
        }
        CHECK(present == 1);
        break;
      }
      case SkillFamily::blank_position:
        CHECK(std::count(q.context.begin(), q.context.end(), std::string(kBlankToken)) == 4);
        CHECK(q.candidates[q.answer][0][1] == q.context[q.blank_index - 1][1]);
        break;
      case SkillFamily::conjunction: {
        CHECK(std::count(q.context.begin(), q.context.end(), std::string(kBlankToken)) == 1);
        for (const char* p : {"p0", "p1", "p2", "p3"}) CHECK(std::count(q.context.begin(), q.context.end(), p) == 1);
        break;
      }
    }
  }
  CHECK(counts[SkillFamily::collocation] == 80);
  for (auto f : {SkillFamily::long_range, SkillFamily::blank_position, SkillFamily::conjunction}) {
    CHECK(counts[f] == 40);
  }
  for (auto a : answers) CHECK(a > 20);

  // Only collocation words reach the n-gram corpus.
  for (const auto& line : s.ngram_corpus) {
    for (const auto& t : line) CHECK((t[0] == 't' || t[0] == 'c'));
  }
  CHECK_THROWS_AS(family_of_id("middle/x#1"), DataError);
}
