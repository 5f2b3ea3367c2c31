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

#include "clozeforge/skill_suite.hpp"

#include <algorithm>
#include <numeric>

#include "clozeforge/dataset.hpp"
#include "clozeforge/errors.hpp"
#include "clozeforge/rng.hpp"

namespace clozeforge {

std::string_view to_string(SkillFamily family) {
  switch (family) {
    case SkillFamily::collocation: return "collocation";
    case SkillFamily::long_range: return "long_range";
    case SkillFamily::blank_position: return "blank_position";
    case SkillFamily::conjunction: return "conjunction";
  }
  return "unknown";
}

SkillFamily parse_skill_family(std::string_view text) {
  for (auto f : kSkillFamilies) {
    if (to_string(f) == text) return f;
  }
  throw DataError("unknown skill family '" + std::string(text) + "'");
}

SkillFamily family_of_id(std::string_view id) {
  const auto a = id.find('/');
  const auto b = a == std::string_view::npos ? a : id.find('/', a + 1);
  if (b == std::string_view::npos) throw DataError("not a skill suite id: '" + std::string(id) + "'");
  return parse_skill_family(id.substr(a + 1, b - a - 1));
}

SkillFamily family_of(const Question& q) { return family_of_id(q.id); }

namespace {

std::string word(std::string_view prefix, std::size_t i) { return std::string(prefix) + std::to_string(i); }

class Builder {
 public:
  Builder(const SkillSuiteOptions& o, std::mt19937_64& rng) : o_(o), rng_(rng) {
    if (o.window < o.min_gap + 8) throw ConfigError("skill suite window must exceed min_gap by at least 8");
    if (o.collocation_pairs < 8) throw ConfigError("skill suite needs at least 8 collocation pairs");
    if (o.long_range_present < 1 || o.long_range_pool < o.long_range_present + 3) {
      throw ConfigError("long-range pool too small");
    }
    held_out_ = std::max<std::size_t>(4, o.collocation_pairs / 4);
  }

  std::vector<Tokens> ngram_corpus() const {
    std::vector<Tokens> out;
    for (std::size_t r = 0; r < o_.pair_repeats; ++r) {
      for (std::size_t i = 0; i < o_.collocation_pairs; ++i) out.push_back({word("t", i), word("c", i)});
    }
    return out;
  }

  Question make(SkillFamily f, bool test, std::size_t n) {
    Question q;
    q.id = "synthetic/" + std::string(to_string(f)) + "/" + (test ? "test" : "train") + "/" + std::to_string(n);
    q.subset = Subset::synthetic;
    q.context = fillers(o_.window);
    switch (f) {
      case SkillFamily::collocation: collocation(q, test); break;
      case SkillFamily::long_range: long_range(q); break;
      case SkillFamily::blank_position: blank_position(q); break;
      case SkillFamily::conjunction: conjunction(q); break;
    }
    q.validate();
    return q;
  }

 private:
  Tokens fillers(std::size_t n) {
    Tokens t(n);
    for (auto& w : t) w = word("f", uniform_index(rng_, o_.filler_words));
    return t;
  }

  // Distinct indices drawn from [lo, hi).
  std::vector<std::size_t> distinct(std::size_t count, std::size_t lo, std::size_t hi) {
    std::vector<std::size_t> all(hi - lo);
    std::iota(all.begin(), all.end(), lo);
    shuffle(all.begin(), all.end(), rng_);
    all.resize(count);
    return all;
  }

  void place_candidates(Question& q, std::array<Tokens, kNumCandidates> options) {
    q.answer = uniform_index(rng_, kNumCandidates);
    std::swap(options[0], options[q.answer]);
    q.candidates = std::move(options);
  }

  void collocation(Question& q, bool test) {
    const std::size_t lo = test ? o_.collocation_pairs - held_out_ : 0;
    const std::size_t hi = test ? o_.collocation_pairs : o_.collocation_pairs - held_out_;
    const auto pairs = distinct(kNumCandidates, lo, hi);
    q.blank_index = 1 + uniform_index(rng_, o_.window - 1);
    q.context[q.blank_index] = std::string(kBlankToken);
    q.context[q.blank_index - 1] = word("t", pairs[0]);
    std::array<Tokens, kNumCandidates> opts;
    for (std::size_t k = 0; k < kNumCandidates; ++k) opts[k] = {word("c", pairs[k])};
    place_candidates(q, opts);
  }

  void long_range(Question& q) {
    const std::size_t W = o_.window, margin = W - o_.min_gap;
    // The blank sits near one end; pool words go beyond the gap on the far side.
    const bool left = uniform01(rng_) < 0.5;
    const std::size_t room = margin - o_.long_range_present;
    const std::size_t offset = uniform_index(rng_, std::max<std::size_t>(1, std::min<std::size_t>(8, room)));
    q.blank_index = left ? offset : W - 1 - offset;
    q.context[q.blank_index] = std::string(kBlankToken);
    const std::size_t lo = left ? q.blank_index + o_.min_gap : 0;
    const std::size_t hi = left ? W : q.blank_index - o_.min_gap + 1;
    const auto positions = distinct(o_.long_range_present, lo, hi);
    const auto words = distinct(o_.long_range_present + kNumCandidates - 1, 0, o_.long_range_pool);
    for (std::size_t i = 0; i < positions.size(); ++i) q.context[positions[i]] = word("k", words[i]);
    std::array<Tokens, kNumCandidates> opts;
    opts[0] = {word("k", words[0])};
    for (std::size_t k = 1; k < kNumCandidates; ++k) opts[k] = {word("k", words[o_.long_range_present + k - 1])};
    place_candidates(q, opts);
  }

  std::array<Tokens, kNumCandidates> class_options(std::string_view prefix, std::size_t answer_class) {
    std::array<Tokens, kNumCandidates> opts;
    opts[0] = {std::string(prefix) + std::to_string(answer_class) + "_" +
               std::to_string(uniform_index(rng_, o_.class_words))};
    std::size_t k = 1;
    for (std::size_t c = 0; c < kNumCandidates; ++c) {
      if (c == answer_class) continue;
      opts[k++] = {std::string(prefix) + std::to_string(c) + "_" + std::to_string(uniform_index(rng_, o_.class_words))};
    }
    return opts;
  }

  void blank_position(Question& q) {
    // Four marker+blank slots at distinct even offsets from 1.
    const auto slots = distinct(kNumCandidates, 0, (o_.window - 1) / 2);
    std::array<std::size_t, kNumCandidates> markers{0, 1, 2, 3};
    shuffle(markers.begin(), markers.end(), rng_);
    for (std::size_t i = 0; i < kNumCandidates; ++i) {
      const std::size_t pos = 2 * slots[i] + 1;
      q.context[pos - 1] = word("m", markers[i]);
      q.context[pos] = std::string(kBlankToken);
    }
    const std::size_t pick = uniform_index(rng_, kNumCandidates);
    q.blank_index = 2 * slots[pick] + 1;
    place_candidates(q, class_options("s", markers[pick]));
  }

  void conjunction(Question& q) {
    const std::size_t W = o_.window;
    const std::size_t near = 8, gap = o_.min_gap / 2;
    const bool left = uniform01(rng_) < 0.5;
    const std::size_t offset = uniform_index(rng_, near);
    q.blank_index = left ? offset : W - 1 - offset;
    q.context[q.blank_index] = std::string(kBlankToken);
    // Two ordered pairs in the far region, not overlapping.
    const std::size_t lo = left ? q.blank_index + gap : 0;
    const std::size_t hi = left ? W - 1 : q.blank_index - gap;
    std::size_t a, b;
    do {
      a = lo + uniform_index(rng_, hi - lo);
      b = lo + uniform_index(rng_, hi - lo);
    } while (a + 1 >= b && b + 1 >= a);
    const bool x = uniform01(rng_) < 0.5, y = uniform01(rng_) < 0.5;
    q.context[a] = x ? "p0" : "p1";
    q.context[a + 1] = x ? "p1" : "p0";
    q.context[b] = y ? "p2" : "p3";
    q.context[b + 1] = y ? "p3" : "p2";
    place_candidates(q, class_options("q", (x ? 0 : 2) + (y ? 0 : 1)));
  }

  const SkillSuiteOptions& o_;
  std::mt19937_64& rng_;
  std::size_t held_out_ = 0;
};

std::vector<std::size_t> family_counts(std::size_t total, const std::array<double, 4>& shares) {
  double sum = 0;
  for (double s : shares) {
    if (!(s >= 0.0)) throw ConfigError("skill family shares must be nonnegative");
    sum += s;
  }
  if (!(sum > 0.0)) throw ConfigError("skill family shares sum to zero");
  std::vector<std::size_t> counts(shares.size());
  std::size_t used = 0;
  for (std::size_t i = 1; i < shares.size(); ++i) {
    counts[i] = static_cast<std::size_t>(static_cast<double>(total) * shares[i] / sum);
    used += counts[i];
  }
  counts[0] = total - used;
  return counts;
}

}  // namespace

SkillSuite make_skill_suite(const SkillSuiteOptions& options) {
  std::mt19937_64 rng(derive_seed(options.seed, "skill-suite"));
  Builder b(options, rng);
  SkillSuite s;
  s.ngram_corpus = b.ngram_corpus();
  for (const bool test : {false, true}) {
    const auto counts = family_counts(test ? options.test_questions : options.train_questions, options.shares);
    auto& out = test ? s.test : s.train;
    for (std::size_t f = 0; f < kSkillFamilies.size(); ++f) {
      for (std::size_t n = 0; n < counts[f]; ++n) out.push_back(b.make(kSkillFamilies[f], test, n));
    }
    shuffle(out.begin(), out.end(), rng);
  }
  return s;
}

SkillTrial run_skill_trial(const SkillSuite& suite, const NgramIndex& index, const ModelConfig& config,
                           const TrainOptions& train, std::uint64_t seed) {
  const std::vector<Question>* sets[] = {&suite.train};
  const Vocab vocab = build_question_vocab(sets);
  MpNet model(config, vocab, derive_seed(seed, "init"));
  const auto tr = encode_questions(model, suite.train, &index);
  const auto te = encode_questions(model, suite.test, &index);
  TrainOptions opts = train;
  opts.seed = seed;
  train_model(model, tr, {}, opts);

  const auto preds = model.predict(te);
  std::vector<CandidateProbs> probs;
  for (const auto& p : preds) probs.push_back(p.probs);
  const EvalReport report = make_report(suite.test, probs);

  SkillTrial t;
  t.outcome.accuracy = report.overall;
  t.outcome.parameters = model.parameter_count();
  std::map<SkillFamily, SubsetCounts> per;
  for (const auto& rec : report.records) {
    auto& c = per[family_of_id(rec.id)];
    ++c.n;
    c.correct += rec.correct;
  }
  for (const auto& [f, c] : per) t.family_accuracy[f] = accuracy(c);
  return t;
}

}  // namespace clozeforge
