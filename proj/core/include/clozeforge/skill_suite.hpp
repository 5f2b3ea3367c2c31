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
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "clozeforge/evaluation.hpp"
#include "clozeforge/ngram_index.hpp"
#include "clozeforge/question.hpp"
#include "clozeforge/trainer.hpp"

namespace clozeforge {

/// Synthetic question families, each answerable through one route:
///   collocation:    the answer follows the token before the blank in the
///                   n-gram corpus; test pairs never occur in training data.
///   long_range:     the answer is the one candidate that occurs in the
///                   context, always at least min_gap tokens from the blank.
///   blank_position: the context holds four blanks, each after a different
///                   class marker; the marker before the question's own
///                   blank names the answer's class.
///   conjunction:    two ordered token pairs far from the blank jointly pick
///                   one of four answer classes.
enum class SkillFamily { collocation, long_range, blank_position, conjunction };

inline constexpr std::array<SkillFamily, 4> kSkillFamilies{SkillFamily::collocation, SkillFamily::long_range,
                                                           SkillFamily::blank_position, SkillFamily::conjunction};

std::string_view to_string(SkillFamily family);
SkillFamily parse_skill_family(std::string_view text);

struct SkillSuiteOptions {
  std::uint64_t seed = 0;
  std::size_t window = 48;
  std::size_t train_questions = 8000;
  std::size_t test_questions = 1000;
  // Share of each family, in kSkillFamilies order.
  std::array<double, 4> shares{0.4, 0.2, 0.2, 0.2};
  std::size_t min_gap = 30;
  std::size_t filler_words = 100;
  std::size_t collocation_pairs = 400;  // a quarter is held out for testing
  std::size_t pair_repeats = 3;         // corpus copies of each pair
  std::size_t long_range_pool = 16;
  std::size_t long_range_present = 3;  // pool words placed in each context
  std::size_t class_words = 5;          // words per answer class
};

struct SkillSuite {
  std::vector<Question> train;
  std::vector<Question> test;
  std::vector<Tokens> ngram_corpus;
};

// Question ids are "synthetic/<family>/<split>/<n>".
SkillSuite make_skill_suite(const SkillSuiteOptions& options);
SkillFamily family_of(const Question& q);
SkillFamily family_of_id(std::string_view id);

struct SkillTrial {
  RunOutcome outcome;
  std::map<SkillFamily, double> family_accuracy;
};

/// Trains a fresh model with the given switches on the suite's training
/// split and scores the test split.
SkillTrial run_skill_trial(const SkillSuite& suite, const NgramIndex& index, const ModelConfig& config,
                           const TrainOptions& train, std::uint64_t seed);

}  // namespace clozeforge
