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
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clozeforge/model.hpp"

namespace clozeforge {

using CandidateProbs = std::array<double, kNumCandidates>;

struct QuestionRecord {
  std::string id;
  Subset subset = Subset::middle;
  CandidateProbs probs{};
  std::size_t chosen = 0;
  std::size_t gold = 0;
  bool correct = false;
};

struct SubsetCounts {
  std::size_t n = 0;
  std::size_t correct = 0;
};

/// Accuracy overall and per subset. overall is the total correct count over
/// the total question count; an empty subset has no accuracy.
struct EvalReport {
  double overall = 0.0;
  std::optional<double> middle;
  std::optional<double> high;
  std::map<Subset, SubsetCounts> counts;
  std::vector<QuestionRecord> records;

  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
  std::string table() const;
};

double accuracy(const SubsetCounts& c);

// Rejects repeated ids and row-count mismatches. chosen is the argmax with
// the lowest index winning ties.
EvalReport make_report(std::span<const Question> questions, std::span<const CandidateProbs> probs);

void write_report(const std::filesystem::path& path, const EvalReport& report);
EvalReport read_report(const std::filesystem::path& path);

// Probabilities keyed by question id.
using ProbTable = std::map<std::string, CandidateProbs>;

ProbTable probs_of(const EvalReport& report);

// JSON lines {"id": ..., "probs": [4 nonnegative reals]}.
ProbTable read_lm_probs(const std::filesystem::path& path);
void write_lm_probs(const std::filesystem::path& path, const ProbTable& table);

// Divides by the row sum; DataError for negative entries or a zero sum.
CandidateProbs normalize_probs(const CandidateProbs& p);

// beta * p_model + (1 - beta) * normalize(p_lm).
CandidateProbs interpolate(const CandidateProbs& p_model, const CandidateProbs& p_lm, double beta);

// Both tables must cover exactly the question ids; a mismatch is a
// DataError listing the offending ids.
EvalReport ensemble(std::span<const Question> questions, const ProbTable& model, const ProbTable& lm, double beta);

struct AblationRow {
  std::string name;
  ModuleSwitches modules;
  std::size_t parameters = 0;
  std::vector<double> accuracies;  // one per repeat
  double median = 0.0;
  double delta = 0.0;  // median minus the full model's median
};

struct AblationTable {
  std::vector<AblationRow> rows;  // the full model first

  nlohmann::json to_json() const;
  std::string table() const;
  const AblationRow& row(const std::string& name) const;
};

struct RunOutcome {
  double accuracy = 0.0;
  std::size_t parameters = 0;
};

// The full switch set followed by each single-module removal.
std::vector<std::pair<std::string, ModuleSwitches>> ablation_variants();

double median(std::vector<double> values);

/// Runs every variant `repeats` times through `run(config, repeat)`.
AblationTable run_ablation(const ModelConfig& base, std::size_t repeats,
                           const std::function<RunOutcome(const ModelConfig&, std::size_t)>& run);

}  // namespace clozeforge
