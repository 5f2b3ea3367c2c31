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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "clozeforge/model.hpp"
#include "clozeforge/optim.hpp"

namespace clozeforge {

enum class MixMode { pretrain_then_finetune, interleave };

std::string to_string(MixMode mode);
MixMode parse_mix_mode(std::string_view text);

struct MixConfig {
  MixMode mode = MixMode::pretrain_then_finetune;
  // interleave: probability that a step draws a synthetic batch.
  double synthetic_ratio = 0.5;
  // pretrain_then_finetune: steps spent on synthetic data; -1 means half of
  // max_steps.
  std::int64_t pretrain_steps = -1;
};

// Every path is optional in the schema; commands check the ones they need.
// Relative paths resolve against the config file's directory.
struct PathsConfig {
  std::filesystem::path train_dir;        // CLOTH layout: middle/*.json, high/*.json
  std::filesystem::path dev_dir;
  std::filesystem::path test_dir;
  std::filesystem::path train_questions;  // question JSONL, added to the labeled set
  std::filesystem::path test_questions;   // question JSONL, added to the test set
  std::vector<std::filesystem::path> background;     // raw text, one passage per line
  std::vector<std::filesystem::path> ngram_corpora;  // raw text, one passage per line
  std::filesystem::path embeddings;
  std::filesystem::path ngram_index;
  std::filesystem::path synthetic;    // written by generate, read by train
  std::filesystem::path checkpoint;   // written by train, read by eval/ensemble
  std::filesystem::path predictions;  // eval report consumed by ensemble
  std::filesystem::path lm_probs;
  std::filesystem::path output_dir = "out";
};

struct RunConfig {
  std::string profile = "full";
  PathsConfig paths;
  std::uint64_t seed = 0;
  std::size_t batch_size = 32;
  std::uint64_t max_steps = 60000;
  std::vector<LrSchedule::Entry> schedule{{0, 1e-3}, {15000, 1e-4}, {50000, 1e-5}};
  double clip_norm = 5.0;
  double gamma = 0.5;
  double lambda = 0.1;
  double beta = 0.5;
  std::vector<double> beta_sweep;
  MixConfig mix;
  std::uint64_t checkpoint_every = 5000;
  std::size_t eval_batch_size = 64;
  std::size_t vocab_min_count = 1;
  std::size_t negatives = 3;
  double dedup_threshold = 0.85;
  std::size_t ngram_order = kMaxNgramOrder;
  std::uint64_t ngram_floor = 1;
  std::size_t threads = 1;
  std::size_t ablation_repeats = 3;
  ModelConfig model;

  void validate() const;
  nlohmann::json to_json() const;
  // Strict: unknown keys are ConfigErrors.
  static RunConfig from_json(const nlohmann::json& j);
};

// Names accepted by the "profile" key: full, desk, tiny.
std::vector<std::string> profile_names();
nlohmann::json profile_defaults(std::string_view name);

// Applies "a.b.c=value" to a JSON document. The value is parsed as JSON when
// possible and taken as a string otherwise.
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// Resolution order: built-in defaults, the profile named in the file (or
/// by an override of "profile"), the file itself, then the overrides. The
/// seed argument, when given, replaces any configured seed.
RunConfig resolve_config(const nlohmann::json& file, const std::vector<std::string>& overrides,
                         const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides);

}  // namespace clozeforge
