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

// Generates the skill suite and runs the module ablation on it.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "CLI11.hpp"

#include "clozeforge/cloth.hpp"
#include "clozeforge/errors.hpp"
#include "clozeforge/passage.hpp"
#include "clozeforge/rng.hpp"
#include "clozeforge/skill_suite.hpp"

using namespace clozeforge;

int main(int argc, char** argv) {
  CLI::App app{"clozeforge skill suite: generate the synthetic families and run the module ablation"};
  SkillSuiteOptions suite;
  ModelConfig model;
  model.hidden_units = 16;
  model.embedding_dim = 16;
  model.conv_filters = 16;
  model.dropout = 0.1;
  TrainOptions train;
  train.batch_size = 32;
  train.max_steps = 1500;
  double lr = 3e-3;
  std::size_t repeats = 3;
  std::string only;
  std::string write_dir;

  app.add_option("--seed", suite.seed, "Seed for the suite and every run");
  app.add_option("--window", suite.window, "Context window");
  app.add_option("--train", suite.train_questions, "Training questions");
  app.add_option("--test", suite.test_questions, "Test questions");
  app.add_option("--pool", suite.long_range_pool, "Long-range candidate pool size");
  app.add_option("--present", suite.long_range_present, "Pool words placed per long-range context");
  app.add_option("--gap", suite.min_gap, "Minimum blank distance for long-range evidence");
  app.add_option("--hidden", model.hidden_units, "GRU hidden units");
  app.add_option("--embedding", model.embedding_dim, "Embedding width");
  app.add_option("--filters", model.conv_filters, "Convolution filters");
  app.add_option("--dropout", model.dropout, "Dropout rate");
  app.add_option("--steps", train.max_steps, "Adam steps per run");
  app.add_option("--batch", train.batch_size, "Batch size");
  app.add_option("--lr", lr, "Learning rate");
  app.add_option("--repeats", repeats, "Runs per variant");
  app.add_option("--only", only, "Run a single variant (e.g. full, \"w/o n-gram statistics\")");
  app.add_option("--write", write_dir, "Write train.jsonl, test.jsonl and ngram_corpus.txt here and exit");
  CLI11_PARSE(app, argc, argv);

  try {
    model.window = suite.window;
    train.schedule = LrSchedule({{0, lr}});
    const SkillSuite s = make_skill_suite(suite);
    if (!write_dir.empty()) {
      std::filesystem::create_directories(write_dir);
      write_questions_jsonl(std::filesystem::path(write_dir) / "train.jsonl", s.train);
      write_questions_jsonl(std::filesystem::path(write_dir) / "test.jsonl", s.test);
      write_token_lines(std::filesystem::path(write_dir) / "ngram_corpus.txt", s.ngram_corpus);
      return 0;
    }
    const NgramIndex index = NgramIndex::build(s.ngram_corpus);
    std::cout << std::fixed << std::setprecision(3);
    for (const auto& [name, modules] : ablation_variants()) {
      if (!only.empty() && only != name) continue;
      ModelConfig c = model;
      c.modules = modules;
      std::vector<double> accs;
      for (std::size_t r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto trial = run_skill_trial(s, index, c, train, derive_seed(suite.seed, "repeat/" + std::to_string(r)));
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        accs.push_back(trial.outcome.accuracy);
        std::cout << std::left << std::setw(26) << name << " run " << r << "  acc " << trial.outcome.accuracy;
        for (const auto& [f, a] : trial.family_accuracy) std::cout << "  " << to_string(f) << " " << a;
        std::cout << "  (" << std::setprecision(1) << secs << "s)" << std::setprecision(3) << std::endl;
      }
      std::cout << std::left << std::setw(26) << name << " median " << median(accs) << std::endl;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
