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

#include "clozeforge/commands.hpp"

#include <fstream>
#include <iostream>
#include <optional>

#include "clozeforge/checkpoint.hpp"
#include "clozeforge/dataset.hpp"
#include "clozeforge/embeddings.hpp"
#include "clozeforge/errors.hpp"
#include "clozeforge/passage.hpp"
#include "clozeforge/rng.hpp"
#include "clozeforge/sampler.hpp"
#include "clozeforge/trainer.hpp"

namespace clozeforge {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"build-ngrams", "generate", "train", "eval", "ensemble", "ablate"};
  return names;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const NumericError*>(&e)) return 4;
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const ShapeError*>(&e)) return 3;
  if (dynamic_cast<const fs::filesystem_error*>(&e) || dynamic_cast<const json::exception*>(&e)) return 3;
  return 1;
}

namespace {

void write_manifest(const RunConfig& config, std::string_view command, const json& summary) {
  fs::create_directories(config.paths.output_dir);
  const fs::path path = config.paths.output_dir / (std::string(command) + ".manifest.json");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << json{{"command", command}, {"config", config.to_json()}, {"summary", summary}}.dump(2) << '\n';
}

std::optional<NgramIndex> load_index_if_needed(const RunConfig& config, const ModelConfig& model) {
  if (!model.modules.ngram) return std::nullopt;
  require_path(config.paths.ngram_index, "ngram_index");
  return NgramIndex::load(config.paths.ngram_index);
}

std::vector<Question> load_test_set(const RunConfig& config, std::size_t window) {
  if (config.paths.test_dir.empty() && config.paths.test_questions.empty()) {
    throw ConfigError("paths.test_dir or paths.test_questions must be set");
  }
  if (!config.paths.test_dir.empty()) require_path(config.paths.test_dir, "test_dir");
  if (!config.paths.test_questions.empty()) require_path(config.paths.test_questions, "test_questions");
  auto qs = load_question_set(config.paths.test_dir, config.paths.test_questions, window);
  if (qs.empty()) throw DataError("the test set is empty");
  check_unique_ids(qs);
  return qs;
}

struct TrainingData {
  std::vector<Question> labeled;
  std::vector<Question> synthetic;
  Vocab vocab;
};

TrainingData load_training_data(const RunConfig& config) {
  const auto& p = config.paths;
  if (p.train_dir.empty() && p.train_questions.empty() && p.synthetic.empty()) {
    throw ConfigError("no training data: set paths.train_dir, paths.train_questions or paths.synthetic");
  }
  if (!p.train_dir.empty()) require_path(p.train_dir, "train_dir");
  if (!p.train_questions.empty()) require_path(p.train_questions, "train_questions");
  TrainingData d;
  d.labeled = load_question_set(p.train_dir, p.train_questions, config.model.window);
  if (!p.synthetic.empty()) {
    require_path(p.synthetic, "synthetic");
    d.synthetic = read_questions_jsonl(p.synthetic);
  }
  if (d.labeled.empty() && d.synthetic.empty()) throw DataError("no training questions");
  std::vector<Question> all = d.labeled;
  all.insert(all.end(), d.synthetic.begin(), d.synthetic.end());
  check_unique_ids(all);
  const std::vector<Question>* sets[] = {&d.labeled, &d.synthetic};
  d.vocab = build_question_vocab(sets, config.vocab_min_count);
  return d;
}

MpNet fresh_model(const RunConfig& config, const ModelConfig& model, const Vocab& vocab, std::uint64_t seed) {
  MpNet m(model, vocab, derive_seed(seed, "init"));
  if (!config.paths.embeddings.empty()) {
    require_path(config.paths.embeddings, "embeddings");
    m.set_embeddings(load_embeddings(config.paths.embeddings, vocab, model.embedding_dim,
                                     derive_seed(seed, "embeddings"), model.finetune_rows));
  }
  return m;
}

std::vector<CandidateProbs> predict_probs(const MpNet& model, std::span<const Question> questions,
                                          const NgramIndex* index, std::size_t batch) {
  const auto encoded = encode_questions(model, questions, index);
  std::vector<CandidateProbs> out;
  for (const auto& p : model.predict(encoded, batch)) out.push_back(p.probs);
  return out;
}

std::string slug(const std::string& name) {
  std::string s;
  for (char c : name) s += std::isalnum(static_cast<unsigned char>(c)) ? c : '-';
  return s;
}

}  // namespace

std::string checkpoint_metadata(const ModelConfig& model, const Vocab& vocab, std::uint64_t seed) {
  return json{{"model", model.to_json()}, {"vocab", vocab.to_json()}, {"seed", seed}}.dump();
}

MpNet load_model(const fs::path& checkpoint) {
  Checkpoint ck = load_checkpoint(checkpoint);
  const json meta = json::parse(ck.metadata, nullptr, false);
  if (meta.is_discarded() || !meta.contains("model") || !meta.contains("vocab")) {
    throw DataError(checkpoint.string() + ": checkpoint metadata lacks the model config or vocabulary");
  }
  return MpNet(ModelConfig::from_json(meta["model"]), Vocab::from_json(meta["vocab"]), std::move(ck.params));
}

void cmd_build_ngrams(const RunConfig& config, std::ostream& out) {
  if (config.paths.ngram_index.empty()) throw ConfigError("paths.ngram_index is not set");
  std::vector<Tokens> corpus;
  for (const auto& f : config.paths.ngram_corpora) {
    require_path(f, "ngram_corpora[]");
    auto passages = read_text_passages(f);
    corpus.insert(corpus.end(), std::make_move_iterator(passages.begin()), std::make_move_iterator(passages.end()));
  }
  const NgramIndex index = NgramIndex::build(corpus, config.ngram_order, config.ngram_floor, config.threads);
  if (config.paths.ngram_index.has_parent_path()) fs::create_directories(config.paths.ngram_index.parent_path());
  index.save(config.paths.ngram_index);

  json per_order = json::array();
  out << "n-gram index: " << corpus.size() << " passages, " << index.total_tokens() << " tokens\n";
  for (std::size_t n = 1; n <= index.n_max(); ++n) {
    per_order.push_back(index.entries(n));
    out << "  order " << n << ": " << index.entries(n) << " entries\n";
  }
  out << "wrote " << config.paths.ngram_index.string() << '\n';
  write_manifest(config, "build-ngrams",
                 {{"passages", corpus.size()}, {"tokens", index.total_tokens()}, {"entries", per_order}});
}

void cmd_generate(const RunConfig& config, std::ostream& out) {
  const auto& p = config.paths;
  require_path(p.train_dir, "train_dir");
  if (p.synthetic.empty()) throw ConfigError("paths.synthetic is not set");
  const auto train = load_cloth_dir(p.train_dir);
  const auto labeled = make_questions(train, config.model.window);
  const CandidateStats stats = build_vocab_from_candidates(labeled);

  // Every labeled passage we know of, answers filled in, is a dedup reference.
  std::vector<Tokens> references;
  for (const auto& ps : train) references.push_back(fill_answers(ps));
  for (const fs::path* dir : {&p.dev_dir, &p.test_dir}) {
    if (dir->empty()) continue;
    require_path(*dir, "dev_dir/test_dir");
    for (const auto& ps : load_cloth_dir(*dir)) references.push_back(fill_answers(ps));
  }

  std::vector<Tokens> pool;
  std::vector<std::string> ids;
  std::size_t external = 0;
  for (std::size_t f = 0; f < p.background.size(); ++f) {
    require_path(p.background[f], "background[]");
    const auto passages = read_text_passages(p.background[f]);
    external += passages.size();
    for (auto i : jaccard_dedup(passages, references, config.dedup_threshold)) {
      pool.push_back(passages[i]);
      ids.push_back("bg" + std::to_string(f) + "/" + std::to_string(i));
    }
  }
  const std::size_t kept = pool.size();
  for (std::size_t i = 0; i < train.size(); ++i) {
    pool.push_back(references[i]);
    ids.push_back(train[i].id);
  }
  if (pool.empty()) throw DataError("the background pool is empty");

  const FrequencyTable unlabeled = count_unlabeled(pool, stats.vocab);
  const PositiveTable positives = build_positive_table(stats.labeled, unlabeled, config.gamma);
  const CooccurrenceTable cooc = build_cooccurrence(labeled, stats.vocab, config.lambda);
  GenerationOptions g;
  g.seed = config.seed;
  g.negatives = config.negatives;
  g.window = config.model.window;
  g.threads = config.threads;
  GenerationStats gs;
  const auto questions = generate_examples(pool, ids, stats.vocab, positives, cooc, g, &gs);
  if (p.synthetic.has_parent_path()) fs::create_directories(p.synthetic.parent_path());
  write_questions_jsonl(p.synthetic, questions);
  fs::create_directories(p.output_dir);
  write_positive_table(p.output_dir / "positive_table.tsv", stats.vocab, stats.labeled, unlabeled, positives);

  const json summary{{"labeled_passages", train.size()},
                     {"labeled_questions", labeled.size()},
                     {"candidate_entries", stats.vocab.size()},
                     {"external_passages", external},
                     {"dedup_dropped", external - kept},
                     {"pool_passages", pool.size()},
                     {"occurrences", gs.occurrences},
                     {"sampled", gs.emitted},
                     {"cap_hits", positives.capped},
                     {"rejections", gs.skipped}};
  out << "background pool: " << pool.size() << " passages (" << kept << " external kept, " << external - kept
      << " dropped as near-duplicates, " << train.size() << " labeled)\n"
      << "entries sampled: " << gs.emitted << " of " << gs.occurrences << " occurrences\n"
      << "cap hits: " << positives.capped << "\n"
      << "rejections: " << gs.skipped << "\n"
      << "wrote " << p.synthetic.string() << '\n';
  write_manifest(config, "generate", summary);
}

void cmd_train(const RunConfig& config, std::ostream& out) {
  const TrainingData data = load_training_data(config);
  const auto index = load_index_if_needed(config, config.model);
  MpNet model = fresh_model(config, config.model, data.vocab, config.seed);
  const NgramIndex* ix = index ? &*index : nullptr;
  const auto labeled = encode_questions(model, data.labeled, ix);
  const auto synthetic = encode_questions(model, data.synthetic, ix);

  TrainOptions opts = train_options_from(config);
  opts.checkpoint_path = config.paths.checkpoint.empty() ? config.paths.output_dir / "model.ckpt"
                                                         : config.paths.checkpoint;
  opts.metrics_path = config.paths.output_dir / "metrics.jsonl";
  opts.metadata = checkpoint_metadata(config.model, data.vocab, config.seed);
  const auto result = train_model(model, labeled, synthetic, opts);

  json summary{{"parameters", model.parameter_count()},
               {"vocab_size", data.vocab.size()},
               {"labeled_questions", labeled.size()},
               {"synthetic_questions", synthetic.size()},
               {"steps", result.trace.size()},
               {"checkpoint", opts.checkpoint_path.string()},
               {"metrics", opts.metrics_path.string()}};
  out << "trained " << result.trace.size() << " steps, " << model.parameter_count() << " parameters\n";
  if (!result.trace.empty()) {
    summary["final_loss"] = result.trace.back().loss;
    out << "final loss " << result.trace.back().loss << '\n';
  }
  if (!labeled.empty()) {
    const double acc = accuracy_of(model, labeled, config.eval_batch_size);
    summary["train_accuracy"] = acc;
    out << "labeled training accuracy " << acc << '\n';
  }
  if (!config.paths.dev_dir.empty()) {
    require_path(config.paths.dev_dir, "dev_dir");
    const auto dev = make_questions(load_cloth_dir(config.paths.dev_dir), config.model.window);
    if (!dev.empty()) {
      const double acc = accuracy_of(model, encode_questions(model, dev, ix), config.eval_batch_size);
      summary["dev_accuracy"] = acc;
      out << "dev accuracy " << acc << '\n';
    }
  }
  out << "wrote " << opts.checkpoint_path.string() << '\n';
  write_manifest(config, "train", summary);
}

EvalReport cmd_eval(const RunConfig& config, std::ostream& out) {
  require_path(config.paths.checkpoint, "checkpoint");
  const MpNet model = load_model(config.paths.checkpoint);
  if (!(model.config().modules == config.model.modules)) {
    throw ConfigError("module switches differ from the checkpoint's; evaluate with the switches it was trained with");
  }
  const auto questions = load_test_set(config, model.config().window);
  const auto index = load_index_if_needed(config, model.config());
  const auto probs = predict_probs(model, questions, index ? &*index : nullptr, config.eval_batch_size);
  const EvalReport report = make_report(questions, probs);
  write_report(config.paths.output_dir / "eval_report.json", report);
  out << report.table();
  write_manifest(config, "eval",
                 {{"overall", report.overall},
                  {"questions", report.records.size()},
                  {"parameters", model.parameter_count()}});
  return report;
}

EvalReport cmd_ensemble(const RunConfig& config, std::ostream& out) {
  require_path(config.paths.lm_probs, "lm_probs");
  const ProbTable lm = read_lm_probs(config.paths.lm_probs);
  std::vector<Question> questions;
  ProbTable model_probs;
  if (!config.paths.predictions.empty()) {
    require_path(config.paths.predictions, "predictions");
    const EvalReport base = read_report(config.paths.predictions);
    model_probs = probs_of(base);
    questions = load_test_set(config, config.model.window);
  } else {
    require_path(config.paths.checkpoint, "checkpoint");
    const MpNet model = load_model(config.paths.checkpoint);
    questions = load_test_set(config, model.config().window);
    const auto index = load_index_if_needed(config, model.config());
    const auto probs = predict_probs(model, questions, index ? &*index : nullptr, config.eval_batch_size);
    for (std::size_t i = 0; i < questions.size(); ++i) model_probs[questions[i].id] = probs[i];
  }
  const EvalReport report = ensemble(questions, model_probs, lm, config.beta);
  write_report(config.paths.output_dir / "ensemble_report.json", report);
  out << "beta " << config.beta << '\n' << report.table();
  json sweep = json::array();
  for (double b : config.beta_sweep) {
    const double acc = ensemble(questions, model_probs, lm, b).overall;
    sweep.push_back({{"beta", b}, {"overall", acc}});
    out << "beta " << b << ": " << 100.0 * acc << "%\n";
  }
  write_manifest(config, "ensemble", {{"beta", config.beta}, {"overall", report.overall}, {"sweep", sweep}});
  return report;
}

AblationTable cmd_ablate(const RunConfig& config, std::ostream& out) {
  const TrainingData data = load_training_data(config);
  const auto questions = load_test_set(config, config.model.window);
  ModelConfig with_ngram = config.model;
  with_ngram.modules.ngram = true;
  const auto index = load_index_if_needed(config, with_ngram);

  const auto table = run_ablation(config.model, config.ablation_repeats, [&](const ModelConfig& c, std::size_t r) {
    const std::uint64_t seed = derive_seed(config.seed, "ablate/" + std::to_string(r));
    MpNet model = fresh_model(config, c, data.vocab, seed);
    const NgramIndex* ix = c.modules.ngram ? &*index : nullptr;
    TrainOptions opts = train_options_from(config);
    opts.seed = seed;
    std::string name;
    for (const auto& [n, m] : ablation_variants()) {
      if (m == c.modules) name = n;
    }
    opts.metrics_path = config.paths.output_dir / "ablate" / (slug(name) + "-" + std::to_string(r) + ".jsonl");
    train_model(model, encode_questions(model, data.labeled, ix), encode_questions(model, data.synthetic, ix), opts);
    const auto probs = predict_probs(model, questions, ix, config.eval_batch_size);
    const RunOutcome o{make_report(questions, probs).overall, model.parameter_count()};
    out << name << " run " << r << ": " << 100.0 * o.accuracy << "%\n" << std::flush;
    return o;
  });
  fs::create_directories(config.paths.output_dir);
  std::ofstream(config.paths.output_dir / "ablation.json") << table.to_json().dump(2) << '\n';
  out << table.table();
  write_manifest(config, "ablate", table.to_json());
  return table;
}

int run_command(std::string_view name, const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (name == "build-ngrams") cmd_build_ngrams(config, out);
    else if (name == "generate") cmd_generate(config, out);
    else if (name == "train") cmd_train(config, out);
    else if (name == "eval") cmd_eval(config, out);
    else if (name == "ensemble") cmd_ensemble(config, out);
    else if (name == "ablate") cmd_ablate(config, out);
    else throw ConfigError("unknown command '" + std::string(name) + "'");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return 0;
}

}  // namespace clozeforge
