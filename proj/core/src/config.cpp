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

#include "clozeforge/config.hpp"

#include <fstream>

#include "clozeforge/errors.hpp"

namespace clozeforge {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(MixMode mode) {
  return mode == MixMode::interleave ? "interleave" : "pretrain_then_finetune";
}

MixMode parse_mix_mode(std::string_view text) {
  if (text == "pretrain_then_finetune") return MixMode::pretrain_then_finetune;
  if (text == "interleave") return MixMode::interleave;
  throw ConfigError("unknown mix mode '" + std::string(text) + "'");
}

namespace {

void check_probability(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0, 1]");
}

json path_list(const std::vector<fs::path>& ps) {
  json out = json::array();
  for (const auto& p : ps) out.push_back(p.string());
  return out;
}

json paths_json(const PathsConfig& p) {
  return {{"train_dir", p.train_dir.string()},
          {"dev_dir", p.dev_dir.string()},
          {"test_dir", p.test_dir.string()},
          {"train_questions", p.train_questions.string()},
          {"test_questions", p.test_questions.string()},
          {"background", path_list(p.background)},
          {"ngram_corpora", path_list(p.ngram_corpora)},
          {"embeddings", p.embeddings.string()},
          {"ngram_index", p.ngram_index.string()},
          {"synthetic", p.synthetic.string()},
          {"checkpoint", p.checkpoint.string()},
          {"predictions", p.predictions.string()},
          {"lm_probs", p.lm_probs.string()},
          {"output_dir", p.output_dir.string()}};
}

PathsConfig paths_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("paths must be an object");
  PathsConfig p;
  for (const auto& [key, value] : j.items()) {
    auto one = [&] { return fs::path(value.get<std::string>()); };
    auto many = [&] {
      std::vector<fs::path> out;
      for (const auto& v : value) out.emplace_back(v.get<std::string>());
      return out;
    };
    if (key == "train_dir") p.train_dir = one();
    else if (key == "dev_dir") p.dev_dir = one();
    else if (key == "test_dir") p.test_dir = one();
    else if (key == "train_questions") p.train_questions = one();
    else if (key == "test_questions") p.test_questions = one();
    else if (key == "background") p.background = many();
    else if (key == "ngram_corpora") p.ngram_corpora = many();
    else if (key == "embeddings") p.embeddings = one();
    else if (key == "ngram_index") p.ngram_index = one();
    else if (key == "synthetic") p.synthetic = one();
    else if (key == "checkpoint") p.checkpoint = one();
    else if (key == "predictions") p.predictions = one();
    else if (key == "lm_probs") p.lm_probs = one();
    else if (key == "output_dir") p.output_dir = one();
    else throw ConfigError("unknown paths key '" + key + "'");
  }
  return p;
}

fs::path rebase(const fs::path& p, const fs::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return (base / p).lexically_normal();
}

void merge_into(json& target, const json& patch) {
  for (const auto& [key, value] : patch.items()) {
    if (value.is_object() && target.contains(key) && target[key].is_object()) {
      merge_into(target[key], value);
    } else {
      target[key] = value;
    }
  }
}

}  // namespace

void RunConfig::validate() const {
  model.validate();
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (eval_batch_size == 0) throw ConfigError("eval_batch_size must be positive");
  if (schedule.empty()) throw ConfigError("schedule must not be empty");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (i > 0 && schedule[i].first <= schedule[i - 1].first) {
      throw ConfigError("schedule thresholds must be strictly increasing");
    }
    if (!(schedule[i].second > 0.0)) throw ConfigError("learning rates must be positive");
  }
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  check_probability(lambda, "lambda");
  check_probability(beta, "beta");
  for (double b : beta_sweep) check_probability(b, "beta_sweep[]");
  check_probability(mix.synthetic_ratio, "mix.synthetic_ratio");
  if (mix.pretrain_steps < -1) throw ConfigError("mix.pretrain_steps must be -1 or nonnegative");
  if (checkpoint_every == 0) throw ConfigError("checkpoint_every must be positive");
  if (negatives != kNumCandidates - 1) {
    throw ConfigError("negatives must be " + std::to_string(kNumCandidates - 1));
  }
  if (!(dedup_threshold > 0.0 && dedup_threshold <= 1.0)) throw ConfigError("dedup_threshold must lie in (0, 1]");
  if (ngram_order == 0 || ngram_order > kMaxNgramOrder) {
    throw ConfigError("ngram_order must lie in [1, " + std::to_string(kMaxNgramOrder) + "]");
  }
  if (ngram_floor == 0) throw ConfigError("ngram_floor must be positive");
  if (threads == 0) throw ConfigError("threads must be positive");
  if (ablation_repeats == 0) throw ConfigError("ablation_repeats must be positive");
}

json RunConfig::to_json() const {
  json sched = json::array();
  for (const auto& [step, rate] : schedule) sched.push_back(json::array({step, rate}));
  return {{"profile", profile},
          {"paths", paths_json(paths)},
          {"seed", seed},
          {"batch_size", batch_size},
          {"max_steps", max_steps},
          {"schedule", sched},
          {"clip_norm", clip_norm},
          {"gamma", gamma},
          {"lambda", lambda},
          {"beta", beta},
          {"beta_sweep", beta_sweep},
          {"mix",
           {{"mode", to_string(mix.mode)},
            {"synthetic_ratio", mix.synthetic_ratio},
            {"pretrain_steps", mix.pretrain_steps}}},
          {"checkpoint_every", checkpoint_every},
          {"eval_batch_size", eval_batch_size},
          {"vocab_min_count", vocab_min_count},
          {"negatives", negatives},
          {"dedup_threshold", dedup_threshold},
          {"ngram_order", ngram_order},
          {"ngram_floor", ngram_floor},
          {"threads", threads},
          {"ablation_repeats", ablation_repeats},
          {"model", model.to_json()}};
}

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "profile") c.profile = value.get<std::string>();
      else if (key == "paths") c.paths = paths_from_json(value);
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
      else if (key == "max_steps") c.max_steps = value.get<std::uint64_t>();
      else if (key == "schedule") {
        c.schedule.clear();
        for (const auto& e : value) {
          if (!e.is_array() || e.size() != 2) throw ConfigError("schedule entries must be [step, rate] pairs");
          c.schedule.emplace_back(e[0].get<std::uint64_t>(), e[1].get<double>());
        }
      } else if (key == "clip_norm") c.clip_norm = value.get<double>();
      else if (key == "gamma") c.gamma = value.get<double>();
      else if (key == "lambda") c.lambda = value.get<double>();
      else if (key == "beta") c.beta = value.get<double>();
      else if (key == "beta_sweep") c.beta_sweep = value.get<std::vector<double>>();
      else if (key == "mix") {
        for (const auto& [m, v] : value.items()) {
          if (m == "mode") c.mix.mode = parse_mix_mode(v.get<std::string>());
          else if (m == "synthetic_ratio") c.mix.synthetic_ratio = v.get<double>();
          else if (m == "pretrain_steps") c.mix.pretrain_steps = v.get<std::int64_t>();
          else throw ConfigError("unknown mix key '" + m + "'");
        }
      } else if (key == "checkpoint_every") c.checkpoint_every = value.get<std::uint64_t>();
      else if (key == "eval_batch_size") c.eval_batch_size = value.get<std::size_t>();
      else if (key == "vocab_min_count") c.vocab_min_count = value.get<std::size_t>();
      else if (key == "negatives") c.negatives = value.get<std::size_t>();
      else if (key == "dedup_threshold") c.dedup_threshold = value.get<double>();
      else if (key == "ngram_order") c.ngram_order = value.get<std::size_t>();
      else if (key == "ngram_floor") c.ngram_floor = value.get<std::uint64_t>();
      else if (key == "threads") c.threads = value.get<std::size_t>();
      else if (key == "ablation_repeats") c.ablation_repeats = value.get<std::size_t>();
      else if (key == "model") c.model = ModelConfig::from_json(value);
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

std::vector<std::string> profile_names() { return {"full", "desk", "tiny"}; }

json profile_defaults(std::string_view name) {
  if (name == "full") return json::object();
  if (name == "desk") {
    return {{"batch_size", 32},
            {"max_steps", 3000},
            {"schedule", json::array({json::array({0, 3e-3}), json::array({2000, 1e-3})})},
            {"checkpoint_every", 1000},
            {"model",
             {{"hidden_units", 16},
              {"embedding_dim", 16},
              {"window", 40},
              {"conv_filters", 16},
              {"dropout", 0.1}}}};
  }
  if (name == "tiny") {
    return {{"batch_size", 16},
            {"max_steps", 500},
            {"schedule", json::array({json::array({0, 5e-3})})},
            {"checkpoint_every", 250},
            {"model",
             {{"hidden_units", 8},
              {"embedding_dim", 8},
              {"window", 12},
              {"conv_filters", 8},
              {"dropout", 0.0}}}};
  }
  throw ConfigError("unknown profile '" + std::string(name) + "'");
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (!node->is_object()) throw ConfigError("override key '" + key + "' descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

RunConfig resolve_config(const json& file, const std::vector<std::string>& overrides, const fs::path& base_dir) {
  if (!file.is_object()) throw ConfigError("config must be a JSON object");
  json patched = file;
  for (const auto& o : overrides) apply_override(patched, o);
  const std::string profile = patched.value("profile", std::string("full"));
  json doc = RunConfig{}.to_json();
  merge_into(doc, profile_defaults(profile));
  merge_into(doc, patched);
  doc["profile"] = profile;
  RunConfig c = RunConfig::from_json(doc);

  auto& p = c.paths;
  for (fs::path* one : {&p.train_dir, &p.dev_dir, &p.test_dir, &p.train_questions, &p.test_questions, &p.embeddings,
                        &p.ngram_index, &p.synthetic, &p.checkpoint, &p.predictions, &p.lm_probs, &p.output_dir}) {
    *one = rebase(*one, base_dir);
  }
  for (auto& b : p.background) b = rebase(b, base_dir);
  for (auto& b : p.ngram_corpora) b = rebase(b, base_dir);
  c.validate();
  return c;
}

RunConfig load_config(const fs::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json file = json::parse(in, nullptr, false, true);
  if (file.is_discarded()) throw ConfigError(path.string() + ": not valid JSON");
  return resolve_config(file, overrides, path.parent_path());
}

}  // namespace clozeforge
