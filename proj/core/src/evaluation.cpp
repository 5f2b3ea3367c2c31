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

#include "clozeforge/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_set>

#include "clozeforge/errors.hpp"

namespace clozeforge {

namespace fs = std::filesystem;
using nlohmann::json;

double accuracy(const SubsetCounts& c) {
  return c.n == 0 ? 0.0 : static_cast<double>(c.correct) / static_cast<double>(c.n);
}

EvalReport make_report(std::span<const Question> questions, std::span<const CandidateProbs> probs) {
  if (questions.size() != probs.size()) {
    throw DataError("report needs one probability row per question (" + std::to_string(questions.size()) + " vs " +
                    std::to_string(probs.size()) + ")");
  }
  EvalReport r;
  std::unordered_set<std::string> seen;
  SubsetCounts total;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    const Question& q = questions[i];
    if (!seen.insert(q.id).second) throw DataError("duplicate question id '" + q.id + "'");
    QuestionRecord rec;
    rec.id = q.id;
    rec.subset = q.subset;
    rec.probs = probs[i];
    rec.chosen = argmax_lowest(rec.probs);
    rec.gold = q.answer;
    rec.correct = rec.chosen == rec.gold;
    auto& c = r.counts[q.subset];
    ++c.n;
    ++total.n;
    if (rec.correct) {
      ++c.correct;
      ++total.correct;
    }
    r.records.push_back(std::move(rec));
  }
  r.overall = accuracy(total);
  if (auto it = r.counts.find(Subset::middle); it != r.counts.end()) r.middle = accuracy(it->second);
  if (auto it = r.counts.find(Subset::high); it != r.counts.end()) r.high = accuracy(it->second);
  return r;
}

json EvalReport::to_json() const {
  json counts_json = json::object();
  for (const auto& [subset, c] : counts) counts_json[std::string(to_string(subset))] = {{"n", c.n}, {"correct", c.correct}};
  json recs = json::array();
  for (const auto& rec : records) {
    recs.push_back({{"id", rec.id},
                    {"subset", to_string(rec.subset)},
                    {"probs", rec.probs},
                    {"chosen", rec.chosen},
                    {"gold", rec.gold},
                    {"correct", rec.correct}});
  }
  return {{"overall", overall},
          {"middle", middle ? json(*middle) : json(nullptr)},
          {"high", high ? json(*high) : json(nullptr)},
          {"counts", counts_json},
          {"records", recs}};
}

EvalReport EvalReport::from_json(const json& j) {
  try {
    EvalReport r;
    r.overall = j.at("overall").get<double>();
    if (!j.at("middle").is_null()) r.middle = j.at("middle").get<double>();
    if (!j.at("high").is_null()) r.high = j.at("high").get<double>();
    for (const auto& [name, c] : j.at("counts").items()) {
      r.counts[parse_subset(name)] = {c.at("n").get<std::size_t>(), c.at("correct").get<std::size_t>()};
    }
    for (const auto& rec : j.at("records")) {
      QuestionRecord q;
      q.id = rec.at("id").get<std::string>();
      q.subset = parse_subset(rec.at("subset").get<std::string>());
      q.probs = rec.at("probs").get<CandidateProbs>();
      q.chosen = rec.at("chosen").get<std::size_t>();
      q.gold = rec.at("gold").get<std::size_t>();
      q.correct = rec.at("correct").get<bool>();
      r.records.push_back(std::move(q));
    }
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
}

std::string EvalReport::table() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "subset      questions  correct  accuracy\n";
  SubsetCounts total;
  for (const auto& [subset, c] : counts) {
    out << std::left << std::setw(12) << to_string(subset) << std::right << std::setw(9) << c.n << std::setw(9)
        << c.correct << std::setw(9) << 100.0 * accuracy(c) << "%\n";
    total.n += c.n;
    total.correct += c.correct;
  }
  out << std::left << std::setw(12) << "overall" << std::right << std::setw(9) << total.n << std::setw(9)
      << total.correct << std::setw(9) << 100.0 * overall << "%\n";
  return out.str();
}

void write_report(const fs::path& path, const EvalReport& report) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << report.to_json().dump(2) << '\n';
}

EvalReport read_report(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  const json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError(path.string() + ": not valid JSON");
  return EvalReport::from_json(j);
}

ProbTable probs_of(const EvalReport& report) {
  ProbTable t;
  for (const auto& rec : report.records) t[rec.id] = rec.probs;
  return t;
}

ProbTable read_lm_probs(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  ProbTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw DataError(where + "not a JSON object");
    if (!j.contains("id") || !j["id"].is_string()) throw DataError(where + "missing string id");
    if (!j.contains("probs") || !j["probs"].is_array() || j["probs"].size() != kNumCandidates) {
      throw DataError(where + "probs must hold " + std::to_string(kNumCandidates) + " reals");
    }
    CandidateProbs p{};
    for (std::size_t k = 0; k < kNumCandidates; ++k) {
      if (!j["probs"][k].is_number()) throw DataError(where + "probs must hold reals");
      p[k] = j["probs"][k].get<double>();
      if (!(p[k] >= 0.0) || !std::isfinite(p[k])) throw DataError(where + "probabilities must be nonnegative");
    }
    if (!t.emplace(j["id"].get<std::string>(), p).second) {
      throw DataError(where + "duplicate id '" + j["id"].get<std::string>() + "'");
    }
  }
  return t;
}

void write_lm_probs(const fs::path& path, const ProbTable& table) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& [id, p] : table) out << json{{"id", id}, {"probs", p}}.dump() << '\n';
}

CandidateProbs normalize_probs(const CandidateProbs& p) {
  double s = 0.0;
  for (double x : p) {
    if (!(x >= 0.0)) throw DataError("probabilities must be nonnegative");
    s += x;
  }
  if (!(s > 0.0)) throw DataError("probability row sums to zero");
  CandidateProbs out{};
  for (std::size_t k = 0; k < p.size(); ++k) out[k] = p[k] / s;
  return out;
}

CandidateProbs interpolate(const CandidateProbs& p_model, const CandidateProbs& p_lm, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in [0, 1]");
  const CandidateProbs lm = normalize_probs(p_lm);
  CandidateProbs out{};
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = beta * p_model[k] + (1.0 - beta) * lm[k];
  return out;
}

namespace {

void check_ids(std::span<const Question> questions, const ProbTable& table, const std::string& what) {
  std::vector<std::string> missing, extra;
  std::unordered_set<std::string> ids;
  for (const auto& q : questions) {
    ids.insert(q.id);
    if (!table.count(q.id)) missing.push_back(q.id);
  }
  for (const auto& [id, p] : table) {
    if (!ids.count(id)) extra.push_back(id);
  }
  if (missing.empty() && extra.empty()) return;
  auto list = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size() && i < 10; ++i) s += (i ? ", " : "") + v[i];
    if (v.size() > 10) s += ", ... (" + std::to_string(v.size()) + " total)";
    return s;
  };
  std::string msg = what + " does not match the evaluation set";
  if (!missing.empty()) msg += "; missing ids: " + list(missing);
  if (!extra.empty()) msg += "; unknown ids: " + list(extra);
  throw DataError(msg);
}

}  // namespace

EvalReport ensemble(std::span<const Question> questions, const ProbTable& model, const ProbTable& lm, double beta) {
  check_ids(questions, model, "model predictions");
  check_ids(questions, lm, "LM probabilities");
  std::vector<CandidateProbs> mixed;
  mixed.reserve(questions.size());
  for (const auto& q : questions) mixed.push_back(interpolate(model.at(q.id), lm.at(q.id), beta));
  return make_report(questions, mixed);
}

std::vector<std::pair<std::string, ModuleSwitches>> ablation_variants() {
  ModuleSwitches full;
  std::vector<std::pair<std::string, ModuleSwitches>> v{{"full", full}};
  auto without = [&](const char* name, bool ModuleSwitches::*field) {
    ModuleSwitches m = full;
    m.*field = false;
    v.emplace_back(name, m);
  };
  without("w/o selective copying", &ModuleSwitches::selective_copying);
  without("w/o attentive reader", &ModuleSwitches::attentive_reader);
  without("w/o dilated convolution", &ModuleSwitches::dilated_conv);
  without("w/o n-gram statistics", &ModuleSwitches::ngram);
  return v;
}

double median(std::vector<double> values) {
  if (values.empty()) throw DataError("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

AblationTable run_ablation(const ModelConfig& base, std::size_t repeats,
                           const std::function<RunOutcome(const ModelConfig&, std::size_t)>& run) {
  if (repeats == 0) throw ConfigError("ablation needs at least one repeat");
  AblationTable t;
  for (const auto& [name, modules] : ablation_variants()) {
    ModelConfig c = base;
    c.modules = modules;
    c.validate();
    AblationRow row;
    row.name = name;
    row.modules = modules;
    for (std::size_t r = 0; r < repeats; ++r) {
      const RunOutcome o = run(c, r);
      row.accuracies.push_back(o.accuracy);
      row.parameters = o.parameters;
    }
    row.median = median(row.accuracies);
    t.rows.push_back(std::move(row));
  }
  for (auto& row : t.rows) row.delta = row.median - t.rows.front().median;
  return t;
}

const AblationRow& AblationTable::row(const std::string& name) const {
  for (const auto& r : rows) {
    if (r.name == name) return r;
  }
  throw DataError("no ablation row '" + name + "'");
}

json AblationTable::to_json() const {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"name", r.name},
                   {"modules",
                    {{"selective_copying", r.modules.selective_copying},
                     {"attentive_reader", r.modules.attentive_reader},
                     {"dilated_conv", r.modules.dilated_conv},
                     {"ngram", r.modules.ngram}}},
                   {"parameters", r.parameters},
                   {"accuracies", r.accuracies},
                   {"median", r.median},
                   {"delta", r.delta}});
  }
  return {{"rows", out}};
}

std::string AblationTable::table() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << std::left << std::setw(26) << "model" << std::right << std::setw(12) << "parameters" << std::setw(11)
      << "accuracy" << std::setw(9) << "delta" << '\n';
  for (const auto& r : rows) {
    out << std::left << std::setw(26) << r.name << std::right << std::setw(12) << r.parameters << std::setw(10)
        << 100.0 * r.median << '%' << std::setw(9) << (r.name == "full" ? std::string("") : [&] {
             std::ostringstream d;
             d << std::fixed << std::setprecision(1) << std::showpos << 100.0 * r.delta;
             return d.str();
           }())
        << '\n';
  }
  return out.str();
}

}  // namespace clozeforge
