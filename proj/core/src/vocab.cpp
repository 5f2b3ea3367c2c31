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

#include "clozeforge/vocab.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "clozeforge/errors.hpp"

namespace clozeforge {
namespace {

bool by_frequency(const std::pair<std::string, std::uint64_t>& a, const std::pair<std::string, std::uint64_t>& b) {
  if (a.second != b.second) return a.second > b.second;
  return a.first < b.first;
}

}  // namespace

Vocab::Vocab() { assign({}); }

Vocab Vocab::from_counts(const std::unordered_map<std::string, std::uint64_t>& counts, std::size_t min_count) {
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  for (const auto& [tok, n] : counts) {
    if (n >= min_count || tok == kPadToken || tok == kUnkToken || tok == kBlankToken) entries.emplace_back(tok, n);
  }
  Vocab v;
  v.assign(std::move(entries));
  return v;
}

Vocab Vocab::build(std::span<const Tokens> sequences, std::size_t min_count) {
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const Tokens& seq : sequences)
    for (const std::string& t : seq) ++counts[t];
  return from_counts(counts, min_count);
}

void Vocab::assign(std::vector<std::pair<std::string, std::uint64_t>> entries) {
  std::map<std::string, std::uint64_t> reserved{
      {std::string(kPadToken), 0}, {std::string(kUnkToken), 0}, {std::string(kBlankToken), 0}};
  std::vector<std::pair<std::string, std::uint64_t>> regular;
  for (auto& e : entries) {
    if (auto it = reserved.find(e.first); it != reserved.end()) it->second += e.second;
    else regular.push_back(std::move(e));
  }
  std::sort(regular.begin(), regular.end(), by_frequency);

  tokens_.clear();
  freqs_.clear();
  index_.clear();
  for (auto name : {kPadToken, kUnkToken, kBlankToken}) {
    tokens_.emplace_back(name);
    freqs_.push_back(reserved.at(std::string(name)));
  }
  for (auto& [tok, n] : regular) {
    tokens_.push_back(std::move(tok));
    freqs_.push_back(n);
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], static_cast<std::int32_t>(i));

  std::vector<std::size_t> order(tokens_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (freqs_[a] != freqs_[b]) return freqs_[a] > freqs_[b];
    return tokens_[a] < tokens_[b];
  });
  ranks_.assign(tokens_.size(), 0);
  for (std::size_t r = 0; r < order.size(); ++r) ranks_[order[r]] = r;
}

bool Vocab::contains(std::string_view token) const { return index_.count(std::string(token)) != 0; }

std::int32_t Vocab::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

std::vector<std::int32_t> Vocab::encode(const Tokens& tokens) const {
  std::vector<std::int32_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

nlohmann::json Vocab::to_json() const {
  nlohmann::json j;
  j["tokens"] = tokens_;
  j["frequencies"] = freqs_;
  return j;
}

Vocab Vocab::from_json(const nlohmann::json& j) {
  const auto tokens = j.at("tokens").get<std::vector<std::string>>();
  const auto freqs = j.at("frequencies").get<std::vector<std::uint64_t>>();
  if (tokens.size() != freqs.size()) throw DataError("vocabulary token/frequency length mismatch");
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  for (std::size_t i = 0; i < tokens.size(); ++i) entries.emplace_back(tokens[i], freqs[i]);
  Vocab v;
  v.assign(std::move(entries));
  if (v.tokens_ != tokens) throw DataError("vocabulary ids are not in canonical order");
  return v;
}

}  // namespace clozeforge
