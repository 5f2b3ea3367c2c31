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

#include "clozeforge/ngram_index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "clozeforge/errors.hpp"

namespace clozeforge {

namespace {

void append_key(std::string& key, const std::string& token) {
  if (!key.empty()) key.push_back(' ');
  key += token;
}

}  // namespace

NgramIndex::NgramIndex(std::size_t n_max, std::uint64_t floor) : n_max_(n_max), floor_(floor) {
  if (n_max < 1 || n_max > kMaxNgramOrder) throw ConfigError("n_max must lie in [1, 5]");
  if (floor < 1) throw ConfigError("n-gram count floor must be at least 1");
}

void NgramIndex::add_passage(const Tokens& passage) {
  total_tokens_ += passage.size();
  std::string key;
  for (std::size_t i = 0; i < passage.size(); ++i) {
    key.clear();
    for (std::size_t n = 1; n <= n_max_ && i + n <= passage.size(); ++n) {
      append_key(key, passage[i + n - 1]);
      ++tables_[n - 1][key];
    }
  }
}

void NgramIndex::merge(const NgramIndex& other) {
  if (other.n_max_ != n_max_) throw ConfigError("cannot merge n-gram indices of different order");
  total_tokens_ += other.total_tokens_;
  for (std::size_t n = 0; n < kMaxNgramOrder; ++n) {
    for (const auto& [k, c] : other.tables_[n]) tables_[n][k] += c;
  }
}

void NgramIndex::apply_floor() {
  if (floor_ <= 1) return;
  for (auto& t : tables_) std::erase_if(t, [&](const auto& kv) { return kv.second < floor_; });
}

NgramIndex NgramIndex::build(std::span<const Tokens> passages, std::size_t n_max, std::uint64_t floor,
                             std::size_t shards) {
  NgramIndex out(n_max, floor);
  shards = std::max<std::size_t>(1, std::min(shards, passages.size()));
  if (shards == 1) {
    for (const auto& p : passages) out.add_passage(p);
  } else {
    std::vector<NgramIndex> parts(shards, NgramIndex(n_max, floor));
    std::vector<std::thread> workers;
    const std::size_t per = (passages.size() + shards - 1) / shards;
    for (std::size_t s = 0; s < shards; ++s) {
      workers.emplace_back([&, s] {
        const std::size_t lo = std::min(passages.size(), s * per);
        const std::size_t hi = std::min(passages.size(), lo + per);
        for (std::size_t i = lo; i < hi; ++i) parts[s].add_passage(passages[i]);
      });
    }
    for (auto& w : workers) w.join();
    for (const auto& part : parts) out.merge(part);
  }
  out.apply_floor();
  return out;
}

std::uint64_t NgramIndex::count(std::span<const std::string> gram) const {
  if (gram.empty() || gram.size() > kMaxNgramOrder) {
    throw DataError("n-gram length " + std::to_string(gram.size()) + " outside [1, 5]");
  }
  if (gram.size() > n_max_) return 0;
  std::string key;
  for (const auto& t : gram) append_key(key, t);
  const auto& table = tables_[gram.size() - 1];
  const auto it = table.find(key);
  return it == table.end() ? 0 : it->second;
}

NgramFeatures NgramIndex::blank_features(const Tokens& context, std::size_t blank_index,
                                         const Tokens& candidate) const {
  if (blank_index >= context.size()) throw DataError("blank_index outside context");
  if (candidate.empty()) throw DataError("empty candidate");
  Tokens seq;
  seq.reserve(context.size() + candidate.size());
  seq.insert(seq.end(), context.begin(), context.begin() + static_cast<std::ptrdiff_t>(blank_index));
  seq.insert(seq.end(), candidate.begin(), candidate.end());
  seq.insert(seq.end(), context.begin() + static_cast<std::ptrdiff_t>(blank_index) + 1, context.end());

  NgramFeatures f{};
  std::size_t k = 0;
  const auto anchor = static_cast<std::ptrdiff_t>(blank_index);
  const auto len = static_cast<std::ptrdiff_t>(seq.size());
  for (std::size_t n = 1; n <= kMaxNgramOrder; ++n) {
    const auto width = static_cast<std::ptrdiff_t>(n);
    for (std::ptrdiff_t off = -(width - 1); off <= 0; ++off, ++k) {
      const std::ptrdiff_t start = anchor + off;
      if (start < 0 || start + width > len) continue;
      const std::uint64_t c = count(std::span<const std::string>(seq.data() + start, n));
      f[k] = std::log1p(static_cast<double>(c));
    }
  }
  return f;
}

std::size_t NgramIndex::entries() const {
  std::size_t total = 0;
  for (const auto& t : tables_) total += t.size();
  return total;
}

bool NgramIndex::operator==(const NgramIndex& other) const {
  return n_max_ == other.n_max_ && floor_ == other.floor_ && total_tokens_ == other.total_tokens_ &&
         tables_ == other.tables_;
}

std::vector<std::pair<std::string, std::uint64_t>> NgramIndex::sorted_entries(std::size_t n) const {
  const auto& t = tables_.at(n - 1);
  std::vector<std::pair<std::string, std::uint64_t>> out(t.begin(), t.end());
  std::sort(out.begin(), out.end());
  return out;
}

void NgramIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write n-gram index " + path.string());
  out << kNgramMagic << " n_max=" << n_max_ << " floor=" << floor_ << " tokens=" << total_tokens_ << '\n';
  for (std::size_t n = 1; n <= n_max_; ++n) {
    for (const auto& [gram, c] : sorted_entries(n)) out << n << '\t' << gram << '\t' << c << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

NgramIndex NgramIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open n-gram index " + path.string());
  std::string line;
  std::getline(in, line);
  std::istringstream header(line);
  std::string magic, n_field, floor_field, tokens_field;
  header >> magic >> n_field >> floor_field >> tokens_field;
  auto field = [&](const std::string& f, const std::string& name) -> std::uint64_t {
    if (f.rfind(name + "=", 0) != 0) throw DataError(path.string() + ": bad header field '" + f + "'");
    try {
      return std::stoull(f.substr(name.size() + 1));
    } catch (const std::exception&) {
      throw DataError(path.string() + ": bad header field '" + f + "'");
    }
  };
  if (magic != kNgramMagic) throw DataError(path.string() + ": not an n-gram index (bad magic)");
  NgramIndex idx(field(n_field, "n_max"), field(floor_field, "floor"));
  idx.total_tokens_ = field(tokens_field, "tokens");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) throw DataError(path.string() + ":" + std::to_string(lineno) + ": malformed entry");
    std::size_t n = 0;
    std::uint64_t c = 0;
    try {
      n = std::stoul(line.substr(0, t1));
      c = std::stoull(line.substr(t2 + 1));
    } catch (const std::exception&) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": malformed entry");
    }
    std::string gram = line.substr(t1 + 1, t2 - t1 - 1);
    if (n < 1 || n > idx.n_max_ || c == 0 ||
        static_cast<std::size_t>(std::count(gram.begin(), gram.end(), ' ')) + 1 != n) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": inconsistent entry");
    }
    idx.tables_[n - 1][std::move(gram)] = c;
  }
  return idx;
}

}  // namespace clozeforge
