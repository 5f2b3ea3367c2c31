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

#include "clozeforge/embeddings.hpp"

#include <charconv>
#include <fstream>
#include <random>

#include "clozeforge/errors.hpp"
#include "clozeforge/rng.hpp"

namespace clozeforge {

std::vector<std::uint8_t> finetune_mask(const Vocab& vocab, std::size_t finetune_rows) {
  const std::size_t top = std::min(finetune_rows, vocab.size());
  std::vector<std::uint8_t> mask(vocab.size(), 0);
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    if (vocab.rank(static_cast<std::int32_t>(i)) < top) mask[i] = 1;
  }
  return mask;
}

EmbeddingTable random_embeddings(const Vocab& vocab, std::size_t dim, std::uint64_t seed,
                                 std::size_t finetune_rows) {
  if (dim == 0) throw ConfigError("embedding dimension must be positive");
  EmbeddingTable t;
  t.values = Tensor({vocab.size(), dim});
  std::mt19937_64 gen(seed);
  for (double& v : t.values.storage()) v = uniform_real(gen, -0.05, 0.05);
  t.finetune = finetune_mask(vocab, finetune_rows);
  return t;
}

namespace {

bool parse_double(std::string_view s, double& out) {
  // std::from_chars for double is available in libstdc++ 11.
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

EmbeddingTable load_embeddings(const std::filesystem::path& path, const Vocab& vocab, std::size_t dim,
                               std::uint64_t seed, std::size_t finetune_rows) {
  EmbeddingTable t = random_embeddings(vocab, dim, seed, finetune_rows);
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embeddings " + path.string());
  std::vector<std::uint8_t> seen(vocab.size(), 0);
  std::vector<double> row;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const Tokens fields = split_whitespace(line);
    if (fields.empty()) continue;
    row.clear();
    bool ok = fields.size() >= 2;
    for (std::size_t i = 1; ok && i < fields.size(); ++i) {
      double v = 0;
      ok = parse_double(fields[i], v);
      row.push_back(v);
    }
    if (!ok) {
      ++t.malformed;
      continue;
    }
    if (row.size() != dim) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(dim) +
                      " values, found " + std::to_string(row.size()));
    }
    const std::string token = lowercase(fields[0]);
    if (!vocab.contains(token)) continue;
    const auto id = static_cast<std::size_t>(vocab.id(token));
    if (seen[id]) continue;  // first occurrence wins
    seen[id] = 1;
    std::copy(row.begin(), row.end(), t.values.storage().begin() + static_cast<std::ptrdiff_t>(id * dim));
    ++t.matched;
  }
  return t;
}

}  // namespace clozeforge
