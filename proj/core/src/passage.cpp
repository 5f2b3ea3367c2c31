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

#include "clozeforge/passage.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include "clozeforge/errors.hpp"

namespace clozeforge {

Window extract_window(const Tokens& passage, std::size_t blank_position, std::size_t width) {
  if (width < 3) throw ConfigError("window width must be at least 3");
  if (blank_position >= passage.size()) {
    throw DataError("blank position " + std::to_string(blank_position) + " outside passage of " +
                    std::to_string(passage.size()) + " tokens");
  }
  Window w;
  if (passage.size() <= width) {
    w.tokens = passage;
    w.tokens.resize(width, std::string(kPadToken));
    w.blank_index = blank_position;
    return w;
  }
  const std::size_t left = width / 2;
  std::size_t start = blank_position >= left ? blank_position - left : 0;
  start = std::min(start, passage.size() - width);
  w.tokens.assign(passage.begin() + static_cast<std::ptrdiff_t>(start),
                  passage.begin() + static_cast<std::ptrdiff_t>(start + width));
  w.blank_index = blank_position - start;
  w.start = start;
  return w;
}

namespace {

using TokenSet = std::vector<std::uint32_t>;

class Interner {
 public:
  TokenSet set_of(const Tokens& tokens) {
    TokenSet s;
    s.reserve(tokens.size());
    for (const auto& t : tokens) {
      auto [it, _] = ids_.emplace(t, static_cast<std::uint32_t>(ids_.size()));
      s.push_back(it->second);
    }
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
  }

 private:
  std::unordered_map<std::string, std::uint32_t> ids_;
};

double jaccard_sets(const TokenSet& a, const TokenSet& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) ++i;
    else if (*j < *i) ++j;
    else {
      ++inter;
      ++i;
      ++j;
    }
  }
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

}  // namespace

double jaccard(const Tokens& a, const Tokens& b) {
  Interner in;
  const TokenSet sa = in.set_of(a);
  const TokenSet sb = in.set_of(b);
  return jaccard_sets(sa, sb);
}

std::vector<std::size_t> jaccard_dedup(std::span<const Tokens> candidates, std::span<const Tokens> references,
                                       double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ConfigError("Jaccard threshold must lie in (0, 1]");
  Interner in;
  std::vector<TokenSet> refs;
  refs.reserve(references.size());
  for (const auto& r : references) refs.push_back(in.set_of(r));

  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const TokenSet c = in.set_of(candidates[i]);
    bool drop = false;
    for (const auto& r : refs) {
      // J <= min/max of the set sizes, so most pairs are rejected without a merge.
      const auto lo = std::min(c.size(), r.size());
      const auto hi = std::max(c.size(), r.size());
      if (hi > 0 && static_cast<double>(lo) / static_cast<double>(hi) <= threshold) continue;
      if (jaccard_sets(c, r) > threshold) {
        drop = true;
        break;
      }
    }
    if (!drop) kept.push_back(i);
  }
  return kept;
}

Tokens fill_answers(const Passage& passage) {
  if (passage.answers.size() != passage.blanks.size() || passage.options.size() != passage.blanks.size()) {
    throw DataError("passage " + passage.id + ": every blank needs an answer to be filled");
  }
  Tokens out;
  out.reserve(passage.tokens.size() + passage.blanks.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < passage.tokens.size(); ++i) {
    if (next < passage.blanks.size() && passage.blanks[next] == i) {
      const Tokens& ans = passage.options[next][passage.answers[next]];
      out.insert(out.end(), ans.begin(), ans.end());
      ++next;
    } else {
      out.push_back(passage.tokens[i]);
    }
  }
  return out;
}

std::vector<Tokens> read_token_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus " + path.string());
  std::vector<Tokens> out;
  std::string line;
  while (std::getline(in, line)) {
    Tokens t = split_whitespace(line);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

void write_token_lines(const std::filesystem::path& path, std::span<const Tokens> passages) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write corpus " + path.string());
  for (const auto& p : passages) out << join(p) << '\n';
}

}  // namespace clozeforge
