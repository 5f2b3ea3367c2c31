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

#include "clozeforge/tokenizer.hpp"

#include <array>
#include <cctype>
#include <regex>
#include <utility>

namespace clozeforge {
namespace {

using Rule = std::pair<std::regex, const char*>;

constexpr std::string_view kBlankSentinel = "clozeforgeblankmarker";

const std::vector<Rule>& rules_before_padding() {
  static const std::vector<Rule> rules = [] {
    std::vector<Rule> r;
    // starting quotes
    r.emplace_back(std::regex(R"(^")"), "``");
    r.emplace_back(std::regex(R"((``))"), " $1 ");
    r.emplace_back(std::regex(R"(([ \(\[{<])("|''))"), "$1 `` ");
    // punctuation
    r.emplace_back(std::regex(R"(([:,])([^\d]))"), " $1 $2");
    r.emplace_back(std::regex(R"(([:,])$)"), " $1 ");
    r.emplace_back(std::regex(R"(\.\.\.)"), " ... ");
    r.emplace_back(std::regex(R"([;@#$%&])"), " $& ");
    r.emplace_back(std::regex(R"(([^\.])(\.)([\]\)}>"']*)\s*$)"), "$1 $2$3 ");
    r.emplace_back(std::regex(R"([?!])"), " $& ");
    r.emplace_back(std::regex(R"(([^'])' )"), "$1 ' ");
    // brackets and double dashes
    r.emplace_back(std::regex(R"([\]\[\(\)\{\}<>])"), " $& ");
    r.emplace_back(std::regex(R"(--)"), " -- ");
    return r;
  }();
  return rules;
}

const std::vector<Rule>& rules_after_padding() {
  static const std::vector<Rule> rules = [] {
    const auto icase = std::regex::ECMAScript | std::regex::icase;
    std::vector<Rule> r;
    // ending quotes and clitics
    r.emplace_back(std::regex(R"('')"), " '' ");
    r.emplace_back(std::regex(R"(")"), " '' ");
    r.emplace_back(std::regex(R"(([^' ])('[sS]|'[mM]|'[dD]|') )"), "$1 $2 ");
    r.emplace_back(std::regex(R"(([^' ])('ll|'LL|'re|'RE|'ve|'VE|n't|N'T) )"), "$1 $2 ");
    // two-part contractions
    for (const char* pattern : {R"(\b(can)(not)\b)", R"(\b(d)('ye)\b)", R"(\b(gim)(me)\b)",
                                R"(\b(gon)(na)\b)", R"(\b(got)(ta)\b)", R"(\b(lem)(me)\b)",
                                R"(\b(more)('n)\b)", R"(\b(wan)(na)(?=\s))"}) {
      r.emplace_back(std::regex(pattern, icase), " $1 $2 ");
    }
    for (const char* pattern : {R"( ('t)(is)\b)", R"( ('t)(was)\b)"}) {
      r.emplace_back(std::regex(pattern, icase), " $1 $2 ");
    }
    return r;
  }();
  return rules;
}

// Abbreviations whose trailing period stays attached mid-text.
bool keeps_period(std::string_view token) {
  static const std::array<std::string_view, 14> abbreviations{
      "mr.", "mrs.", "ms.", "dr.", "st.", "jr.", "sr.", "vs.", "etc.", "prof.", "no.", "mt.", "co.", "inc."};
  const std::string lower = lowercase(token);
  for (auto a : abbreviations) {
    if (lower == a) return true;
  }
  // Initialisms such as u.s. carry another period.
  return token.substr(0, token.size() - 1).find('.') != std::string_view::npos;
}

std::string normalize_space(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

std::string mark_blanks(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    if (text[i] == '_') {
      while (i < text.size() && text[i] == '_') ++i;
      out.push_back(' ');
      out.append(kBlankSentinel);
      out.push_back(' ');
    } else {
      out.push_back(text[i++]);
    }
  }
  return out;
}

}  // namespace

std::string lowercase(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string join(const Tokens& tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.append(sep);
    out.append(tokens[i]);
  }
  return out;
}

Tokens split_whitespace(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

Tokens tokenize(std::string_view text) {
  std::string s = normalize_space(mark_blanks(normalize_space(text)));
  for (const auto& [re, fmt] : rules_before_padding()) s = std::regex_replace(s, re, fmt);
  s = " " + s + " ";
  for (const auto& [re, fmt] : rules_after_padding()) s = std::regex_replace(s, re, fmt);

  Tokens raw = split_whitespace(s);
  Tokens out;
  out.reserve(raw.size() + raw.size() / 8);
  for (std::string& tok : raw) {
    if (tok == kBlankSentinel) {
      out.emplace_back(kBlankToken);
      continue;
    }
    if (tok.size() > 1 && tok.back() == '.' && !keeps_period(tok)) {
      tok.pop_back();
      out.push_back(lowercase(tok));
      out.emplace_back(".");
      continue;
    }
    out.push_back(lowercase(tok));
  }
  return out;
}

}  // namespace clozeforge
