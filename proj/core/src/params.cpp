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

#include "clozeforge/params.hpp"

#include <utility>

#include "clozeforge/errors.hpp"

namespace clozeforge {

ParamStore::ParamStore(const ParamStore& other) : index_(other.index_) {
  items_.reserve(other.items_.size());
  for (const auto& p : other.items_) items_.push_back(std::make_unique<Parameter>(*p));
}

ParamStore& ParamStore::operator=(const ParamStore& other) {
  if (this != &other) {
    ParamStore copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Parameter& ParamStore::add(std::string name, Tensor value, bool trainable) {
  if (index_.count(name)) throw ConfigError("duplicate parameter name: " + name);
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->grad.assign(value.size(), 0.0);
  p->value = std::move(value);
  p->trainable = trainable;
  index_.emplace(std::move(name), items_.size());
  items_.push_back(std::move(p));
  return *items_.back();
}

Parameter* ParamStore::find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : items_[it->second].get();
}

const Parameter* ParamStore::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : items_[it->second].get();
}

Parameter& ParamStore::get(const std::string& name) {
  if (Parameter* p = find(name)) return *p;
  throw ConfigError("unknown parameter: " + name);
}

const Parameter& ParamStore::get(const std::string& name) const {
  if (const Parameter* p = find(name)) return *p;
  throw ConfigError("unknown parameter: " + name);
}

void ParamStore::zero_grad() {
  for (auto& p : items_) p->grad.assign(p->value.size(), 0.0);
}

void ParamStore::apply_row_masks() {
  for (auto& p : items_) {
    if (p->row_mask.empty()) continue;
    const std::size_t width = p->row_width();
    for (std::size_t r = 0; r < p->row_mask.size(); ++r) {
      if (p->row_mask[r]) continue;
      for (std::size_t c = 0; c < width; ++c) p->grad[r * width + c] = 0.0;
    }
  }
}

std::size_t ParamStore::trainable_count() const {
  std::size_t n = 0;
  for (const auto& p : items_) {
    if (!p->trainable) continue;
    if (p->row_mask.empty()) {
      n += p->value.size();
    } else {
      for (std::uint8_t m : p->row_mask) n += m ? p->row_width() : 0;
    }
  }
  return n;
}

}  // namespace clozeforge
