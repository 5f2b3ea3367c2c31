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

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "clozeforge/tensor.hpp"

namespace clozeforge {

/// A named weight plus its gradient accumulator.
///
/// `row_mask`, when non-empty, has one entry per leading-axis row; rows with
/// mask 0 are frozen (their gradient is zeroed before every update). Buffers
/// that are not trained at all (batch-norm running statistics) have
/// `trainable == false` and never receive gradients.
struct Parameter {
  std::string name;
  Tensor value;
  std::vector<double> grad;
  std::vector<std::uint8_t> row_mask;
  bool trainable = true;

  std::size_t row_width() const { return value.size() / value.dim(0); }
  bool row_frozen(std::size_t row) const { return !row_mask.empty() && row_mask[row] == 0; }
};

/// Owns parameters with stable addresses, iterated in insertion order.
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore& other);
  ParamStore& operator=(const ParamStore& other);
  ParamStore(ParamStore&&) noexcept = default;
  ParamStore& operator=(ParamStore&&) noexcept = default;

  Parameter& add(std::string name, Tensor value, bool trainable = true);

  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  Parameter* find(const std::string& name);
  const Parameter* find(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t size() const noexcept { return items_.size(); }
  auto begin() { return items_.begin(); }
  auto end() { return items_.end(); }
  auto begin() const { return items_.cbegin(); }
  auto end() const { return items_.cend(); }

  void zero_grad();
  // Zeroes gradient rows whose fine-tune mask is off.
  void apply_row_masks();
  // Number of scalar weights that receive updates.
  std::size_t trainable_count() const;

 private:
  std::vector<std::unique_ptr<Parameter>> items_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace clozeforge
