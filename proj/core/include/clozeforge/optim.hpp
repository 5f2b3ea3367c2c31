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

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "clozeforge/params.hpp"

namespace clozeforge {

/// Piecewise-constant learning rate. An entry (threshold, rate) applies to
/// every step strictly greater than its threshold, so the default schedule
/// gives 1e-3 through step 15000 and 1e-4 from step 15001.
class LrSchedule {
 public:
  using Entry = std::pair<std::uint64_t, double>;

  LrSchedule();
  explicit LrSchedule(std::vector<Entry> entries);

  double rate_at(std::uint64_t step) const;
  const std::vector<Entry>& entries() const noexcept { return entries_; }

 private:
  std::vector<Entry> entries_;
};

// Scales every gradient by max_norm / norm when the global L2 norm exceeds
// max_norm. Returns the norm measured before clipping.
double clip_gradients(std::span<double> grads, double max_norm);
double clip_gradients(ParamStore& params, double max_norm);
double global_grad_norm(const ParamStore& params);

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  LrSchedule schedule;
};

struct Moments {
  std::vector<double> first;
  std::vector<double> second;
};

class Adam {
 public:
  explicit Adam(AdamOptions options = {});

  // One bias-corrected update of every trainable parameter. Frozen rows are
  // masked out and keep their moments untouched. Throws NumericError naming
  // the parameter and step if any gradient is not finite.
  void step(ParamStore& params);

  std::uint64_t step_count() const noexcept { return step_; }
  double current_rate() const { return options_.schedule.rate_at(step_ + 1); }
  const AdamOptions& options() const noexcept { return options_; }

  const std::map<std::string, Moments>& moments() const noexcept { return moments_; }
  // Restores state loaded from a checkpoint.
  void restore(std::uint64_t step, std::map<std::string, Moments> moments);

 private:
  AdamOptions options_;
  std::uint64_t step_ = 0;
  std::map<std::string, Moments> moments_;
};

}  // namespace clozeforge
