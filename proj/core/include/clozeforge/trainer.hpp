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
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clozeforge/config.hpp"
#include "clozeforge/model.hpp"
#include "clozeforge/optim.hpp"

namespace clozeforge {

struct StepRecord {
  std::uint64_t step = 0;
  double lr = 0.0;
  double loss = 0.0;
  double grad_norm = 0.0;  // before clipping
  std::string source;      // "labeled" or "synthetic"

  nlohmann::json to_json() const;
};

struct TrainOptions {
  std::size_t batch_size = 32;
  std::uint64_t max_steps = 1000;
  LrSchedule schedule;
  double clip_norm = 5.0;
  MixConfig mix;
  std::uint64_t seed = 0;
  std::uint64_t checkpoint_every = 0;  // 0: only at the end
  std::filesystem::path checkpoint_path;  // empty: no checkpoints
  std::filesystem::path metrics_path;     // empty: no metrics file
  std::string metadata;                   // stored in every checkpoint
  std::function<void(const StepRecord&)> on_step;
};

TrainOptions train_options_from(const RunConfig& config);

/// Endless mini-batch stream over one dataset. Each epoch shuffles the
/// questions, groups them by context length and shuffles the resulting
/// batches, so a batch never mixes lengths.
class BatchStream {
 public:
  BatchStream(std::span<const EncodedQuestion> data, std::size_t batch_size, std::uint64_t seed);
  std::vector<EncodedQuestion> next();
  std::size_t epoch() const noexcept { return epoch_; }

 private:
  void refill();

  std::span<const EncodedQuestion> data_;
  std::size_t batch_size_;
  std::mt19937_64 rng_;
  std::vector<std::vector<std::size_t>> batches_;
  std::size_t cursor_ = 0;
  std::size_t epoch_ = 0;
};

struct TrainResult {
  std::vector<StepRecord> trace;
};

/// Adam with gradient clipping over mini-batches drawn per the mix mode.
/// Each step appends one JSON line to the metrics file. A non-finite loss or
/// gradient aborts with NumericError; checkpoints already written remain.
TrainResult train_model(MpNet& model, std::span<const EncodedQuestion> labeled,
                        std::span<const EncodedQuestion> synthetic, const TrainOptions& options);

double accuracy_of(const MpNet& model, std::span<const EncodedQuestion> questions, std::size_t batch_size = 64);

}  // namespace clozeforge
