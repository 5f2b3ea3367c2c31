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

#include "clozeforge/trainer.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <optional>

#include "clozeforge/checkpoint.hpp"
#include "clozeforge/errors.hpp"
#include "clozeforge/rng.hpp"

namespace clozeforge {

namespace fs = std::filesystem;

nlohmann::json StepRecord::to_json() const {
  return {{"step", step}, {"lr", lr}, {"loss", loss}, {"grad_norm", grad_norm}, {"source", source}};
}

TrainOptions train_options_from(const RunConfig& config) {
  TrainOptions o;
  o.batch_size = config.batch_size;
  o.max_steps = config.max_steps;
  o.schedule = LrSchedule(config.schedule);
  o.clip_norm = config.clip_norm;
  o.mix = config.mix;
  o.seed = config.seed;
  o.checkpoint_every = config.checkpoint_every;
  return o;
}

BatchStream::BatchStream(std::span<const EncodedQuestion> data, std::size_t batch_size, std::uint64_t seed)
    : data_(data), batch_size_(batch_size), rng_(seed) {
  if (data.empty()) throw DataError("cannot draw batches from an empty dataset");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
}

void BatchStream::refill() {
  std::vector<std::size_t> order(data_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  shuffle(order.begin(), order.end(), rng_);
  std::map<std::size_t, std::vector<std::size_t>> by_length;
  for (auto i : order) by_length[data_[i].context.size()].push_back(i);
  batches_.clear();
  for (auto& [len, idx] : by_length) {
    for (std::size_t s = 0; s < idx.size(); s += batch_size_) {
      batches_.emplace_back(idx.begin() + static_cast<std::ptrdiff_t>(s),
                            idx.begin() + static_cast<std::ptrdiff_t>(std::min(idx.size(), s + batch_size_)));
    }
  }
  shuffle(batches_.begin(), batches_.end(), rng_);
  cursor_ = 0;
  ++epoch_;
}

std::vector<EncodedQuestion> BatchStream::next() {
  if (cursor_ >= batches_.size()) refill();
  std::vector<EncodedQuestion> out;
  for (auto i : batches_[cursor_]) out.push_back(data_[i]);
  ++cursor_;
  return out;
}

namespace {

void write_checkpoint_atomically(const fs::path& path, const ParamStore& params, const Adam& adam,
                                 const std::string& metadata) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  save_checkpoint(tmp, params, &adam, metadata);
  fs::rename(tmp, path);
}

}  // namespace

TrainResult train_model(MpNet& model, std::span<const EncodedQuestion> labeled,
                        std::span<const EncodedQuestion> synthetic, const TrainOptions& options) {
  if (labeled.empty() && synthetic.empty()) throw DataError("no training questions");
  if (options.batch_size == 0) throw ConfigError("batch_size must be positive");

  std::optional<BatchStream> lab, syn;
  if (!labeled.empty()) lab.emplace(labeled, options.batch_size, derive_seed(options.seed, "batches/labeled"));
  if (!synthetic.empty()) syn.emplace(synthetic, options.batch_size, derive_seed(options.seed, "batches/synthetic"));
  std::mt19937_64 mix_rng(derive_seed(options.seed, "mix"));

  std::uint64_t pretrain = 0;
  if (options.mix.mode == MixMode::pretrain_then_finetune && syn) {
    pretrain = !lab ? options.max_steps
               : options.mix.pretrain_steps < 0 ? options.max_steps / 2
                                                : static_cast<std::uint64_t>(options.mix.pretrain_steps);
  }

  std::ofstream metrics;
  if (!options.metrics_path.empty()) {
    if (options.metrics_path.has_parent_path()) fs::create_directories(options.metrics_path.parent_path());
    metrics.open(options.metrics_path, std::ios::trunc);
    if (!metrics) throw DataError("cannot write metrics file " + options.metrics_path.string());
  }

  AdamOptions adam_options;
  adam_options.schedule = options.schedule;
  Adam adam(adam_options);
  ParamStore& params = model.params();
  TrainResult result;

  for (std::uint64_t step = 1; step <= options.max_steps; ++step) {
    bool use_synthetic;
    if (!lab) use_synthetic = true;
    else if (!syn) use_synthetic = false;
    else if (options.mix.mode == MixMode::interleave) use_synthetic = uniform01(mix_rng) < options.mix.synthetic_ratio;
    else use_synthetic = step <= pretrain;
    const auto batch = use_synthetic ? syn->next() : lab->next();

    params.zero_grad();
    Graph g(Mode::train, derive_seed(options.seed, "dropout/" + std::to_string(step)));
    const auto out = model.forward(g, batch);
    const double loss = g.value(out.loss)[0];
    if (!std::isfinite(loss)) {
      throw NumericError("non-finite loss at step " + std::to_string(step));
    }
    g.backward(out.loss);
    params.apply_row_masks();

    StepRecord rec;
    rec.step = step;
    rec.lr = adam.current_rate();
    rec.loss = loss;
    rec.grad_norm = clip_gradients(params, options.clip_norm);
    rec.source = use_synthetic ? "synthetic" : "labeled";
    if (!std::isfinite(rec.grad_norm)) {
      throw NumericError("non-finite gradient norm at step " + std::to_string(step));
    }
    adam.step(params);

    if (metrics.is_open()) metrics << rec.to_json().dump() << '\n' << std::flush;
    const bool last = step == options.max_steps;
    if (!options.checkpoint_path.empty() &&
        (last || (options.checkpoint_every > 0 && step % options.checkpoint_every == 0))) {
      write_checkpoint_atomically(options.checkpoint_path, params, adam, options.metadata);
    }
    if (options.on_step) options.on_step(rec);
    result.trace.push_back(std::move(rec));
  }
  if (options.max_steps == 0 && !options.checkpoint_path.empty()) {
    write_checkpoint_atomically(options.checkpoint_path, params, adam, options.metadata);
  }
  return result;
}

double accuracy_of(const MpNet& model, std::span<const EncodedQuestion> questions, std::size_t batch_size) {
  if (questions.empty()) return 0.0;
  const auto preds = model.predict(questions, batch_size);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) correct += preds[i].chosen == questions[i].answer;
  return static_cast<double>(correct) / static_cast<double>(questions.size());
}

}  // namespace clozeforge
