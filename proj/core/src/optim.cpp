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

#include "clozeforge/optim.hpp"

#include <cmath>
#include <string>

#include "clozeforge/errors.hpp"

namespace clozeforge {

LrSchedule::LrSchedule() : LrSchedule({{0, 1e-3}, {15000, 1e-4}, {50000, 1e-5}}) {}

LrSchedule::LrSchedule(std::vector<Entry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw ConfigError("learning-rate schedule is empty");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!(entries_[i].second > 0.0) || !std::isfinite(entries_[i].second)) {
      throw ConfigError("learning rates must be positive and finite");
    }
    if (i > 0 && entries_[i].first <= entries_[i - 1].first) {
      throw ConfigError("learning-rate schedule thresholds must be strictly increasing");
    }
  }
}

double LrSchedule::rate_at(std::uint64_t step) const {
  double rate = entries_.front().second;
  for (const auto& [threshold, r] : entries_) {
    if (step > threshold) rate = r;
  }
  return rate;
}

double clip_gradients(std::span<double> grads, double max_norm) {
  if (!(max_norm > 0.0)) throw ConfigError("clip norm must be positive");
  double sq = 0.0;
  for (double v : grads) sq += v * v;
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (double& v : grads) v *= s;
  }
  return norm;
}

double global_grad_norm(const ParamStore& params) {
  double sq = 0.0;
  for (const auto& p : params) {
    if (!p->trainable) continue;
    for (double v : p->grad) sq += v * v;
  }
  return std::sqrt(sq);
}

double clip_gradients(ParamStore& params, double max_norm) {
  if (!(max_norm > 0.0)) throw ConfigError("clip norm must be positive");
  const double norm = global_grad_norm(params);
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (auto& p : params) {
      if (!p->trainable) continue;
      for (double& v : p->grad) v *= s;
    }
  }
  return norm;
}

Adam::Adam(AdamOptions options) : options_(std::move(options)) {}

void Adam::restore(std::uint64_t step, std::map<std::string, Moments> moments) {
  step_ = step;
  moments_ = std::move(moments);
}

void Adam::step(ParamStore& params) {
  const std::uint64_t t = step_ + 1;
  for (const auto& p : params) {
    if (!p->trainable) continue;
    for (double v : p->grad) {
      if (!std::isfinite(v)) {
        throw NumericError("non-finite gradient in parameter '" + p->name + "' at step " +
                           std::to_string(t));
      }
    }
  }
  params.apply_row_masks();

  const double lr = options_.schedule.rate_at(t);
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));

  for (auto& p : params) {
    if (!p->trainable) continue;
    Moments& mo = moments_[p->name];
    const std::size_t n = p->value.size();
    if (mo.first.size() != n) {
      mo.first.assign(n, 0.0);
      mo.second.assign(n, 0.0);
    }
    const std::size_t width = p->row_width();
    double* w = p->value.data();
    for (std::size_t i = 0; i < n; ++i) {
      if (p->row_frozen(i / width)) continue;
      const double grad = p->grad[i];
      mo.first[i] = b1 * mo.first[i] + (1.0 - b1) * grad;
      mo.second[i] = b2 * mo.second[i] + (1.0 - b2) * grad * grad;
      const double mhat = mo.first[i] / c1;
      const double vhat = mo.second[i] / c2;
      w[i] -= lr * mhat / (std::sqrt(vhat) + options_.eps);
    }
  }
  step_ = t;
}

}  // namespace clozeforge
