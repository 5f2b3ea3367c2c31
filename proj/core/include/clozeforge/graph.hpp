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
#include <deque>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "clozeforge/params.hpp"
#include "clozeforge/tensor.hpp"

namespace clozeforge {

enum class OpKind : std::uint8_t {
  constant,
  input,
  parameter,
  matmul,
  add,
  subtract,
  multiply,
  scale,
  sum,
  mean,
  concat,
  stack,
  slice,
  transpose,
  reshape,
  sigmoid,
  tanh,
  relu,
  softmax,
  log,
  embedding_gather,
  dilated_conv1d,
  max_over_time_pool,
  batch_norm,
  dropout,
  cross_entropy,
};

std::string_view op_name(OpKind kind);

/// Handle to a node inside a Graph.
struct Var {
  std::uint32_t id = std::numeric_limits<std::uint32_t>::max();
  bool valid() const noexcept { return id != std::numeric_limits<std::uint32_t>::max(); }
};

enum class Mode { train, eval };

/// Tape of operations with reverse-mode differentiation.
///
/// Nodes are appended in evaluation order, so the tape is a topological order
/// by construction. Forward values are computed eagerly by the functions in
/// ops.hpp; references returned by value() stay valid for the life of the
/// graph. Parameter nodes alias the Parameter's storage: backward()
/// accumulates straight into Parameter::grad.
///
/// A graph belongs to one thread. Graphs in eval mode never write to
/// parameters, so several of them may read the same ParamStore concurrently.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, std::span<const double> out_grad)>;

  explicit Graph(Mode mode = Mode::train, std::uint64_t rng_seed = 0);
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;
  Graph(Graph&&) noexcept = default;
  Graph& operator=(Graph&&) noexcept = default;

  Var constant(Tensor value);
  Var input(Tensor value);
  Var param(Parameter& p);

  const Tensor& value(Var v) const;
  const Shape& shape(Var v) const { return value(v).shape(); }
  bool requires_grad(Var v) const { return node(v).requires_grad; }
  OpKind kind(Var v) const { return node(v).kind; }
  std::span<const Var> inputs(Var v) const { return node(v).inputs; }
  // Gradient after backward(). Inputs and parameters always have one (zero
  // when unreached); intermediate nodes the loss never reached are empty.
  std::span<const double> grad(Var v) const;

  std::size_t size() const noexcept { return nodes_.size(); }
  Mode mode() const noexcept { return mode_; }
  bool training() const noexcept { return mode_ == Mode::train; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::mt19937_64& rng() noexcept { return rng_; }

  // Rejects non-scalar losses. Non-parameter gradients are reset first, so
  // calling it twice recomputes them; parameter gradients accumulate.
  void backward(Var loss);

  // Used by op implementations.
  Var record(OpKind kind, std::vector<Var> inputs, Tensor value, BackwardFn backward);
  std::span<double> grad_buffer(Var v);

 private:
  struct Node {
    OpKind kind = OpKind::constant;
    std::vector<Var> inputs;
    Tensor value;
    Parameter* param = nullptr;
    std::vector<double> grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  const Node& node(Var v) const;
  Node& node(Var v);

  Mode mode_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  std::deque<Node> nodes_;
  std::unordered_map<const Parameter*, Var> param_nodes_;
};

}  // namespace clozeforge
