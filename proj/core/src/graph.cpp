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

#include "clozeforge/graph.hpp"

#include <utility>

#include "clozeforge/errors.hpp"

namespace clozeforge {

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::constant: return "constant";
    case OpKind::input: return "input";
    case OpKind::parameter: return "parameter";
    case OpKind::matmul: return "matmul";
    case OpKind::add: return "add";
    case OpKind::subtract: return "subtract";
    case OpKind::multiply: return "multiply";
    case OpKind::scale: return "scale";
    case OpKind::sum: return "sum";
    case OpKind::mean: return "mean";
    case OpKind::concat: return "concat";
    case OpKind::stack: return "stack";
    case OpKind::slice: return "slice";
    case OpKind::transpose: return "transpose";
    case OpKind::reshape: return "reshape";
    case OpKind::sigmoid: return "sigmoid";
    case OpKind::tanh: return "tanh";
    case OpKind::relu: return "relu";
    case OpKind::softmax: return "softmax";
    case OpKind::log: return "log";
    case OpKind::embedding_gather: return "embedding_gather";
    case OpKind::dilated_conv1d: return "dilated_conv1d";
    case OpKind::max_over_time_pool: return "max_over_time_pool";
    case OpKind::batch_norm: return "batch_norm";
    case OpKind::dropout: return "dropout";
    case OpKind::cross_entropy: return "cross_entropy";
  }
  return "unknown";
}

Graph::Graph(Mode mode, std::uint64_t rng_seed) : mode_(mode), seed_(rng_seed), rng_(rng_seed) {}

const Graph::Node& Graph::node(Var v) const {
  if (!v.valid() || v.id >= nodes_.size()) throw ShapeError("invalid graph node handle");
  return nodes_[v.id];
}

Graph::Node& Graph::node(Var v) {
  if (!v.valid() || v.id >= nodes_.size()) throw ShapeError("invalid graph node handle");
  return nodes_[v.id];
}

Var Graph::constant(Tensor value) {
  Node n;
  n.kind = OpKind::constant;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Graph::input(Tensor value) {
  Node n;
  n.kind = OpKind::input;
  n.value = std::move(value);
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Graph::param(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return it->second;
  Node n;
  n.kind = OpKind::parameter;
  n.param = &p;
  n.requires_grad = p.trainable && training();
  if (n.requires_grad && p.grad.size() != p.value.size()) p.grad.assign(p.value.size(), 0.0);
  nodes_.push_back(std::move(n));
  Var v{static_cast<std::uint32_t>(nodes_.size() - 1)};
  param_nodes_.emplace(&p, v);
  return v;
}

const Tensor& Graph::value(Var v) const {
  const Node& n = node(v);
  return n.param ? n.param->value : n.value;
}

std::span<const double> Graph::grad(Var v) const {
  const Node& n = node(v);
  if (n.param) return n.param->grad;
  return n.grad;
}

std::span<double> Graph::grad_buffer(Var v) {
  Node& n = node(v);
  if (n.param) return n.param->grad;
  if (n.grad.empty()) n.grad.assign(n.value.size(), 0.0);
  return n.grad;
}

Var Graph::record(OpKind kind, std::vector<Var> inputs, Tensor value, BackwardFn backward) {
  Node n;
  n.kind = kind;
  for (Var in : inputs) n.requires_grad = n.requires_grad || node(in).requires_grad;
  n.inputs = std::move(inputs);
  n.value = std::move(value);
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

void Graph::backward(Var loss) {
  if (value(loss).size() != 1) {
    throw ShapeError("backward needs a scalar loss, got shape " + to_string(value(loss).shape()));
  }
  for (Node& n : nodes_) {
    if (n.param) continue;
    n.grad.clear();
    if (n.kind == OpKind::input) n.grad.assign(n.value.size(), 0.0);
  }
  if (!node(loss).requires_grad) return;
  grad_buffer(loss)[0] = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.backward || n.grad.empty()) continue;
    n.backward(*this, n.grad);
  }
}

}  // namespace clozeforge
