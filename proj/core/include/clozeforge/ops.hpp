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
#include <span>
#include <vector>

#include "clozeforge/graph.hpp"

namespace clozeforge::ops {

// Shape conventions: rank-1 tensors are vectors, rank-2 are row-major
// matrices. matmul treats a vector on the left as a row and on the right as a
// column: [m,k]x[k,n]->[m,n], [m,k]x[k]->[m], [k]x[k,n]->[n], [k]x[k]->[1].
Var matmul(Graph& g, Var a, Var b);

// Elementwise on equal shapes; add also accepts [m,n] + [n] (row broadcast).
Var add(Graph& g, Var a, Var b);
Var subtract(Graph& g, Var a, Var b);
Var multiply(Graph& g, Var a, Var b);
Var scale(Graph& g, Var a, double factor);

Var sum(Graph& g, Var a);
Var mean(Graph& g, Var a);

// Rank-1 inputs concatenate into a vector; rank-2 inputs along `axis`.
Var concat(Graph& g, std::span<const Var> parts, std::size_t axis = 0);
// k vectors of length d -> [k, d].
Var stack(Graph& g, std::span<const Var> rows);
// Half-open range [begin, end) along axis 0. Rank is preserved.
Var slice(Graph& g, Var a, std::size_t begin, std::size_t end);
// Row i of a matrix as a vector.
Var row(Graph& g, Var a, std::size_t i);

// [m, n] -> [n, m].
Var transpose(Graph& g, Var a);
// Same values in row-major order under a new shape of equal size.
Var reshape(Graph& g, Var a, Shape shape);
Var sigmoid(Graph& g, Var a);
Var tanh(Graph& g, Var a);
Var relu(Graph& g, Var a);
// Over a vector, or row-wise over a matrix. The normaliser is summed in
// ascending order, so permuting the inputs permutes the outputs exactly.
Var softmax(Graph& g, Var a);
Var log(Graph& g, Var a);

// table [V, d], ids in [0, V) -> [ids.size(), d].
Var embedding_gather(Graph& g, Var table, std::span<const std::int32_t> ids);

// x [N, c_in] holding consecutive sequences with the given lengths (empty
// means a single sequence of N rows). kernel [width, c_in, c_out], bias
// [c_out]. Same padding with zeros; taps never cross sequence boundaries.
Var dilated_conv1d(Graph& g, Var x, Var kernel, Var bias, std::size_t dilation,
                   std::span<const std::size_t> segments = {});

// x [N, c] -> [segments, c], per-channel maximum over each sequence.
Var max_over_time_pool(Graph& g, Var x, std::span<const std::size_t> segments = {});

struct BatchNormState {
  Parameter* running_mean = nullptr;
  Parameter* running_var = nullptr;
  double momentum = 0.9;
  double eps = 1e-5;
};

// Per-channel normalisation of x [N, c]. Training mode uses the statistics of
// the N rows (N >= 2) and folds them into the running buffers; eval mode is
// the affine map given by the running buffers.
Var batch_norm(Graph& g, Var x, Var gamma, Var beta, const BatchNormState& state);

// Inverted dropout; identity in eval mode or when rate == 0.
Var dropout(Graph& g, Var x, double rate);

// -log(max(probs[target], 1e-12)) for a probability vector.
Var cross_entropy(Graph& g, Var probs, std::size_t target);

inline constexpr double kLogClamp = 1e-12;

}  // namespace clozeforge::ops
