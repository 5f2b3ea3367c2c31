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
#include <filesystem>
#include <vector>

#include "clozeforge/tensor.hpp"
#include "clozeforge/vocab.hpp"

namespace clozeforge {

inline constexpr std::size_t kFinetuneRows = 1000;

struct EmbeddingTable {
  Tensor values;                       // [|V|, dim]
  std::vector<std::uint8_t> finetune;  // per row, 1 = trainable
  std::size_t matched = 0;             // rows copied from the file
  std::size_t malformed = 0;           // skipped lines

  std::size_t dim() const { return values.shape().at(1); }
};

// Rows with rank < min(finetune_rows, |V|) are marked fine-tunable.
std::vector<std::uint8_t> finetune_mask(const Vocab& vocab, std::size_t finetune_rows = kFinetuneRows);

// Every row drawn uniformly from [-0.05, 0.05].
EmbeddingTable random_embeddings(const Vocab& vocab, std::size_t dim, std::uint64_t seed,
                                 std::size_t finetune_rows = kFinetuneRows);

/// Reads a GloVe-style text file ("token v1 ... v_dim" per line). Rows for
/// vocabulary tokens found in the file are copied; the rest keep their random
/// initialization. Lines that do not parse are skipped and counted; a line
/// that parses with the wrong number of values is a DataError.
EmbeddingTable load_embeddings(const std::filesystem::path& path, const Vocab& vocab, std::size_t dim,
                               std::uint64_t seed, std::size_t finetune_rows = kFinetuneRows);

}  // namespace clozeforge
