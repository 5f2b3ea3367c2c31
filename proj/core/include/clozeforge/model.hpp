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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clozeforge/embeddings.hpp"
#include "clozeforge/graph.hpp"
#include "clozeforge/ngram_index.hpp"
#include "clozeforge/ops.hpp"
#include "clozeforge/params.hpp"
#include "clozeforge/question.hpp"
#include "clozeforge/vocab.hpp"

namespace clozeforge {

struct ModuleSwitches {
  bool selective_copying = true;
  bool attentive_reader = true;
  bool dilated_conv = true;
  bool ngram = true;

  bool operator==(const ModuleSwitches&) const = default;
};

struct ModelConfig {
  std::size_t hidden_units = 128;  // per GRU direction
  std::size_t embedding_dim = 300;
  std::size_t window = 80;
  std::size_t conv_blocks = 2;
  std::size_t conv_filters = 128;
  std::size_t conv_width = 3;
  std::vector<std::size_t> dilation_rates{1, 3};  // per block
  double dropout = 0.5;
  std::size_t ngram_feature_dim = kNgramFeatureDim;
  std::size_t finetune_rows = kFinetuneRows;
  ModuleSwitches modules;

  // Throws ConfigError.
  void validate() const;
  // |P_ctx|: [p_sc; p_idc] over the enabled context-side modules.
  std::size_t context_dim() const;
  // |C_i|: [u; p_ar; p_ng] over the enabled candidate-side modules.
  std::size_t candidate_dim() const;

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

/// A question resolved against the model vocabulary, with its n-gram
/// features precomputed (zero when the n-gram module is off).
struct EncodedQuestion {
  std::string id;
  Subset subset = Subset::middle;
  std::vector<std::int32_t> context;
  std::size_t blank_index = 0;
  std::array<std::vector<std::int32_t>, kNumCandidates> candidates;
  std::array<NgramFeatures, kNumCandidates> ngram{};
  std::size_t answer = 0;
};

EncodedQuestion encode_question(const Question& q, const Vocab& vocab, const NgramIndex* index);

struct Prediction {
  std::array<double, kNumCandidates> probs{};
  std::size_t chosen = 0;
  std::vector<std::vector<double>> attention;  // per candidate, over context positions
  std::vector<double> p_sc;
  std::vector<double> p_idc;
  std::array<NgramFeatures, kNumCandidates> p_ng{};
};

// Lowest index among the maximal entries.
std::size_t argmax_lowest(std::span<const double> values);

// Graph-level building blocks. Sequences of a batch are stored time-major,
// row t * batch + b.
namespace mpnet {

struct GruVars {
  Var W_z, W_r, W_n;  // [in, H]
  Var U_z, U_r, U_n;  // [H, H]
  Var b_z, b_r, b_n;  // [H]
};

GruVars gru_vars(Graph& g, ParamStore& params, const std::string& prefix);

/// z = s(x W_z + h U_z + b_z), r = s(x W_r + h U_r + b_r),
/// n = tanh(x W_n + (r . h) U_n + b_n), h' = n + z . (h - n), h_0 = 0.
/// `x` is [steps * batch, in]; returns the state after each step, indexed by
/// input time (so for reverse = true, states[t] has read x_t..x_{steps-1}).
/// With `lengths`, row b stops updating after lengths[b] steps.
std::vector<Var> gru(Graph& g, const GruVars& w, Var x, std::size_t steps, std::size_t batch, bool reverse,
                     std::span<const std::size_t> lengths = {});

// h_t = [forward state; backward state], as [steps * batch, 2H] time-major.
Var encode_context(Graph& g, const GruVars& fwd, const GruVars& bwd, Var x, std::size_t steps, std::size_t batch);

// Final state of a unidirectional GRU over each candidate, [batch, H].
Var encode_candidates(Graph& g, const GruVars& w, Var x, std::size_t steps, std::size_t batch,
                      std::span<const std::size_t> lengths);

// h [n, d] -> row blank_index. Throws DataError when out of range.
Var selective_copy(Graph& g, Var h, std::size_t blank_index);

struct Attention {
  Var p_ar;   // [k, 2H]
  Var alpha;  // [k, n]
};

// alpha_i = softmax_j((u_i W_ar + b_ar) . h_j), p_ar_i = sum_j alpha_ij h_j.
Attention attentive_read(Graph& g, Var h, Var u, Var W_ar, Var b_ar);

struct ConvLayerVars {
  Var kernel, bias, gamma, beta;
  ops::BatchNormState bn;
  std::size_t dilation = 1;
};

std::vector<ConvLayerVars> idc_vars(Graph& g, ParamStore& params, const ModelConfig& config);

// x [batch * n, d] batch-major; returns per-filter max over time, [batch, F].
Var idc_aggregate(Graph& g, Var x, std::span<const std::size_t> segments, std::span<const ConvLayerVars> layers);

struct OutputVars {
  Var W_1, W_2, b, W_o, b_o;
};

/// g_i = s(P W_1 + C_i W_2 + b), C'_i = C_i . g_i,
/// y = softmax_i(C'_i . (P W_o + b_o)). P [B, |P|], C [4B, |C|] with the
/// candidates of question b in rows 4b..4b+3; returns y as [B, 4].
Var pointer_output(Graph& g, Var P, Var C, const OutputVars& w);

}  // namespace mpnet

/// The multi-perspective cloze model: shared embeddings, a context BiGRU, a
/// candidate GRU, up to four aggregation modules and a gated bilinear
/// pointer over the four candidates.
class MpNet {
 public:
  MpNet(ModelConfig config, Vocab vocab, std::uint64_t seed);
  // Restores from checkpointed parameters; shapes must match the config.
  MpNet(ModelConfig config, Vocab vocab, ParamStore params);

  const ModelConfig& config() const noexcept { return config_; }
  const Vocab& vocab() const noexcept { return vocab_; }
  ParamStore& params() noexcept { return params_; }
  const ParamStore& params() const noexcept { return params_; }
  // Number of trainable scalars.
  std::size_t parameter_count() const;

  // Copies pretrained rows and the fine-tune mask into the embedding table.
  void set_embeddings(const EmbeddingTable& table);

  EncodedQuestion encode(const Question& q, const NgramIndex* index) const;

  struct Output {
    Var probs;  // [B, 4]
    Var loss;   // mean cross-entropy, scalar
    std::vector<Var> alpha;  // per question [4, n], when the attentive reader is on
    Var p_sc;   // [B, 2H]
    Var p_idc;  // [B, F]
  };

  /// Builds the forward pass for a batch whose contexts share one length. In
  /// a training graph, batch norm updates its running statistics.
  Output forward(Graph& g, std::span<const EncodedQuestion> batch);

  // Eval mode; safe to call concurrently.
  std::vector<Prediction> predict(std::span<const EncodedQuestion> questions, std::size_t batch_size = 64) const;
  Prediction predict(const EncodedQuestion& q) const;

 private:
  void init_params(std::uint64_t seed);
  void check_params() const;

  ModelConfig config_;
  Vocab vocab_;
  ParamStore params_;
};

}  // namespace clozeforge
