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

#include "clozeforge/model.hpp"

#include <algorithm>
#include <cmath>

#include "clozeforge/errors.hpp"
#include "clozeforge/ops.hpp"
#include "clozeforge/rng.hpp"

namespace clozeforge {

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string("model.") + name + " must be positive");
  };
  positive(hidden_units, "hidden_units");
  positive(embedding_dim, "embedding_dim");
  positive(window, "window");
  if (window < 3) throw ConfigError("model.window must be at least 3");
  positive(conv_blocks, "conv_blocks");
  positive(conv_filters, "conv_filters");
  positive(conv_width, "conv_width");
  if (conv_width % 2 == 0) throw ConfigError("model.conv_width must be odd for same padding");
  if (dilation_rates.empty()) throw ConfigError("model.dilation_rates must not be empty");
  for (auto d : dilation_rates) positive(d, "dilation_rates[]");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("model.dropout must lie in [0, 1)");
  if (ngram_feature_dim != kNgramFeatureDim) {
    throw ConfigError("model.ngram_feature_dim must be " + std::to_string(kNgramFeatureDim));
  }
  if (!modules.selective_copying && !modules.dilated_conv) {
    throw ConfigError("at least one context-side module (selective_copying, dilated_conv) must be enabled");
  }
}

std::size_t ModelConfig::context_dim() const {
  return (modules.selective_copying ? 2 * hidden_units : 0) + (modules.dilated_conv ? conv_filters : 0);
}

std::size_t ModelConfig::candidate_dim() const {
  return hidden_units + (modules.attentive_reader ? 2 * hidden_units : 0) + (modules.ngram ? ngram_feature_dim : 0);
}

nlohmann::json ModelConfig::to_json() const {
  return {{"hidden_units", hidden_units},
          {"embedding_dim", embedding_dim},
          {"window", window},
          {"conv_blocks", conv_blocks},
          {"conv_filters", conv_filters},
          {"conv_width", conv_width},
          {"dilation_rates", dilation_rates},
          {"dropout", dropout},
          {"ngram_feature_dim", ngram_feature_dim},
          {"finetune_rows", finetune_rows},
          {"modules",
           {{"selective_copying", modules.selective_copying},
            {"attentive_reader", modules.attentive_reader},
            {"dilated_conv", modules.dilated_conv},
            {"ngram", modules.ngram}}}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("model config must be an object");
  ModelConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "hidden_units") c.hidden_units = value.get<std::size_t>();
      else if (key == "embedding_dim") c.embedding_dim = value.get<std::size_t>();
      else if (key == "window") c.window = value.get<std::size_t>();
      else if (key == "conv_blocks") c.conv_blocks = value.get<std::size_t>();
      else if (key == "conv_filters") c.conv_filters = value.get<std::size_t>();
      else if (key == "conv_width") c.conv_width = value.get<std::size_t>();
      else if (key == "dilation_rates") c.dilation_rates = value.get<std::vector<std::size_t>>();
      else if (key == "dropout") c.dropout = value.get<double>();
      else if (key == "ngram_feature_dim") c.ngram_feature_dim = value.get<std::size_t>();
      else if (key == "finetune_rows") c.finetune_rows = value.get<std::size_t>();
      else if (key == "modules") {
        for (const auto& [m, on] : value.items()) {
          if (m == "selective_copying") c.modules.selective_copying = on.get<bool>();
          else if (m == "attentive_reader") c.modules.attentive_reader = on.get<bool>();
          else if (m == "dilated_conv") c.modules.dilated_conv = on.get<bool>();
          else if (m == "ngram") c.modules.ngram = on.get<bool>();
          else throw ConfigError("unknown module switch '" + m + "'");
        }
      } else {
        throw ConfigError("unknown model key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  return c;
}

EncodedQuestion encode_question(const Question& q, const Vocab& vocab, const NgramIndex* index) {
  q.validate();
  EncodedQuestion e;
  e.id = q.id;
  e.subset = q.subset;
  e.context = vocab.encode(q.context);
  e.blank_index = q.blank_index;
  e.answer = q.answer;
  for (std::size_t k = 0; k < kNumCandidates; ++k) {
    e.candidates[k] = vocab.encode(q.candidates[k]);
    if (index) e.ngram[k] = index->blank_features(q.context, q.blank_index, q.candidates[k]);
  }
  return e;
}

std::size_t argmax_lowest(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

namespace mpnet {

GruVars gru_vars(Graph& g, ParamStore& params, const std::string& prefix) {
  auto p = [&](const char* name) { return g.param(params.get(prefix + "." + name)); };
  return {p("W_z"), p("W_r"), p("W_n"), p("U_z"), p("U_r"), p("U_n"), p("b_z"), p("b_r"), p("b_n")};
}

std::vector<Var> gru(Graph& g, const GruVars& w, Var x, std::size_t steps, std::size_t batch, bool reverse,
                     std::span<const std::size_t> lengths) {
  if (steps == 0 || batch == 0 || g.shape(x).at(0) != steps * batch) {
    throw ShapeError("gru: input " + to_string(g.shape(x)) + " does not hold " + std::to_string(steps) +
                     " steps of " + std::to_string(batch) + " rows");
  }
  if (!lengths.empty() && lengths.size() != batch) throw ShapeError("gru: one length per row required");
  const std::size_t hidden = g.shape(w.U_z).at(0);
  const Var xz = ops::add(g, ops::matmul(g, x, w.W_z), w.b_z);
  const Var xr = ops::add(g, ops::matmul(g, x, w.W_r), w.b_r);
  const Var xn = ops::add(g, ops::matmul(g, x, w.W_n), w.b_n);

  Var h = g.constant(Tensor({batch, hidden}));
  std::vector<Var> states(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const std::size_t t = reverse ? steps - 1 - k : k;
    const std::size_t lo = t * batch, hi = lo + batch;
    const Var z = ops::sigmoid(g, ops::add(g, ops::slice(g, xz, lo, hi), ops::matmul(g, h, w.U_z)));
    const Var r = ops::sigmoid(g, ops::add(g, ops::slice(g, xr, lo, hi), ops::matmul(g, h, w.U_r)));
    const Var n = ops::tanh(
        g, ops::add(g, ops::slice(g, xn, lo, hi), ops::matmul(g, ops::multiply(g, r, h), w.U_n)));
    Var next = ops::add(g, n, ops::multiply(g, z, ops::subtract(g, h, n)));
    if (!lengths.empty()) {
      Tensor keep({batch, hidden}), hold({batch, hidden});
      bool all = true;
      for (std::size_t b = 0; b < batch; ++b) {
        const bool live = k < lengths[b];
        all = all && live;
        for (std::size_t j = 0; j < hidden; ++j) {
          keep[b * hidden + j] = live ? 1.0 : 0.0;
          hold[b * hidden + j] = live ? 0.0 : 1.0;
        }
      }
      // x*1 + y*0 == x exactly, so finished rows carry their state unchanged.
      if (!all) {
        next = ops::add(g, ops::multiply(g, next, g.constant(std::move(keep))),
                        ops::multiply(g, h, g.constant(std::move(hold))));
      }
    }
    h = next;
    states[t] = h;
  }
  return states;
}

Var encode_context(Graph& g, const GruVars& fwd, const GruVars& bwd, Var x, std::size_t steps, std::size_t batch) {
  const auto f = gru(g, fwd, x, steps, batch, false);
  const auto b = gru(g, bwd, x, steps, batch, true);
  const Var fs = ops::concat(g, f, 0);
  const Var bs = ops::concat(g, b, 0);
  const Var both[] = {fs, bs};
  return ops::concat(g, both, 1);
}

Var encode_candidates(Graph& g, const GruVars& w, Var x, std::size_t steps, std::size_t batch,
                      std::span<const std::size_t> lengths) {
  for (auto len : lengths) {
    if (len == 0 || len > steps) throw ShapeError("encode_candidates: candidate length outside [1, steps]");
  }
  return gru(g, w, x, steps, batch, false, lengths).back();
}

Var selective_copy(Graph& g, Var h, std::size_t blank_index) {
  if (blank_index >= g.shape(h).at(0)) {
    throw DataError("selective_copy: blank_index " + std::to_string(blank_index) + " outside sequence of " +
                    std::to_string(g.shape(h).at(0)));
  }
  return ops::row(g, h, blank_index);
}

Attention attentive_read(Graph& g, Var h, Var u, Var W_ar, Var b_ar) {
  const Var q = ops::add(g, ops::matmul(g, u, W_ar), b_ar);
  const Var scores = ops::matmul(g, q, ops::transpose(g, h));
  const Var alpha = ops::softmax(g, scores);
  return {ops::matmul(g, alpha, h), alpha};
}

std::vector<ConvLayerVars> idc_vars(Graph& g, ParamStore& params, const ModelConfig& config) {
  std::vector<ConvLayerVars> layers;
  for (std::size_t k = 0; k < config.conv_blocks; ++k) {
    for (std::size_t j = 0; j < config.dilation_rates.size(); ++j) {
      const std::string pre = "idc." + std::to_string(k) + "." + std::to_string(j) + ".";
      ConvLayerVars l;
      l.kernel = g.param(params.get(pre + "kernel"));
      l.bias = g.param(params.get(pre + "bias"));
      l.gamma = g.param(params.get(pre + "bn_gamma"));
      l.beta = g.param(params.get(pre + "bn_beta"));
      l.bn.running_mean = &params.get(pre + "bn_mean");
      l.bn.running_var = &params.get(pre + "bn_var");
      l.dilation = config.dilation_rates[j];
      layers.push_back(l);
    }
  }
  return layers;
}

Var idc_aggregate(Graph& g, Var x, std::span<const std::size_t> segments, std::span<const ConvLayerVars> layers) {
  Var h = x;
  for (const auto& l : layers) {
    h = ops::dilated_conv1d(g, h, l.kernel, l.bias, l.dilation, segments);
    h = ops::batch_norm(g, h, l.gamma, l.beta, l.bn);
    h = ops::relu(g, h);
  }
  return ops::max_over_time_pool(g, h, segments);
}

Var pointer_output(Graph& g, Var P, Var C, const OutputVars& w) {
  const std::size_t batch = g.shape(P).at(0);
  if (g.shape(C).at(0) != batch * kNumCandidates) {
    throw ShapeError("pointer_output: " + to_string(g.shape(C)) + " candidates for " + std::to_string(batch) +
                     " contexts");
  }
  std::vector<std::int32_t> owner(batch * kNumCandidates);
  for (std::size_t r = 0; r < owner.size(); ++r) owner[r] = static_cast<std::int32_t>(r / kNumCandidates);
  const Var P_rep = ops::embedding_gather(g, P, owner);
  const Var gate = ops::sigmoid(
      g, ops::add(g, ops::add(g, ops::matmul(g, P_rep, w.W_1), ops::matmul(g, C, w.W_2)), w.b));
  const Var gated = ops::multiply(g, C, gate);
  const Var V = ops::add(g, ops::matmul(g, P, w.W_o), w.b_o);
  const Var V_rep = ops::embedding_gather(g, V, owner);
  const std::size_t width = g.shape(C).at(1);
  const Var ones = g.constant(Tensor::filled({width}, 1.0));
  const Var scores = ops::matmul(g, ops::multiply(g, gated, V_rep), ones);
  return ops::softmax(g, ops::reshape(g, scores, {batch, kNumCandidates}));
}

}  // namespace mpnet

namespace {

Tensor glorot(Shape shape, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : t.storage()) v = uniform_real(rng, -limit, limit);
  return t;
}

}  // namespace

MpNet::MpNet(ModelConfig config, Vocab vocab, std::uint64_t seed)
    : config_(std::move(config)), vocab_(std::move(vocab)) {
  config_.validate();
  init_params(seed);
}

MpNet::MpNet(ModelConfig config, Vocab vocab, ParamStore params)
    : config_(std::move(config)), vocab_(std::move(vocab)), params_(std::move(params)) {
  config_.validate();
  check_params();
}

void MpNet::init_params(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t E = config_.embedding_dim, H = config_.hidden_units, F = config_.conv_filters;
  const std::size_t w = config_.conv_width;

  Parameter& emb = params_.add("embedding", random_embeddings(vocab_, E, rng()).values);
  emb.row_mask = finetune_mask(vocab_, config_.finetune_rows);

  auto add_gru = [&](const std::string& prefix, std::size_t in) {
    for (const char* gate : {"z", "r", "n"}) params_.add(prefix + ".W_" + gate, glorot({in, H}, in, H, rng));
    for (const char* gate : {"z", "r", "n"}) params_.add(prefix + ".U_" + gate, glorot({H, H}, H, H, rng));
    for (const char* gate : {"z", "r", "n"}) params_.add(prefix + ".b_" + gate, Tensor({H}));
  };
  add_gru("ctx_fwd", E);
  add_gru("ctx_bwd", E);
  add_gru("cand", E);

  if (config_.modules.attentive_reader) {
    params_.add("attn.W_ar", glorot({H, 2 * H}, H, 2 * H, rng));
    params_.add("attn.b_ar", Tensor({2 * H}));
  }
  if (config_.modules.dilated_conv) {
    for (std::size_t k = 0; k < config_.conv_blocks; ++k) {
      for (std::size_t j = 0; j < config_.dilation_rates.size(); ++j) {
        const std::string pre = "idc." + std::to_string(k) + "." + std::to_string(j) + ".";
        const std::size_t cin = k == 0 && j == 0 ? 2 * H : F;
        params_.add(pre + "kernel", glorot({w, cin, F}, w * cin, w * F, rng));
        params_.add(pre + "bias", Tensor({F}));
        params_.add(pre + "bn_gamma", Tensor::filled({F}, 1.0));
        params_.add(pre + "bn_beta", Tensor({F}));
        params_.add(pre + "bn_mean", Tensor({F}), false);
        params_.add(pre + "bn_var", Tensor::filled({F}, 1.0), false);
      }
    }
  }
  const std::size_t P = config_.context_dim(), C = config_.candidate_dim();
  params_.add("out.W_1", glorot({P, C}, P, C, rng));
  params_.add("out.W_2", glorot({C, C}, C, C, rng));
  params_.add("out.b", Tensor({C}));
  params_.add("out.W_o", glorot({P, C}, P, C, rng));
  params_.add("out.b_o", Tensor({C}));
}

void MpNet::check_params() const {
  const MpNet reference(config_, vocab_, 0);
  for (const auto& ref : reference.params()) {
    const Parameter* p = params_.find(ref->name);
    if (!p) throw DataError("checkpoint lacks parameter '" + ref->name + "'");
    if (p->value.shape() != ref->value.shape()) {
      throw DataError("parameter '" + ref->name + "' has shape " + to_string(p->value.shape()) + ", expected " +
                      to_string(ref->value.shape()));
    }
  }
  if (params_.size() != reference.params().size()) {
    throw DataError("checkpoint holds parameters for disabled modules");
  }
}

std::size_t MpNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) {
    if (p->trainable) n += p->value.size();
  }
  return n;
}

void MpNet::set_embeddings(const EmbeddingTable& table) {
  Parameter& emb = params_.get("embedding");
  if (table.values.shape() != emb.value.shape()) {
    throw DataError("embedding table " + to_string(table.values.shape()) + " does not match " +
                    to_string(emb.value.shape()));
  }
  emb.value = table.values;
  emb.row_mask = table.finetune;
}

EncodedQuestion MpNet::encode(const Question& q, const NgramIndex* index) const {
  if (config_.modules.ngram && !index) throw ConfigError("the n-gram module needs an n-gram index");
  return encode_question(q, vocab_, config_.modules.ngram ? index : nullptr);
}

MpNet::Output MpNet::forward(Graph& g, std::span<const EncodedQuestion> batch) {
  if (batch.empty()) throw DataError("empty batch");
  const std::size_t B = batch.size();
  const std::size_t n = batch[0].context.size();
  for (const auto& q : batch) {
    if (q.context.size() != n || n == 0) throw DataError("contexts in a batch must share one nonzero length");
    if (q.blank_index >= n) throw DataError("question " + q.id + ": blank_index out of range");
    if (q.answer >= kNumCandidates) throw DataError("question " + q.id + ": answer out of range");
  }
  const ModuleSwitches& m = config_.modules;
  const Var emb = g.param(params_.get("embedding"));

  std::vector<std::int32_t> ctx_ids(n * B);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t t = 0; t < n; ++t) ctx_ids[t * B + b] = batch[b].context[t];
  }
  const Var x = ops::embedding_gather(g, emb, ctx_ids);
  Var h = mpnet::encode_context(g, mpnet::gru_vars(g, params_, "ctx_fwd"), mpnet::gru_vars(g, params_, "ctx_bwd"),
                                x, n, B);
  h = ops::dropout(g, h, config_.dropout);

  const std::size_t rows = B * kNumCandidates;
  std::vector<std::size_t> lengths(rows);
  std::size_t steps = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    lengths[r] = batch[r / kNumCandidates].candidates[r % kNumCandidates].size();
    if (lengths[r] == 0) throw DataError("question " + batch[r / kNumCandidates].id + ": empty candidate");
    steps = std::max(steps, lengths[r]);
  }
  std::vector<std::int32_t> cand_ids(steps * rows, Vocab::kPad);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& c = batch[r / kNumCandidates].candidates[r % kNumCandidates];
    for (std::size_t t = 0; t < c.size(); ++t) cand_ids[t * rows + r] = c[t];
  }
  const Var u = mpnet::encode_candidates(g, mpnet::gru_vars(g, params_, "cand"),
                                         ops::embedding_gather(g, emb, cand_ids), steps, rows, lengths);

  Output out;
  Var by_question;  // [B * n, 2H], rows of question b contiguous
  if (m.attentive_reader || m.dilated_conv) {
    std::vector<std::int32_t> perm(n * B);
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t t = 0; t < n; ++t) perm[b * n + t] = static_cast<std::int32_t>(t * B + b);
    }
    by_question = ops::embedding_gather(g, h, perm);
  }

  std::vector<Var> context_parts;
  if (m.selective_copying) {
    std::vector<std::int32_t> at_blank(B);
    for (std::size_t b = 0; b < B; ++b) at_blank[b] = static_cast<std::int32_t>(batch[b].blank_index * B + b);
    out.p_sc = ops::embedding_gather(g, h, at_blank);
    context_parts.push_back(out.p_sc);
  }
  if (m.dilated_conv) {
    const std::vector<std::size_t> segments(B, n);
    const auto layers = mpnet::idc_vars(g, params_, config_);
    out.p_idc = mpnet::idc_aggregate(g, by_question, segments, layers);
    context_parts.push_back(out.p_idc);
  }
  const Var P = context_parts.size() == 1 ? context_parts[0] : ops::concat(g, context_parts, 1);

  std::vector<Var> candidate_parts{u};
  if (m.attentive_reader) {
    const Var W_ar = g.param(params_.get("attn.W_ar"));
    const Var b_ar = g.param(params_.get("attn.b_ar"));
    std::vector<Var> reads;
    for (std::size_t b = 0; b < B; ++b) {
      const Var hb = ops::slice(g, by_question, b * n, (b + 1) * n);
      const Var ub = ops::slice(g, u, b * kNumCandidates, (b + 1) * kNumCandidates);
      const auto att = mpnet::attentive_read(g, hb, ub, W_ar, b_ar);
      reads.push_back(att.p_ar);
      out.alpha.push_back(att.alpha);
    }
    candidate_parts.push_back(B == 1 ? reads[0] : ops::concat(g, reads, 0));
  }
  if (m.ngram) {
    Tensor feats({rows, kNgramFeatureDim});
    for (std::size_t r = 0; r < rows; ++r) {
      const auto& f = batch[r / kNumCandidates].ngram[r % kNumCandidates];
      std::copy(f.begin(), f.end(), feats.data() + r * kNgramFeatureDim);
    }
    candidate_parts.push_back(g.constant(std::move(feats)));
  }
  const Var C = candidate_parts.size() == 1 ? candidate_parts[0] : ops::concat(g, candidate_parts, 1);

  const mpnet::OutputVars ov{g.param(params_.get("out.W_1")), g.param(params_.get("out.W_2")),
                             g.param(params_.get("out.b")), g.param(params_.get("out.W_o")),
                             g.param(params_.get("out.b_o"))};
  out.probs = mpnet::pointer_output(g, P, C, ov);

  std::vector<Var> losses;
  losses.reserve(B);
  for (std::size_t b = 0; b < B; ++b) {
    losses.push_back(ops::cross_entropy(g, ops::row(g, out.probs, b), batch[b].answer));
  }
  out.loss = ops::mean(g, B == 1 ? losses[0] : ops::concat(g, losses, 0));
  return out;
}

std::vector<Prediction> MpNet::predict(std::span<const EncodedQuestion> questions, std::size_t batch_size) const {
  if (batch_size == 0) throw ConfigError("prediction batch size must be positive");
  // An eval-mode graph never writes to parameters or batch-norm buffers.
  auto* self = const_cast<MpNet*>(this);
  std::vector<Prediction> out;
  out.reserve(questions.size());
  std::size_t start = 0;
  while (start < questions.size()) {
    // Batches hold contexts of one length.
    std::size_t end = start + 1;
    while (end < questions.size() && end - start < batch_size &&
           questions[end].context.size() == questions[start].context.size()) {
      ++end;
    }
    const auto chunk = questions.subspan(start, end - start);
    Graph g(Mode::eval);
    const Output o = self->forward(g, chunk);
    const Tensor& probs = g.value(o.probs);
    for (std::size_t b = 0; b < chunk.size(); ++b) {
      Prediction p;
      for (std::size_t k = 0; k < kNumCandidates; ++k) p.probs[k] = probs[b * kNumCandidates + k];
      p.chosen = argmax_lowest(p.probs);
      if (!o.alpha.empty()) {
        const Tensor& a = g.value(o.alpha[b]);
        const std::size_t n = a.dim(1);
        for (std::size_t k = 0; k < kNumCandidates; ++k) {
          p.attention.emplace_back(a.values().begin() + static_cast<std::ptrdiff_t>(k * n),
                                   a.values().begin() + static_cast<std::ptrdiff_t>((k + 1) * n));
        }
      }
      auto row_of = [&](Var v) {
        const Tensor& t = g.value(v);
        const std::size_t d = t.dim(1);
        return std::vector<double>(t.values().begin() + static_cast<std::ptrdiff_t>(b * d),
                                   t.values().begin() + static_cast<std::ptrdiff_t>((b + 1) * d));
      };
      if (o.p_sc.valid()) p.p_sc = row_of(o.p_sc);
      if (o.p_idc.valid()) p.p_idc = row_of(o.p_idc);
      if (config_.modules.ngram) p.p_ng = chunk[b].ngram;
      out.push_back(std::move(p));
    }
    start = end;
  }
  return out;
}

Prediction MpNet::predict(const EncodedQuestion& q) const {
  return predict(std::span<const EncodedQuestion>(&q, 1), 1).front();
}

}  // namespace clozeforge
