// Copyright (c) 2026 The UTS Pipeline Authors
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

#include "uts/toy_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace uts {

namespace {

using nlohmann::json;

Matrix& grad_of(ParamMap& grads, const std::string& name, int rows, int cols) {
  auto it = grads.find(name);
  if (it == grads.end()) it = grads.emplace(name, Matrix(rows, cols)).first;
  return it->second;
}

// Everything the backward pass needs from one clip's forward pass.
struct ClipForward {
  Matrix hid;      // T x H, tanh already applied
  Matrix encoded;  // T x D
  Matrix keys;     // T x D (attention only; per-head column blocks)
  Matrix values;   // T x D
  Matrix alpha;    // heads x T
  Matrix ctx;      // 1 x D concatenated head outputs
  Matrix pooled;   // 1 x D
};

Matrix encode_with_cache(const Matrix& frames, const ToyModelParams& p, ClipForward* cache) {
  const Matrix& w1 = p.at("enc.w1");
  const Matrix& b1 = p.at("enc.b1");
  const Matrix& w2 = p.at("enc.w2");
  const Matrix& b2 = p.at("enc.b2");
  const int t_len = frames.rows();
  const int f_dim = frames.cols();
  const int h_dim = w1.rows();
  const int d_dim = w2.rows();
  if (f_dim != w1.cols()) throw std::invalid_argument("encode: frame width mismatch");

  Matrix hid(t_len, h_dim);
  for (int t = 0; t < t_len; ++t)
    for (int h = 0; h < h_dim; ++h) {
      double s = b1(0, h);
      for (int f = 0; f < f_dim; ++f) s += frames(t, f) * w1(h, f);
      hid(t, h) = std::tanh(s);
    }
  Matrix encoded(t_len, d_dim);
  for (int t = 0; t < t_len; ++t)
    for (int d = 0; d < d_dim; ++d) {
      double s = b2(0, d);
      for (int h = 0; h < h_dim; ++h) s += hid(t, h) * w2(d, h);
      encoded(t, d) = s;
    }
  if (cache) {
    cache->hid = hid;
    cache->encoded = encoded;
  }
  return encoded;
}

void encode_backward(const Matrix& frames, const ClipForward& cache, const ToyModelParams& p,
                     const Matrix& d_encoded, ParamMap& grads) {
  const Matrix& w1 = p.at("enc.w1");
  const Matrix& w2 = p.at("enc.w2");
  const int t_len = frames.rows();
  const int f_dim = frames.cols();
  const int h_dim = w1.rows();
  const int d_dim = w2.rows();

  Matrix& d_w2 = grad_of(grads, "enc.w2", d_dim, h_dim);
  Matrix& d_b2 = grad_of(grads, "enc.b2", 1, d_dim);
  Matrix& d_w1 = grad_of(grads, "enc.w1", h_dim, f_dim);
  Matrix& d_b1 = grad_of(grads, "enc.b1", 1, h_dim);

  Matrix d_hid(t_len, h_dim);
  for (int t = 0; t < t_len; ++t) {
    for (int d = 0; d < d_dim; ++d) {
      const double g = d_encoded(t, d);
      d_b2(0, d) += g;
      for (int h = 0; h < h_dim; ++h) {
        d_w2(d, h) += g * cache.hid(t, h);
        d_hid(t, h) += g * w2(d, h);
      }
    }
  }
  for (int t = 0; t < t_len; ++t)
    for (int h = 0; h < h_dim; ++h) {
      const double th = cache.hid(t, h);
      const double g = d_hid(t, h) * (1.0 - th * th);
      d_b1(0, h) += g;
      for (int f = 0; f < f_dim; ++f) d_w1(h, f) += g * frames(t, f);
    }
}

void attention_forward(const Matrix& encoded, const ToyModelParams& p, ClipForward* cache,
                       Matrix* out, Matrix* alpha_out) {
  const Matrix& q = p.at("pool.q");
  const Matrix& wk = p.at("pool.wk");
  const Matrix& wv = p.at("pool.wv");
  const Matrix& wo = p.at("pool.wo");
  const int t_len = encoded.rows();
  const int d_dim = encoded.cols();
  const int heads = q.rows();
  if (d_dim % heads != 0)
    throw std::invalid_argument("attention_pool: embed dim not divisible by head count");
  const int dk = d_dim / heads;
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(dk));

  Matrix keys(t_len, d_dim), values(t_len, d_dim);
  for (int t = 0; t < t_len; ++t)
    for (int e = 0; e < d_dim; ++e) {
      double sk = 0.0, sv = 0.0;
      for (int d = 0; d < d_dim; ++d) {
        sk += encoded(t, d) * wk(d, e);
        sv += encoded(t, d) * wv(d, e);
      }
      keys(t, e) = sk;
      values(t, e) = sv;
    }

  Matrix alpha(heads, t_len);
  Matrix ctx(1, d_dim);
  std::vector<double> scores(t_len);
  for (int h = 0; h < heads; ++h) {
    for (int t = 0; t < t_len; ++t) {
      double s = 0.0;
      for (int c = 0; c < dk; ++c) s += q(h, c) * keys(t, h * dk + c);
      scores[t] = s * inv_sqrt_dk;
    }
    detail::softmax_inplace(scores.data(), t_len);
    for (int t = 0; t < t_len; ++t) alpha(h, t) = scores[t];
    for (int c = 0; c < dk; ++c) {
      double s = 0.0;
      for (int t = 0; t < t_len; ++t) s += scores[t] * values(t, h * dk + c);
      ctx(0, h * dk + c) = s;
    }
  }

  Matrix pooled(1, d_dim);
  for (int d = 0; d < d_dim; ++d) {
    double s = 0.0;
    for (int e = 0; e < d_dim; ++e) s += wo(d, e) * ctx(0, e);
    pooled(0, d) = s;
  }

  if (cache) {
    cache->keys = keys;
    cache->values = values;
    cache->alpha = alpha;
    cache->ctx = ctx;
  }
  if (alpha_out) *alpha_out = alpha;
  *out = pooled;
}

void attention_backward(const ClipForward& cache, const ToyModelParams& p,
                        const Matrix& d_pooled, ParamMap& grads, Matrix& d_encoded) {
  const Matrix& q = p.at("pool.q");
  const Matrix& wk = p.at("pool.wk");
  const Matrix& wv = p.at("pool.wv");
  const Matrix& wo = p.at("pool.wo");
  const Matrix& encoded = cache.encoded;
  const int t_len = encoded.rows();
  const int d_dim = encoded.cols();
  const int heads = q.rows();
  const int dk = d_dim / heads;
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(dk));

  Matrix& d_q = grad_of(grads, "pool.q", heads, dk);
  Matrix& d_wk = grad_of(grads, "pool.wk", d_dim, d_dim);
  Matrix& d_wv = grad_of(grads, "pool.wv", d_dim, d_dim);
  Matrix& d_wo = grad_of(grads, "pool.wo", d_dim, d_dim);

  Matrix d_ctx(1, d_dim);
  for (int d = 0; d < d_dim; ++d) {
    const double g = d_pooled(0, d);
    for (int e = 0; e < d_dim; ++e) {
      d_wo(d, e) += g * cache.ctx(0, e);
      d_ctx(0, e) += g * wo(d, e);
    }
  }

  Matrix d_keys(t_len, d_dim), d_values(t_len, d_dim);
  std::vector<double> d_alpha(t_len), d_score(t_len);
  for (int h = 0; h < heads; ++h) {
    for (int t = 0; t < t_len; ++t) {
      double s = 0.0;
      for (int c = 0; c < dk; ++c) {
        const int e = h * dk + c;
        d_values(t, e) += cache.alpha(h, t) * d_ctx(0, e);
        s += d_ctx(0, e) * cache.values(t, e);
      }
      d_alpha[t] = s;
    }
    double dot = 0.0;
    for (int t = 0; t < t_len; ++t) dot += cache.alpha(h, t) * d_alpha[t];
    for (int t = 0; t < t_len; ++t) d_score[t] = cache.alpha(h, t) * (d_alpha[t] - dot);
    for (int t = 0; t < t_len; ++t) {
      const double g = d_score[t] * inv_sqrt_dk;
      for (int c = 0; c < dk; ++c) {
        const int e = h * dk + c;
        d_q(h, c) += g * cache.keys(t, e);
        d_keys(t, e) += g * q(h, c);
      }
    }
  }

  for (int t = 0; t < t_len; ++t)
    for (int d = 0; d < d_dim; ++d) {
      double s = 0.0;
      for (int e = 0; e < d_dim; ++e)
        s += d_keys(t, e) * wk(d, e) + d_values(t, e) * wv(d, e);
      d_encoded(t, d) += s;
    }
  for (int d = 0; d < d_dim; ++d)
    for (int e = 0; e < d_dim; ++e) {
      double sk = 0.0, sv = 0.0;
      for (int t = 0; t < t_len; ++t) {
        sk += encoded(t, d) * d_keys(t, e);
        sv += encoded(t, d) * d_values(t, e);
      }
      d_wk(d, e) += sk;
      d_wv(d, e) += sv;
    }
}

ClipForward run_forward(const Matrix& frames, const ToyModelParams& p) {
  ClipForward f;
  encode_with_cache(frames, p, &f);
  if (p.config.pool == PoolKind::mean) {
    f.pooled = mean_pool(f.encoded);
  } else {
    attention_forward(f.encoded, p, &f, &f.pooled, nullptr);
  }
  return f;
}

void run_backward(const Matrix& frames, const ClipForward& f, const ToyModelParams& p,
                  const Matrix& d_pooled, ParamMap& grads) {
  const int t_len = f.encoded.rows();
  const int d_dim = f.encoded.cols();
  Matrix d_encoded(t_len, d_dim);
  if (p.config.pool == PoolKind::mean) {
    for (int t = 0; t < t_len; ++t)
      for (int d = 0; d < d_dim; ++d) d_encoded(t, d) = d_pooled(0, d) / t_len;
  } else {
    attention_backward(f, p, d_pooled, grads, d_encoded);
  }
  encode_backward(frames, f, p, d_encoded, grads);
}

Matrix mtc_head(const Matrix& pooled, const ToyModelParams& p) {
  const Matrix& w = p.at("mtc.w");
  const Matrix& b = p.at("mtc.b");
  const int k = w.rows();
  const int d_dim = w.cols();
  Matrix logits(1, k);
  for (int j = 0; j < k; ++j) {
    double s = b(0, j);
    for (int d = 0; d < d_dim; ++d) s += w(j, d) * pooled(0, d);
    logits(0, j) = s;
  }
  return logits;
}

void mtc_head_backward(const Matrix& pooled, const ToyModelParams& p, const Matrix& d_logits,
                       ParamMap& grads, Matrix& d_pooled) {
  const Matrix& w = p.at("mtc.w");
  const int k = w.rows();
  const int d_dim = w.cols();
  Matrix& d_w = grad_of(grads, "mtc.w", k, d_dim);
  Matrix& d_b = grad_of(grads, "mtc.b", 1, k);
  for (int j = 0; j < k; ++j) {
    const double g = d_logits(0, j);
    d_b(0, j) += g;
    for (int d = 0; d < d_dim; ++d) {
      d_w(j, d) += g * pooled(0, d);
      d_pooled(0, d) += g * w(j, d);
    }
  }
}

Matrix seq_head(const Matrix& pooled, const ToyModelParams& p, int t_len) {
  const Matrix& q = p.at("seq.q");
  const Matrix& w = p.at("seq.w");
  const Matrix& b = p.at("seq.b");
  const int v = w.rows();
  const int d_dim = w.cols();
  if (t_len > q.rows())
    throw std::invalid_argument("forward_seq: sequence longer than t_max");
  Matrix logits(t_len, v);
  for (int t = 0; t < t_len; ++t)
    for (int j = 0; j < v; ++j) {
      double s = b(0, j);
      for (int d = 0; d < d_dim; ++d) s += w(j, d) * pooled(0, d) * q(t, d);
      logits(t, j) = s;
    }
  return logits;
}

void seq_head_backward(const Matrix& pooled, const ToyModelParams& p, const Matrix& d_logits,
                       ParamMap& grads, Matrix& d_pooled) {
  const Matrix& q = p.at("seq.q");
  const Matrix& w = p.at("seq.w");
  const int t_len = d_logits.rows();
  const int v = w.rows();
  const int d_dim = w.cols();
  Matrix& d_q = grad_of(grads, "seq.q", q.rows(), d_dim);
  Matrix& d_w = grad_of(grads, "seq.w", v, d_dim);
  Matrix& d_b = grad_of(grads, "seq.b", 1, v);
  for (int t = 0; t < t_len; ++t) {
    for (int j = 0; j < v; ++j) {
      const double g = d_logits(t, j);
      d_b(0, j) += g;
      for (int d = 0; d < d_dim; ++d) {
        const double u = pooled(0, d) * q(t, d);
        d_w(j, d) += g * u;
        const double du = g * w(j, d);
        d_pooled(0, d) += du * q(t, d);
        d_q(t, d) += du * pooled(0, d);
      }
    }
  }
}

void check_labels(const std::vector<FeatureClip>& dataset, const std::vector<int>& indices,
                  Objective objective, const ToyModelConfig& config) {
  for (int i : indices) {
    const FeatureClip& clip = dataset[i];
    if (objective == Objective::contrastive) {
      if (clip.text_id < 0 || clip.text_id >= config.text_rows)
        throw std::invalid_argument("contrastive objective needs a valid text_id per clip");
    } else {
      if (clip.positives.empty())
        throw std::invalid_argument("objective '" + std::string(to_string(objective)) +
                                    "' needs positives per clip");
    }
  }
}

BatchLoss mtc_batch(const std::vector<FeatureClip>& dataset, const std::vector<int>& indices,
                    const ToyModelParams& p) {
  const int m = static_cast<int>(indices.size());
  const int k = p.config.num_tags;
  std::vector<ClipForward> fwd(m);
  Matrix logits(m, k), targets(m, k);
  for (int i = 0; i < m; ++i) {
    const FeatureClip& clip = dataset[indices[i]];
    fwd[i] = run_forward(clip.frames, p);
    const Matrix row = mtc_head(fwd[i].pooled, p);
    for (int j = 0; j < k; ++j) logits(i, j) = row(0, j);
    for (int pos : clip.positives) targets(i, pos) = 1.0;
  }
  LossResult r = bce_multilabel(logits, targets);
  BatchLoss out;
  out.loss = r.loss;
  const Matrix& d_logits = r.grads.at("logits");
  for (int i = 0; i < m; ++i) {
    Matrix row(1, k);
    for (int j = 0; j < k; ++j) row(0, j) = d_logits(i, j);
    Matrix d_pooled(1, p.config.embed_dim);
    mtc_head_backward(fwd[i].pooled, p, row, out.grads, d_pooled);
    run_backward(dataset[indices[i]].frames, fwd[i], p, d_pooled, out.grads);
  }
  return out;
}

BatchLoss par_batch(const std::vector<FeatureClip>& dataset, const std::vector<int>& indices,
                    const ToyModelParams& p) {
  const int m = static_cast<int>(indices.size());
  BatchLoss out;
  for (int i = 0; i < m; ++i) {
    const FeatureClip& clip = dataset[indices[i]];
    ClipForward f = run_forward(clip.frames, p);
    const int t_len = static_cast<int>(clip.positives.size());
    SequenceLogits seq;
    seq.logits = seq_head(f.pooled, p, t_len);
    seq.targets = clip.positives;
    LossResult r = nll_sequence(seq);
    out.loss += r.loss / m;
    Matrix d_logits = r.grads.at("logits");
    d_logits.scale(1.0 / m);
    Matrix d_pooled(1, p.config.embed_dim);
    seq_head_backward(f.pooled, p, d_logits, out.grads, d_pooled);
    run_backward(clip.frames, f, p, d_pooled, out.grads);
  }
  return out;
}

BatchLoss contrastive_batch(const std::vector<FeatureClip>& dataset,
                            const std::vector<int>& indices, const ToyModelParams& p,
                            double tau) {
  const int m = static_cast<int>(indices.size());
  const int d_dim = p.config.embed_dim;
  const Matrix& table = p.at("text.table");
  std::vector<ClipForward> fwd(m);
  EmbeddingBatch audio{Matrix(m, d_dim)}, text{Matrix(m, d_dim)};
  for (int i = 0; i < m; ++i) {
    const FeatureClip& clip = dataset[indices[i]];
    fwd[i] = run_forward(clip.frames, p);
    for (int d = 0; d < d_dim; ++d) {
      audio.rows(i, d) = fwd[i].pooled(0, d);
      text.rows(i, d) = table(clip.text_id, d);
    }
  }
  LossResult r = infonce_symmetric(audio, text, tau);
  BatchLoss out;
  out.loss = r.loss;
  const Matrix& d_audio = r.grads.at("audio");
  const Matrix& d_text = r.grads.at("text");
  Matrix& d_table = grad_of(out.grads, "text.table", table.rows(), d_dim);
  for (int i = 0; i < m; ++i) {
    const FeatureClip& clip = dataset[indices[i]];
    Matrix d_pooled(1, d_dim);
    for (int d = 0; d < d_dim; ++d) {
      d_pooled(0, d) = d_audio(i, d);
      d_table(clip.text_id, d) += d_text(i, d);
    }
    run_backward(clip.frames, fwd[i], p, d_pooled, out.grads);
  }
  return out;
}

}  // namespace

void ToyModelConfig::validate() const {
  if (feat_dim < 1 || hidden_dim < 1 || embed_dim < 1 || num_tags < 1 || t_max < 1)
    throw std::invalid_argument("ToyModelConfig: dimensions must be positive");
  if (pool == PoolKind::attention) {
    if (heads < 1) throw std::invalid_argument("ToyModelConfig: heads must be >= 1");
    if (embed_dim % heads != 0)
      throw std::invalid_argument("ToyModelConfig: embed_dim must be divisible by heads");
  }
  if (text_rows < 0) throw std::invalid_argument("ToyModelConfig: negative text_rows");
}

Matrix& ToyModelParams::at(const std::string& name) {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw std::out_of_range("missing parameter tensor: " + name);
  return it->second;
}

const Matrix& ToyModelParams::at(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw std::out_of_range("missing parameter tensor: " + name);
  return it->second;
}

ToyModelParams init_params(const ToyModelConfig& config, Rng& rng) {
  config.validate();
  ToyModelParams p;
  p.config = config;

  auto gaussian = [&rng](int rows, int cols, double scale) {
    Matrix m(rows, cols);
    for (double& v : m.data()) v = scale * rng.normal();
    return m;
  };

  p.tensors["enc.w1"] = gaussian(config.hidden_dim, config.feat_dim,
                                 1.0 / std::sqrt(static_cast<double>(config.feat_dim)));
  p.tensors["enc.b1"] = Matrix(1, config.hidden_dim);
  p.tensors["enc.w2"] = gaussian(config.embed_dim, config.hidden_dim,
                                 1.0 / std::sqrt(static_cast<double>(config.hidden_dim)));
  p.tensors["enc.b2"] = Matrix(1, config.embed_dim);
  if (config.pool == PoolKind::attention) {
    const int dk = config.embed_dim / config.heads;
    const double s = 1.0 / std::sqrt(static_cast<double>(config.embed_dim));
    p.tensors["pool.q"] = gaussian(config.heads, dk, 1.0);
    p.tensors["pool.wk"] = gaussian(config.embed_dim, config.embed_dim, s);
    p.tensors["pool.wv"] = gaussian(config.embed_dim, config.embed_dim, s);
    p.tensors["pool.wo"] = gaussian(config.embed_dim, config.embed_dim, s);
  }
  p.tensors["mtc.w"] = gaussian(config.num_tags, config.embed_dim,
                                1.0 / std::sqrt(static_cast<double>(config.embed_dim)));
  p.tensors["mtc.b"] = Matrix(1, config.num_tags);
  p.tensors["seq.q"] = gaussian(config.t_max, config.embed_dim, 1.0);
  p.tensors["seq.w"] = gaussian(config.num_tags, config.embed_dim,
                                1.0 / std::sqrt(static_cast<double>(config.embed_dim)));
  p.tensors["seq.b"] = Matrix(1, config.num_tags);
  if (config.text_rows > 0)
    p.tensors["text.table"] = gaussian(config.text_rows, config.embed_dim, 1.0);
  return p;
}

Matrix encode(const Matrix& frames, const ToyModelParams& params) {
  return encode_with_cache(frames, params, nullptr);
}

Matrix mean_pool(const Matrix& frames) {
  if (frames.rows() < 1) throw std::invalid_argument("mean_pool: need at least one frame");
  Matrix out(1, frames.cols());
  for (int t = 0; t < frames.rows(); ++t)
    for (int d = 0; d < frames.cols(); ++d) out(0, d) += frames(t, d);
  out.scale(1.0 / frames.rows());
  return out;
}

Matrix attention_pool(const Matrix& frames, const ToyModelParams& params, Matrix* alpha_out) {
  if (frames.rows() < 1) throw std::invalid_argument("attention_pool: need at least one frame");
  Matrix out;
  attention_forward(frames, params, nullptr, &out, alpha_out);
  return out;
}

Matrix audio_embedding(const FeatureClip& clip, const ToyModelParams& params) {
  return run_forward(clip.frames, params).pooled;
}

Matrix forward_mtc(const FeatureClip& clip, const ToyModelParams& params) {
  return mtc_head(run_forward(clip.frames, params).pooled, params);
}

Matrix forward_seq(const FeatureClip& clip, const ToyModelParams& params, int t_len) {
  return seq_head(run_forward(clip.frames, params).pooled, params, t_len);
}

Objective objective_from_string(const std::string& name) {
  if (name == "mtc") return Objective::mtc;
  if (name == "par") return Objective::par;
  if (name == "contrastive") return Objective::contrastive;
  if (name == "mtl") return Objective::mtl;
  throw std::invalid_argument("unknown objective: " + name);
}

const char* to_string(Objective objective) {
  switch (objective) {
    case Objective::mtc: return "mtc";
    case Objective::par: return "par";
    case Objective::contrastive: return "contrastive";
    case Objective::mtl: return "mtl";
  }
  return "unknown";
}

void TrainConfig::validate() const {
  if (steps < 1) throw std::invalid_argument("TrainConfig: steps must be >= 1");
  if (batch < 1) throw std::invalid_argument("TrainConfig: batch must be >= 1");
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("TrainConfig: bad learning_rate");
  if (lambda < 0.0) throw std::invalid_argument("TrainConfig: lambda must be nonnegative");
  if (!(tau > 0.0)) throw std::invalid_argument("TrainConfig: tau must be positive");
}

BatchLoss batch_loss_and_grads(const std::vector<FeatureClip>& dataset,
                               const std::vector<int>& batch_indices,
                               const ToyModelParams& params, Objective objective, double lambda,
                               double tau) {
  if (batch_indices.empty()) throw std::invalid_argument("batch_loss_and_grads: empty batch");
  check_labels(dataset, batch_indices, objective, params.config);
  switch (objective) {
    case Objective::mtc:
      return mtc_batch(dataset, batch_indices, params);
    case Objective::par:
      return par_batch(dataset, batch_indices, params);
    case Objective::contrastive:
      return contrastive_batch(dataset, batch_indices, params, tau);
    case Objective::mtl: {
      BatchLoss mtc = mtc_batch(dataset, batch_indices, params);
      BatchLoss gen = par_batch(dataset, batch_indices, params);
      LossResult combined = mtl_combine(mtc.loss, mtc.grads, gen.loss, gen.grads, lambda);
      return BatchLoss{combined.loss, std::move(combined.grads)};
    }
  }
  throw std::logic_error("unreachable objective");
}

double evaluate_objective(const std::vector<FeatureClip>& dataset, const ToyModelParams& params,
                          Objective objective, double lambda, double tau, int batch) {
  if (dataset.empty()) throw std::invalid_argument("evaluate_objective: empty dataset");
  const int n = static_cast<int>(dataset.size());
  double total = 0.0;
  int counted = 0;
  for (int begin = 0; begin < n; begin += batch) {
    const int end = std::min(n, begin + batch);
    std::vector<int> indices(end - begin);
    std::iota(indices.begin(), indices.end(), begin);
    BatchLoss bl = batch_loss_and_grads(dataset, indices, params, objective, lambda, tau);
    total += bl.loss * (end - begin);
    counted += end - begin;
  }
  return total / counted;
}

TrainResult train_toy(const std::vector<FeatureClip>& dataset, const ToyModelConfig& model,
                      const TrainConfig& config) {
  if (dataset.empty()) throw std::invalid_argument("train_toy: empty dataset");
  model.validate();
  config.validate();
  std::vector<int> all(dataset.size());
  std::iota(all.begin(), all.end(), 0);
  check_labels(dataset, all, config.objective, model);

  Rng init_rng(Rng::derive(config.seed, "init"));
  TrainResult result;
  result.params = init_params(model, init_rng);

  Rng batch_rng(Rng::derive(config.seed, "batches"));
  std::vector<int> order = all;
  std::size_t cursor = order.size();  // forces a shuffle before the first batch
  const int batch_size = std::min<int>(config.batch, static_cast<int>(dataset.size()));

  const bool tracks_map =
      config.objective == Objective::mtc || config.objective == Objective::mtl;

  for (int step = 1; step <= config.steps; ++step) {
    std::vector<int> batch(batch_size);
    for (int i = 0; i < batch_size; ++i) {
      if (cursor == order.size()) {
        batch_rng.shuffle(order);
        cursor = 0;
      }
      batch[i] = order[cursor++];
    }
    // A batch is a sample set; canonical within-batch order keeps summation
    // bit-reproducible regardless of where the epoch cursor landed.
    std::sort(batch.begin(), batch.end());
    BatchLoss bl = batch_loss_and_grads(dataset, batch, result.params, config.objective,
                                        config.lambda, config.tau);
    if (!std::isfinite(bl.loss))
      throw std::runtime_error("train_toy: non-finite loss at step " + std::to_string(step));
    for (const auto& [name, grad] : bl.grads) {
      Matrix& tensor = result.params.at(name);
      for (std::size_t i = 0; i < grad.size(); ++i)
        tensor.data()[i] -= config.learning_rate * grad.data()[i];
    }
    TraceRow row{step, bl.loss, std::nullopt};
    if (tracks_map && ((config.map_every > 0 && step % config.map_every == 0) ||
                       step == config.steps)) {
      auto [scores, labels] = score_dataset(dataset, result.params);
      row.map = eval_map(scores, labels).value;
    }
    result.trace.push_back(std::move(row));
  }
  if (tracks_map) result.final_map = result.trace.back().map;
  return result;
}

MapResult eval_map(const Matrix& scores, const Matrix& labels) {
  if (!scores.same_shape(labels)) throw std::invalid_argument("eval_map: shape mismatch");
  const int m = scores.rows();
  const int k = scores.cols();
  MapResult out;
  double sum_ap = 0.0;
  int included = 0;
  std::vector<int> order(m);
  for (int j = 0; j < k; ++j) {
    int positives = 0;
    for (int i = 0; i < m; ++i)
      if (labels(i, j) == 1.0) ++positives;
    if (positives == 0) {
      out.excluded_classes.push_back(j);
      continue;
    }
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (scores(a, j) != scores(b, j)) return scores(a, j) > scores(b, j);
      return a < b;
    });
    double ap = 0.0;
    int hits = 0;
    for (int rank = 1; rank <= m; ++rank) {
      if (labels(order[rank - 1], j) == 1.0) {
        ++hits;
        ap += static_cast<double>(hits) / rank;
      }
    }
    sum_ap += ap / positives;
    ++included;
  }
  if (included == 0) throw std::invalid_argument("eval_map: no class has a positive example");
  out.value = sum_ap / included;
  return out;
}

std::pair<Matrix, Matrix> score_dataset(const std::vector<FeatureClip>& dataset,
                                        const ToyModelParams& params) {
  const int m = static_cast<int>(dataset.size());
  const int k = params.config.num_tags;
  Matrix scores(m, k), labels(m, k);
  for (int i = 0; i < m; ++i) {
    const Matrix row = forward_mtc(dataset[i], params);
    for (int j = 0; j < k; ++j) scores(i, j) = row(0, j);
    for (int pos : dataset[i].positives) labels(i, pos) = 1.0;
  }
  return {std::move(scores), std::move(labels)};
}

void save_checkpoint(const ToyModelParams& params, const std::string& path) {
  json j;
  j["config"]["feat_dim"] = params.config.feat_dim;
  j["config"]["hidden_dim"] = params.config.hidden_dim;
  j["config"]["embed_dim"] = params.config.embed_dim;
  j["config"]["pool"] = params.config.pool == PoolKind::mean ? "mean" : "attention";
  j["config"]["heads"] = params.config.heads;
  j["config"]["num_tags"] = params.config.num_tags;
  j["config"]["t_max"] = params.config.t_max;
  j["config"]["text_rows"] = params.config.text_rows;
  for (const auto& [name, tensor] : params.tensors) {
    j["tensors"][name]["shape"] = {tensor.rows(), tensor.cols()};
    j["tensors"][name]["data"] = tensor.data();
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << j.dump(2) << '\n';
}

ToyModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.contains("config") || !j.contains("tensors"))
    throw std::runtime_error("malformed checkpoint: " + path);
  ToyModelParams p;
  const json& c = j["config"];
  p.config.feat_dim = c.at("feat_dim").get<int>();
  p.config.hidden_dim = c.at("hidden_dim").get<int>();
  p.config.embed_dim = c.at("embed_dim").get<int>();
  p.config.pool = c.at("pool").get<std::string>() == "mean" ? PoolKind::mean : PoolKind::attention;
  p.config.heads = c.at("heads").get<int>();
  p.config.num_tags = c.at("num_tags").get<int>();
  p.config.t_max = c.at("t_max").get<int>();
  p.config.text_rows = c.at("text_rows").get<int>();
  for (const auto& [name, t] : j["tensors"].items()) {
    const auto shape = t.at("shape").get<std::vector<int>>();
    if (shape.size() != 2) throw std::runtime_error("checkpoint tensor '" + name + "': bad shape");
    Matrix m(shape[0], shape[1]);
    const auto data = t.at("data").get<std::vector<double>>();
    if (data.size() != m.size())
      throw std::runtime_error("checkpoint tensor '" + name + "': data size mismatch");
    m.data() = data;
    p.tensors.emplace(name, std::move(m));
  }
  return p;
}

void write_trace_csv(const std::vector<TraceRow>& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace: " + path);
  bool any_map = false;
  for (const TraceRow& r : trace) any_map |= r.map.has_value();
  out << (any_map ? "step,loss,map\n" : "step,loss\n");
  char buf[64];
  for (const TraceRow& r : trace) {
    std::snprintf(buf, sizeof(buf), "%.12g", r.loss);
    out << r.step << ',' << buf;
    if (any_map) {
      out << ',';
      if (r.map) {
        std::snprintf(buf, sizeof(buf), "%.12g", *r.map);
        out << buf;
      }
    }
    out << '\n';
  }
}

}  // namespace uts
