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

#include "uts/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "uts/rng.hpp"

namespace uts {

namespace detail {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log_sum_exp(const double* v, int n) {
  double m = v[0];
  for (int i = 1; i < n; ++i) m = std::max(m, v[i]);
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

void softmax_inplace(double* v, int n) {
  double m = v[0];
  for (int i = 1; i < n; ++i) m = std::max(m, v[i]);
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    v[i] = std::exp(v[i] - m);
    s += v[i];
  }
  for (int i = 0; i < n; ++i) v[i] /= s;
}

}  // namespace detail

LossResult bce_multilabel(const Matrix& logits, const Matrix& targets) {
  if (!logits.same_shape(targets))
    throw std::invalid_argument("bce_multilabel: logits and targets shape mismatch");
  const int m = logits.rows();
  const int k = logits.cols();
  if (m < 1) throw std::invalid_argument("bce_multilabel: need at least one sample");
  for (double y : targets.data())
    if (y != 0.0 && y != 1.0)
      throw std::invalid_argument("bce_multilabel: targets must be 0 or 1");

  LossResult out;
  Matrix grad(m, k);
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < k; ++j) {
      const double z = logits(i, j);
      const double y = targets(i, j);
      // Stable form of -[y log sigma(z) + (1-y) log(1 - sigma(z))].
      total += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
      grad(i, j) = (detail::sigmoid(z) - y) / m;
    }
  }
  out.loss = total / m;
  out.grads["logits"] = std::move(grad);
  return out;
}

LossResult infonce_symmetric(const EmbeddingBatch& audio, const EmbeddingBatch& text,
                             double tau) {
  const Matrix& a = audio.rows;
  const Matrix& t = text.rows;
  if (a.rows() < 1 || a.cols() < 1)
    throw std::invalid_argument("infonce_symmetric: empty embedding batch");
  if (a.rows() != t.rows() || a.cols() != t.cols())
    throw std::invalid_argument("infonce_symmetric: audio and text shape mismatch");
  if (!(tau > 0.0)) throw std::invalid_argument("infonce_symmetric: tau must be positive");
  const int m = a.rows();
  const int d = a.cols();

  auto normalize_rows = [d](const Matrix& x, const char* name) {
    const int rows = x.rows();
    Matrix unit(rows, d);
    std::vector<double> norms(rows);
    for (int i = 0; i < rows; ++i) {
      double s = 0.0;
      for (int j = 0; j < d; ++j) s += x(i, j) * x(i, j);
      const double norm = std::sqrt(s);
      if (norm == 0.0)
        throw std::invalid_argument(std::string("infonce_symmetric: ") + name + " row " +
                                    std::to_string(i) + " has zero norm");
      norms[i] = norm;
      for (int j = 0; j < d; ++j) unit(i, j) = x(i, j) / norm;
    }
    return std::make_pair(std::move(unit), std::move(norms));
  };

  auto [ua, na] = normalize_rows(a, "audio");
  auto [ut, nt] = normalize_rows(t, "text");

  // Scaled similarity matrix s[i][j] = cos(a_i, t_j) / tau.
  Matrix s(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double dot = 0.0;
      for (int c = 0; c < d; ++c) dot += ua(i, c) * ut(j, c);
      s(i, j) = dot / tau;
    }

  double loss = 0.0;
  Matrix p_row(m, m);  // softmax across each row
  Matrix p_col(m, m);  // softmax down each column
  std::vector<double> buf(m);
  for (int i = 0; i < m; ++i) {
    loss -= s(i, i) - detail::log_sum_exp(s.row(i), m);
    std::copy(s.row(i), s.row(i) + m, buf.data());
    detail::softmax_inplace(buf.data(), m);
    for (int j = 0; j < m; ++j) p_row(i, j) = buf[j];
  }
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) buf[i] = s(i, j);
    loss -= s(j, j) - detail::log_sum_exp(buf.data(), m);
    detail::softmax_inplace(buf.data(), m);
    for (int i = 0; i < m; ++i) p_col(i, j) = buf[i];
  }
  loss /= 2.0 * m;

  // d loss / d s[i][j] = -[ (1{i==j} - p_row) + (1{i==j} - p_col) ] / (2M)
  Matrix ds(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const double ind = i == j ? 1.0 : 0.0;
      ds(i, j) = -((ind - p_row(i, j)) + (ind - p_col(i, j))) / (2.0 * m);
    }

  // Through s = (ua ut^T) / tau, then through the row normalization:
  // for x with unit u = x/|x| and upstream g, dx = (g - u (u.g)) / |x|.
  Matrix d_ua(m, d), d_ut(m, d);
  for (int i = 0; i < m; ++i)
    for (int c = 0; c < d; ++c) {
      double ga = 0.0, gt = 0.0;
      for (int j = 0; j < m; ++j) {
        ga += ds(i, j) * ut(j, c);
        gt += ds(j, i) * ua(j, c);
      }
      d_ua(i, c) = ga / tau;
      d_ut(i, c) = gt / tau;
    }

  auto through_normalization = [d](const Matrix& unit, const std::vector<double>& norms,
                                   const Matrix& g) {
    const int rows = unit.rows();
    Matrix dx(rows, d);
    for (int i = 0; i < rows; ++i) {
      double proj = 0.0;
      for (int c = 0; c < d; ++c) proj += unit(i, c) * g(i, c);
      for (int c = 0; c < d; ++c) dx(i, c) = (g(i, c) - unit(i, c) * proj) / norms[i];
    }
    return dx;
  };

  LossResult out;
  out.loss = loss;
  out.grads["audio"] = through_normalization(ua, na, d_ua);
  out.grads["text"] = through_normalization(ut, nt, d_ut);
  return out;
}

LossResult nll_sequence(const SequenceLogits& batch) {
  const Matrix& logits = batch.logits;
  const int t_len = logits.rows();
  const int v = logits.cols();
  if (t_len != static_cast<int>(batch.targets.size()))
    throw std::invalid_argument("nll_sequence: logits rows and targets length mismatch");
  if (t_len > 0 && v < 2) throw std::invalid_argument("nll_sequence: need at least 2 classes");

  LossResult out;
  Matrix grad(t_len, v);
  double loss = 0.0;
  std::vector<double> buf(v);
  for (int t = 0; t < t_len; ++t) {
    const int target = batch.targets[t];
    if (target < 0 || target >= v)
      throw std::invalid_argument("nll_sequence: target id " + std::to_string(target) +
                                  " out of range at position " + std::to_string(t));
    loss += detail::log_sum_exp(logits.row(t), v) - logits(t, target);
    std::copy(logits.row(t), logits.row(t) + v, buf.data());
    detail::softmax_inplace(buf.data(), v);
    for (int j = 0; j < v; ++j) grad(t, j) = buf[j] - (j == target ? 1.0 : 0.0);
  }
  out.loss = loss;
  out.grads["logits"] = std::move(grad);
  return out;
}

std::vector<bool> assign_ar_par(int batch_size, double ar_fraction, std::uint64_t seed) {
  if (batch_size < 0) throw std::invalid_argument("assign_ar_par: negative batch size");
  if (ar_fraction < 0.0 || ar_fraction > 1.0)
    throw std::invalid_argument("assign_ar_par: ar_fraction must be in [0, 1]");
  const int n_ar = static_cast<int>(std::lround(ar_fraction * batch_size));
  std::vector<int> order(batch_size);
  for (int i = 0; i < batch_size; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<bool> is_ar(batch_size, false);
  for (int i = 0; i < n_ar; ++i) is_ar[order[i]] = true;
  return is_ar;
}

double mixed_caption_loss(const std::vector<double>& ar_losses,
                          const std::vector<double>& par_losses, double ar_fraction) {
  if (ar_fraction < 0.0 || ar_fraction > 1.0)
    throw std::invalid_argument("mixed_caption_loss: ar_fraction must be in [0, 1]");
  const std::size_t total = ar_losses.size() + par_losses.size();
  const long expected_ar = std::lround(ar_fraction * static_cast<double>(total));
  if (expected_ar != static_cast<long>(ar_losses.size()))
    throw std::invalid_argument("mixed_caption_loss: split has " +
                                std::to_string(ar_losses.size()) + " AR samples, expected " +
                                std::to_string(expected_ar));
  double loss = 0.0;
  for (double l : ar_losses) loss += l;
  for (double l : par_losses) loss += l;
  return loss;
}

LossResult mtl_combine(double l_mtc, const std::map<std::string, Matrix>& grads_mtc,
                       double l_gen, const std::map<std::string, Matrix>& grads_gen,
                       double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("mtl_combine: lambda must be nonnegative");
  LossResult out;
  out.loss = l_mtc + lambda * l_gen;
  out.grads = grads_mtc;
  for (const auto& [name, g] : grads_gen) {
    auto it = out.grads.find(name);
    if (it == out.grads.end()) {
      Matrix scaled = g;
      scaled.scale(lambda);
      out.grads.emplace(name, std::move(scaled));
    } else {
      if (!it->second.same_shape(g))
        throw std::invalid_argument("mtl_combine: shape conflict on shared key '" + name + "'");
      for (std::size_t i = 0; i < g.size(); ++i)
        it->second.data()[i] += lambda * g.data()[i];
    }
  }
  return out;
}

}  // namespace uts
