/* Copyright 2026 The SparseCNN Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "sparsecnn/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sparsecnn/errors.hpp"
#include "sparsecnn/kernels.hpp"
#include "sparsecnn/parallel.hpp"

namespace sparsecnn {

namespace {

template <typename T>
std::vector<T> transpose(const T* a, std::int64_t rows, std::int64_t cols) {
  std::vector<T> t(static_cast<std::size_t>(rows * cols));
  parallel_for(
      cols,
      [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t c = begin; c < end; ++c) {
          T* dst = t.data() + c * rows;
          for (std::int64_t r = 0; r < rows; ++r) dst[r] = a[r * cols + c];
        }
      },
      16);
  return t;
}

// c (m x n) = a (m x k) * b (k x n), rows split across workers.
template <typename T>
void gemm_rows(std::int64_t m, std::int64_t n, std::int64_t k, const T* a, const T* b, T* c) {
  parallel_for(
      m,
      [&](std::int64_t begin, std::int64_t end) {
        kernels::gemm(end - begin, n, k, a + begin * k, k, b, n, static_cast<const T*>(nullptr), c + begin * n, n);
      },
      16);
}

template <typename T>
void accumulate(std::vector<T>& dst, const std::vector<T>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

template <typename T>
ConvGrads<T> conv_backward(std::span<const T> d_out, const GatherPlan<T>& plan, const ConvLayer<T>& layer,
                           std::int64_t in_rows, bool need_input) {
  const std::int64_t a_out = plan.a_out();
  const std::int64_t cols = plan.cols;
  const std::int64_t n_out = layer.n_out;
  const int n_in = layer.n_in;
  if (cols != layer.rows()) throw InternalError("gather width does not match layer");
  if (static_cast<std::int64_t>(d_out.size()) != a_out * n_out) throw InternalError("output gradient has wrong size");

  ConvGrads<T> g;
  g.d_bias.assign(static_cast<std::size_t>(n_out), T(0));
  kernels::column_sums(a_out, n_out, d_out.data(), n_out, g.d_bias.data());

  g.d_weights.assign(static_cast<std::size_t>(cols * n_out), T(0));
  if (a_out > 0) {
    const std::vector<T> qt = transpose(plan.q.data(), a_out, cols);
    gemm_rows(cols, n_out, a_out, qt.data(), d_out.data(), g.d_weights.data());
  }
  if (!need_input) return g;

  g.d_input.assign(static_cast<std::size_t>(in_rows * n_in), T(0));
  if (a_out == 0) return g;
  const std::vector<T> wt = transpose(layer.weights.values.data(), cols, n_out);
  std::vector<T> dq(static_cast<std::size_t>(a_out * cols));
  gemm_rows(a_out, cols, n_out, d_out.data(), wt.data(), dq.data());
  const std::int64_t fp = plan.rules.footprint;
  // Channels are disjoint across workers, so the scatter order is fixed.
  parallel_for(
      n_in,
      [&](std::int64_t j0, std::int64_t j1) {
        for (std::int64_t r = 0; r < a_out; ++r) {
          const std::int32_t* rule = plan.rules.entries.data() + r * fp;
          const T* src = dq.data() + r * cols;
          for (std::int64_t k = 0; k < fp; ++k) {
            if (rule[k] < 0) continue;
            T* dst = g.d_input.data() + static_cast<std::int64_t>(rule[k]) * n_in;
            for (std::int64_t j = j0; j < j1; ++j) dst[j] += src[k * n_in + j];
          }
        }
      },
      1);
  return g;
}

template <typename T>
std::vector<T> pool_backward(std::span<const T> d_out, const Rulebook& rules, std::span<const std::int32_t> argmax,
                             int n, std::int64_t in_rows) {
  if (static_cast<std::int64_t>(d_out.size()) != rules.rows * n || argmax.size() != d_out.size()) {
    throw InternalError("pooling gradient has wrong size");
  }
  std::vector<T> d_in(static_cast<std::size_t>(in_rows * n), T(0));
  parallel_for(
      n,
      [&](std::int64_t j0, std::int64_t j1) {
        for (std::int64_t r = 0; r < rules.rows; ++r) {
          const std::int32_t* rule = rules.entries.data() + r * rules.footprint;
          for (std::int64_t j = j0; j < j1; ++j) {
            const std::int32_t src = rule[argmax[static_cast<std::size_t>(r * n + j)]];
            if (src >= 0) d_in[static_cast<std::size_t>(src) * n + j] += d_out[static_cast<std::size_t>(r * n + j)];
          }
        }
      },
      1);
  return d_in;
}

template <typename T>
std::vector<T> softmax(std::span<const T> logits) {
  std::vector<T> p(logits.size());
  if (logits.empty()) return p;
  const T mx = *std::max_element(logits.begin(), logits.end());
  T sum = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) sum += p[i] = std::exp(logits[i] - mx);
  for (auto& v : p) v /= sum;
  return p;
}

template <typename T>
LossResult<T> softmax_nll(std::span<const T> logits, int label) {
  if (label < 0 || label >= static_cast<int>(logits.size())) {
    throw InvalidArgument("label " + std::to_string(label) + " out of range");
  }
  const T mx = *std::max_element(logits.begin(), logits.end());
  T sum = 0;
  for (T v : logits) sum += std::exp(v - mx);
  LossResult<T> out;
  out.loss = std::log(sum) - (logits[static_cast<std::size_t>(label)] - mx);
  out.d_logits.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out.d_logits[i] = std::exp(logits[i] - mx) / sum;
  out.d_logits[static_cast<std::size_t>(label)] -= T(1);
  return out;
}

template <typename T>
LossResult<T> batch_loss(std::span<const T> logits, std::span<const int> labels, int classes) {
  const std::size_t batch = labels.size();
  if (logits.size() != batch * static_cast<std::size_t>(classes)) throw InvalidArgument("logit count != batch * classes");
  LossResult<T> out;
  out.d_logits.resize(logits.size());
  double total = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    const auto one = softmax_nll<T>(logits.subspan(b * classes, static_cast<std::size_t>(classes)), labels[b]);
    total += one.loss;
    for (int c = 0; c < classes; ++c) out.d_logits[b * classes + c] = one.d_logits[c] / static_cast<T>(batch);
  }
  out.loss = batch ? static_cast<T>(total / static_cast<double>(batch)) : T(0);
  return out;
}

template <typename T>
void sgd_step(std::span<ParamState<T>* const> params, double lr, double momentum, double weight_decay) {
  for (ParamState<T>* p : params) {
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double g = static_cast<double>(p->grad[i]) + weight_decay * static_cast<double>(p->values[i]);
      p->velocity[i] = static_cast<T>(momentum * static_cast<double>(p->velocity[i]) - lr * g);
      p->values[i] += p->velocity[i];
      p->grad[i] = T(0);
    }
  }
}

template <typename T>
BatchGrid<T> make_batch(std::span<const SparseGrid<T>* const> samples) {
  if (samples.empty()) throw InvalidArgument("empty batch");
  BatchGrid<T> batch;
  const SparseGrid<T>& first = *samples.front();
  batch.n = first.features();
  batch.ground = first.ground();
  batch.offsets.push_back(0);
  for (const SparseGrid<T>* s : samples) {
    if (s->shape() != first.shape() || s->features() != batch.n) {
      throw InvalidArgument("batch samples must share grid shape and feature count");
    }
    if (!std::equal(s->ground().begin(), s->ground().end(), batch.ground.begin())) {
      throw InvalidArgument("batch samples must share a ground state");
    }
    batch.sets.push_back(s->index_ptr());
    batch.offsets.push_back(batch.offsets.back() + s->active_count());
    batch.rows.insert(batch.rows.end(), s->rows().begin(), s->rows().end());
  }
  return batch;
}

namespace {

// Output active sets and one stacked rulebook for a pooling or convolution
// stage applied to every sample.
template <typename T, typename SitesFn, typename RulesFn>
Rulebook stack_rules(const BatchGrid<T>& in, std::vector<SiteIndexPtr>& out_sets, std::vector<std::int64_t>& out_offsets,
                     SitesFn sites, RulesFn rules_of) {
  const std::size_t batch = in.batch();
  out_sets.assign(batch, nullptr);
  std::vector<Rulebook> parts(batch);
  parallel_for(
      static_cast<std::int64_t>(batch),
      [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t b = begin; b < end; ++b) {
          out_sets[b] = sites(b);
          parts[b] = rules_of(b, *out_sets[b], static_cast<std::int32_t>(in.offsets[b]));
        }
      },
      1);
  out_offsets.assign(1, 0);
  Rulebook rules;
  rules.footprint = parts.empty() ? 0 : parts.front().footprint;
  for (auto& p : parts) {
    out_offsets.push_back(out_offsets.back() + p.rows);
    rules.entries.insert(rules.entries.end(), p.entries.begin(), p.entries.end());
  }
  rules.rows = out_offsets.back();
  return rules;
}

}  // namespace

template <typename T>
BatchForwardResult<T> forward_batch(const Network<T>& net, std::span<const SparseGrid<T>* const> samples,
                                    const BatchForwardOptions<T>& options, Tape<T>* tape) {
  const GridShape shape = net.input_shape();
  for (const SparseGrid<T>* s : samples) {
    if (s->shape() != shape) throw InvalidArgument("sample grid does not match the network input field");
    if (s->features() != net.plan().spec.n_input) throw InvalidArgument("sample feature count does not match network");
  }
  const auto& frozen = options.frozen_grounds;
  const auto& stages = net.stages();
  if (frozen && frozen->size() != stages.size() + 1) throw InvalidArgument("frozen ground list has wrong length");
  if (!options.fmp_seeds.empty() && options.fmp_seeds.size() != samples.size()) {
    throw InvalidArgument("one fractional pooling seed per sample is required");
  }

  BatchGrid<T> cur = make_batch(samples);
  if (frozen) cur.ground = (*frozen)[0];
  BatchForwardResult<T> result;
  if (tape) {
    tape->entries.clear();
    tape->batch = samples.size();
  }

  for (std::size_t i = 0; i < stages.size(); ++i) {
    const Stage<T>& stage = stages[i];
    TapeEntry<T> entry;
    entry.in_rows = cur.total_rows();
    entry.n_in = cur.n;
    std::vector<SiteIndexPtr> out_sets;
    std::vector<std::int64_t> out_offsets;
    BatchGrid<T> next;

    if (stage.kind == Stage<T>::Kind::conv) {
      const ConvLayer<T>& layer = stage.conv;
      if (layer.n_in != cur.n) throw InternalError("layer input width mismatch");
      const FilterGeometry& geom = layer.geometry;
      entry.gather.rules = stack_rules(
          cur, out_sets, out_offsets, [&](std::int64_t b) { return conv_active_sites(*cur.sets[b], geom); },
          [&](std::int64_t b, const SiteIndex& out, std::int32_t base) {
            return build_rulebook(*cur.sets[b], out, geom, base);
          });
      entry.gather.cols = layer.rows();
      const std::int64_t a_out = entry.gather.rules.rows;
      entry.gather.q.resize(static_cast<std::size_t>(a_out * entry.gather.cols));
      detail::gather_rows<T>(entry.gather.rules, cur.rows, cur.n, cur.ground, entry.gather.q.data());
      next.rows.resize(static_cast<std::size_t>(a_out * layer.n_out));
      detail::matmul_bias(a_out, entry.gather.cols, entry.gather.q.data(), layer, next.rows.data());
      kernels::relu(static_cast<std::int64_t>(next.rows.size()), next.rows.data());
      result.macs += a_out * entry.gather.cols * layer.n_out;
      next.n = layer.n_out;
      if (frozen) {
        next.ground = (*frozen)[i + 1];
      } else {
        next.ground = conv_ground<T>(cur.ground, layer);
        kernels::relu(static_cast<std::int64_t>(next.ground.size()), next.ground.data());
      }
    } else {
      if (stage.kind == Stage<T>::Kind::max_pool) {
        const FilterGeometry fp = stage.pool.footprint();
        entry.gather.rules = stack_rules(
            cur, out_sets, out_offsets, [&](std::int64_t b) { return conv_active_sites(*cur.sets[b], fp); },
            [&](std::int64_t b, const SiteIndex& out, std::int32_t base) {
              return build_rulebook(*cur.sets[b], out, fp, base);
            });
      } else {
        const std::int32_t m_in = cur.sets.front()->shape().m;
        std::vector<FmpRegions> regions(cur.batch());
        for (std::size_t b = 0; b < cur.batch(); ++b) {
          const std::uint64_t seed = options.fmp_seeds.empty() ? 0 : options.fmp_seeds[b];
          regions[b] = fmp_regions(m_in, stage.fmp.ratio, fmp_stage_seed(seed, i));
        }
        entry.gather.rules = stack_rules(
            cur, out_sets, out_offsets, [&](std::int64_t b) { return fmp_active_sites(*cur.sets[b], regions[b]); },
            [&](std::int64_t b, const SiteIndex& out, std::int32_t base) {
              return fmp_rulebook(*cur.sets[b], out, regions[b], base);
            });
      }
      const std::int64_t a_out = entry.gather.rules.rows;
      next.n = cur.n;
      next.rows.resize(static_cast<std::size_t>(a_out * cur.n));
      entry.argmax.resize(next.rows.size());
      detail::pool_rows<T>(entry.gather.rules, cur.rows, cur.n, cur.ground, next.rows.data(), entry.argmax.data());
      next.ground = frozen ? (*frozen)[i + 1] : cur.ground;
    }
    next.sets = std::move(out_sets);
    next.offsets = std::move(out_offsets);
    if (tape) {
      entry.output = next.rows;
      tape->entries.push_back(std::move(entry));
    }
    cur = std::move(next);
  }

  const ConvLayer<T>& head = net.head();
  if (cur.sets.front()->shape().m != 1) throw InternalError("network does not reduce the field to one site");
  const std::size_t batch = samples.size();
  const int n = cur.n;
  std::vector<T> x(batch * static_cast<std::size_t>(n));
  std::vector<std::int32_t> head_rows(batch, -1);
  for (std::size_t b = 0; b < batch; ++b) {
    const std::int32_t idx = cur.sets[b]->find(Site{0, 0, 0});
    const T* src = cur.ground.data();
    if (idx >= 0) {
      head_rows[b] = static_cast<std::int32_t>(cur.offsets[b] + idx);
      src = cur.rows.data() + static_cast<std::int64_t>(head_rows[b]) * n;
    }
    std::copy(src, src + n, x.data() + b * n);
  }
  result.logits.resize(batch * static_cast<std::size_t>(head.n_out));
  kernels::gemm(static_cast<std::int64_t>(batch), head.n_out, n, x.data(), n, head.weights.values.data(), head.n_out,
                head.bias.values.data(), result.logits.data(), head.n_out);
  result.macs += static_cast<std::int64_t>(batch) * n * head.n_out;
  if (tape) {
    tape->head_input = std::move(x);
    tape->head_rows = std::move(head_rows);
    tape->final_rows = cur.total_rows();
  }
  return result;
}

template <typename T>
void backward_batch(Network<T>& net, Tape<T>& tape, std::span<const T> d_logits) {
  ConvLayer<T>& head = net.head();
  const auto batch = static_cast<std::int64_t>(tape.batch);
  const std::int64_t n = head.n_in;
  const std::int64_t classes = head.n_out;
  if (static_cast<std::int64_t>(d_logits.size()) != batch * classes) throw InvalidArgument("logit gradient has wrong size");

  {
    std::vector<T> db(static_cast<std::size_t>(classes), T(0));
    kernels::column_sums(batch, classes, d_logits.data(), classes, db.data());
    accumulate(head.bias.grad, db);
    const std::vector<T> xt = transpose(tape.head_input.data(), batch, n);
    std::vector<T> dw(static_cast<std::size_t>(n * classes));
    gemm_rows(n, classes, batch, xt.data(), d_logits.data(), dw.data());
    accumulate(head.weights.grad, dw);
  }
  std::vector<T> d_rows(static_cast<std::size_t>(tape.final_rows * n), T(0));
  {
    const std::vector<T> wt = transpose(head.weights.values.data(), n, classes);
    std::vector<T> dx(static_cast<std::size_t>(batch * n));
    gemm_rows(batch, n, classes, d_logits.data(), wt.data(), dx.data());
    for (std::int64_t b = 0; b < batch; ++b) {
      const std::int32_t row = tape.head_rows[static_cast<std::size_t>(b)];
      if (row < 0) continue;
      for (std::int64_t j = 0; j < n; ++j) d_rows[static_cast<std::size_t>(row * n + j)] += dx[b * n + j];
    }
  }

  auto& stages = net.stages();
  for (std::size_t i = stages.size(); i-- > 0;) {
    TapeEntry<T>& entry = tape.entries[i];
    Stage<T>& stage = stages[i];
    if (stage.kind == Stage<T>::Kind::conv) {
      for (std::size_t k = 0; k < d_rows.size(); ++k) {
        if (!(entry.output[k] > T(0))) d_rows[k] = T(0);
      }
      ConvGrads<T> g = conv_backward<T>(d_rows, entry.gather, stage.conv, entry.in_rows, i > 0);
      accumulate(stage.conv.weights.grad, g.d_weights);
      accumulate(stage.conv.bias.grad, g.d_bias);
      d_rows = std::move(g.d_input);
    } else {
      d_rows = pool_backward<T>(d_rows, entry.gather.rules, entry.argmax, entry.n_in, entry.in_rows);
    }
  }
}

GradCheckResult finite_diff_check(Network<double>& net, const SparseGrid<double>& sample, int label, double eps,
                                  std::uint64_t fmp_seed) {
  const auto frozen = net.ground_states();
  BatchForwardOptions<double> options;
  options.frozen_grounds = &frozen;
  options.fmp_seeds = {fmp_seed};
  const SparseGrid<double>* batch[] = {&sample};
  const std::span<const SparseGrid<double>* const> samples(batch);

  auto params = net.parameters();
  for (auto* p : params) std::fill(p->grad.begin(), p->grad.end(), 0.0);
  Tape<double> tape;
  const auto fwd = forward_batch(net, samples, options, &tape);
  const auto loss = softmax_nll<double>(fwd.logits, label);
  backward_batch(net, tape, std::span<const double>(loss.d_logits));

  auto loss_at = [&]() {
    const auto r = forward_batch(net, samples, options);
    return softmax_nll<double>(r.logits, label).loss;
  };
  GradCheckResult result;
  for (auto* p : params) {
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double saved = p->values[i];
      p->values[i] = saved + eps;
      const double up = loss_at();
      p->values[i] = saved - eps;
      const double down = loss_at();
      p->values[i] = saved;
      const double numeric = (up - down) / (2 * eps);
      const double analytic = p->grad[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      result.max_relative_error = std::max(result.max_relative_error, std::abs(analytic - numeric) / denom);
      ++result.parameters_checked;
    }
    std::fill(p->grad.begin(), p->grad.end(), 0.0);
  }
  return result;
}

#define SPARSECNN_INSTANTIATE_AUTOGRAD(T)                                                                          \
  template ConvGrads<T> conv_backward(std::span<const T>, const GatherPlan<T>&, const ConvLayer<T>&, std::int64_t, \
                                      bool);                                                                       \
  template std::vector<T> pool_backward(std::span<const T>, const Rulebook&, std::span<const std::int32_t>, int,    \
                                        std::int64_t);                                                             \
  template std::vector<T> softmax(std::span<const T>);                                                             \
  template LossResult<T> softmax_nll(std::span<const T>, int);                                                     \
  template LossResult<T> batch_loss(std::span<const T>, std::span<const int>, int);                                \
  template void sgd_step(std::span<ParamState<T>* const>, double, double, double);                                 \
  template BatchGrid<T> make_batch(std::span<const SparseGrid<T>* const>);                                         \
  template BatchForwardResult<T> forward_batch(const Network<T>&, std::span<const SparseGrid<T>* const>,           \
                                               const BatchForwardOptions<T>&, Tape<T>*);                           \
  template void backward_batch(Network<T>&, Tape<T>&, std::span<const T>);

SPARSECNN_INSTANTIATE_AUTOGRAD(float)
SPARSECNN_INSTANTIATE_AUTOGRAD(double)

}  // namespace sparsecnn
