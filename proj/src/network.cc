// src/network.cc

// Copyright 2026  mlctc authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "mlctc/network.h"

#include <algorithm>
#include <string>

#include "mlctc/errors.h"

namespace mlctc {

namespace {

std::string LayerName(std::size_t k) { return "layer" + std::to_string(k); }

void CheckShape(const Matrix& m, std::size_t rows, std::size_t cols,
                const std::string& what) {
  if (m.rows() != rows || m.cols() != cols)
    throw ShapeError(what + " is " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + ", expected " + std::to_string(rows) +
                     "x" + std::to_string(cols));
}

void CheckCell(const LstmCellParams& p, std::size_t in, std::size_t h,
               const std::string& name) {
  CheckShape(p.W, 4 * h, in, name + ".W");
  CheckShape(p.R, 4 * h, h, name + ".R");
  CheckShape(p.b, 4 * h, 1, name + ".b");
}

void InitCell(LstmCellParams& p, Rng& rng) {
  InitUniform(p.W, rng);
  InitUniform(p.R, rng);
  const std::size_t h = p.hidden_size();
  p.b.Fill(0.0);
  for (std::size_t j = h; j < 2 * h; ++j) p.b(j, 0) = 1.0;
}

// Gradient of one direction; accumulates into grads and d_input.
void DirectionBackward(const DirectionCache& dc, const Matrix& input,
                       const LstmCellParams& params, const Matrix& d_hidden,
                       std::size_t col_offset, LstmCellParams& grads,
                       Matrix& d_input) {
  const std::size_t T = input.rows();
  const std::size_t F = input.cols();
  const std::size_t H = params.hidden_size();
  std::vector<double> dh_next(H, 0.0), dc_next(H, 0.0), da(4 * H);
  for (std::size_t step = T; step-- > 0;) {
    const std::size_t t = dc.reverse ? T - 1 - step : step;
    const bool has_prev = step > 0;
    const std::size_t tp = dc.reverse ? t + 1 : t - 1;
    for (std::size_t j = 0; j < H; ++j) {
      const double i = dc.input_gate(t, j);
      const double f = dc.forget_gate(t, j);
      const double o = dc.output_gate(t, j);
      const double g = dc.candidate(t, j);
      const double tc = dc.tanh_cell(t, j);
      const double c_prev = has_prev ? dc.cell(tp, j) : 0.0;
      const double m = dc.recurrent_mask.empty() ? 1.0 : dc.recurrent_mask[j];

      const double dh = d_hidden(t, col_offset + j) + dh_next[j];
      const double d_o = dh * tc;
      const double d_c = dc_next[j] + dh * o * (1.0 - tc * tc);
      const double d_i = d_c * m * g;
      const double d_g = d_c * m * i;
      const double d_f = d_c * c_prev;
      dc_next[j] = d_c * f;

      da[j] = d_i * i * (1.0 - i);
      da[H + j] = d_f * f * (1.0 - f);
      da[2 * H + j] = d_o * o * (1.0 - o);
      da[3 * H + j] = d_g * (1.0 - g * g);
    }
    auto x = input.row(t);
    auto dx = d_input.row(t);
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    for (std::size_t r = 0; r < 4 * H; ++r) {
      const double a = da[r];
      grads.b(r, 0) += a;
      auto w = params.W.row(r);
      auto gw = grads.W.row(r);
      for (std::size_t k = 0; k < F; ++k) {
        gw[k] += a * x[k];
        dx[k] += a * w[k];
      }
      auto rr = params.R.row(r);
      auto gr = grads.R.row(r);
      if (has_prev) {
        for (std::size_t k = 0; k < H; ++k) gr[k] += a * dc.hidden(tp, k);
      }
      for (std::size_t k = 0; k < H; ++k) dh_next[k] += a * rr[k];
    }
  }
}

}  // namespace

LstmCellParams LstmCellParams::Zeros(std::size_t input_size, std::size_t hidden_size) {
  return {Matrix(4 * hidden_size, input_size), Matrix(4 * hidden_size, hidden_size),
          Matrix(4 * hidden_size, 1)};
}

void Parameters::ForEachTensor(
    const std::function<void(const std::string&, Matrix&)>& fn) {
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const std::string base = LayerName(k);
    fn(base + ".fwd.W", layers[k].fwd.W);
    fn(base + ".fwd.R", layers[k].fwd.R);
    fn(base + ".fwd.b", layers[k].fwd.b);
    fn(base + ".bwd.W", layers[k].bwd.W);
    fn(base + ".bwd.R", layers[k].bwd.R);
    fn(base + ".bwd.b", layers[k].bwd.b);
  }
  for (auto& [lang, vectors] : lhuc)
    for (std::size_t k = 0; k < vectors.size(); ++k)
      fn("lhuc." + lang + "." + LayerName(k), vectors[k]);
  fn("output.W", output.W);
  fn("output.b", output.b);
}

void Parameters::ForEachTensor(
    const std::function<void(const std::string&, const Matrix&)>& fn) const {
  const_cast<Parameters*>(this)->ForEachTensor(
      [&fn](const std::string& name, Matrix& m) { fn(name, m); });
}

std::vector<std::string> Parameters::TensorNames() const {
  std::vector<std::string> names;
  ForEachTensor([&names](const std::string& n, const Matrix&) { names.push_back(n); });
  return names;
}

Parameters Parameters::ZerosLike() const {
  Parameters z = *this;
  z.ForEachTensor([](const std::string&, Matrix& m) { m.Fill(0.0); });
  return z;
}

void Parameters::Accumulate(const Parameters& other, double scale) {
  std::vector<const Matrix*> src;
  other.ForEachTensor([&src](const std::string&, const Matrix& m) { src.push_back(&m); });
  std::size_t i = 0;
  ForEachTensor([&](const std::string& name, Matrix& m) {
    if (i >= src.size()) throw ShapeError("parameter layouts differ at " + name);
    AddScaledInPlace(m, *src[i++], scale);
  });
  if (i != src.size()) throw ShapeError("parameter layouts differ in tensor count");
}

void Parameters::Scale(double factor) {
  ForEachTensor([factor](const std::string&, Matrix& m) {
    for (double& v : m.values()) v *= factor;
  });
}

void Model::Validate() const {
  const std::size_t H = config.hidden_size;
  if (params.layers.size() != config.num_layers)
    throw ShapeError("model has " + std::to_string(params.layers.size()) +
                     " layers, config says " + std::to_string(config.num_layers));
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    const std::size_t in = k == 0 ? config.feature_dim : 2 * H;
    CheckCell(params.layers[k].fwd, in, H, LayerName(k) + ".fwd");
    CheckCell(params.layers[k].bwd, in, H, LayerName(k) + ".bwd");
  }
  for (const auto& [lang, vectors] : params.lhuc) {
    if (vectors.size() != config.num_layers)
      throw ShapeError("lhuc." + lang + " has the wrong layer count");
    for (std::size_t k = 0; k < vectors.size(); ++k)
      CheckShape(vectors[k], 2 * H, 1, "lhuc." + lang + "." + LayerName(k));
  }
  CheckShape(params.output.W, phones.size(), 2 * H, "output.W");
  CheckShape(params.output.b, phones.size(), 1, "output.b");
  if (phoneset_version != phones.version())
    throw StaleModelError("model phone-set version " + std::to_string(phoneset_version) +
                          " does not match bound set version " +
                          std::to_string(phones.version()));
}

void InitUniform(Matrix& m, Rng& rng) {
  for (double& v : m.values()) v = rng.Uniform(-0.1, 0.1);
}

Model CreateModel(const ModelConfig& config, const UniversalPhoneSet& phones,
                  const std::vector<std::string>& lhuc_languages, std::uint64_t seed) {
  if (config.num_layers == 0 || config.hidden_size == 0 || config.feature_dim == 0)
    throw DomainError("model dimensions must be positive");
  if (phones.size() < 2) throw DomainError("phone set needs blank plus one phone");
  Model model;
  model.config = config;
  model.phones = phones;
  model.phoneset_version = phones.version();
  model.init_seed = seed;
  Rng rng(seed);
  const std::size_t H = config.hidden_size;
  for (std::size_t k = 0; k < config.num_layers; ++k) {
    const std::size_t in = k == 0 ? config.feature_dim : 2 * H;
    BlstmLayerParams layer{LstmCellParams::Zeros(in, H), LstmCellParams::Zeros(in, H)};
    InitCell(layer.fwd, rng);
    InitCell(layer.bwd, rng);
    model.params.layers.push_back(std::move(layer));
  }
  model.params.output.W = Matrix(phones.size(), 2 * H);
  model.params.output.b = Matrix(phones.size(), 1);
  InitUniform(model.params.output.W, rng);
  if (config.lhuc)
    for (const auto& lang : lhuc_languages) RegisterLhucLanguage(model, lang);
  return model;
}

void RegisterLhucLanguage(Model& model, const std::string& language_id) {
  if (model.params.lhuc.count(language_id)) return;
  std::vector<Matrix> vectors(model.config.num_layers,
                              Matrix(2 * model.config.hidden_size, 1));
  model.params.lhuc.emplace(language_id, std::move(vectors));
}

double LhucAmplitude(double r) { return 2.0 * Sigmoid(r); }

double LhucAmplitudeDerivative(double r) {
  const double s = Sigmoid(r);
  return 2.0 * s * (1.0 - s);
}

Matrix ApplyLhuc(const Matrix& hidden, const Matrix& r) {
  if (r.rows() != hidden.cols() || r.cols() != 1)
    throw ShapeError("LHUC vector of length " + std::to_string(r.rows()) +
                     " for hidden width " + std::to_string(hidden.cols()));
  Matrix out = hidden;
  for (std::size_t j = 0; j < hidden.cols(); ++j) {
    const double a = LhucAmplitude(r(j, 0));
    for (std::size_t t = 0; t < hidden.rows(); ++t) out(t, j) *= a;
  }
  return out;
}

const char* DropoutModeName(DropoutMode mode) {
  switch (mode) {
    case DropoutMode::kNone: return "none";
    case DropoutMode::kForward: return "forward";
    case DropoutMode::kRecurrent: return "recurrent";
  }
  return "?";
}

DropoutMode DrawDropoutMode(Rng& rng) {
  return rng.Uniform() < 0.5 ? DropoutMode::kForward : DropoutMode::kRecurrent;
}

DropoutPlan SampleDropoutPlan(DropoutMode mode, double rate, const ModelConfig& config,
                              Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw DomainError("dropout rate " + std::to_string(rate) + " outside [0, 1)");
  DropoutPlan plan{mode, rate, {}};
  if (mode == DropoutMode::kNone) return plan;
  for (std::size_t k = 0; k < config.num_layers; ++k)
    plan.masks.push_back(rng.BernoulliMask(2 * config.hidden_size, 1.0 - rate));
  return plan;
}

std::vector<DropoutPlan> SampleMinibatchDropout(double rate, const ModelConfig& config,
                                                std::size_t batch_size, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw DomainError("dropout rate " + std::to_string(rate) + " outside [0, 1)");
  const DropoutMode mode = DrawDropoutMode(rng);
  std::vector<DropoutPlan> plans;
  plans.reserve(batch_size);
  for (std::size_t n = 0; n < batch_size; ++n)
    plans.push_back(SampleDropoutPlan(mode, rate, config, rng));
  return plans;
}

LstmState LstmCellStep(std::span<const double> x, const LstmState& prev,
                       const LstmCellParams& params,
                       std::span<const double> recurrent_mask, LstmStepCache* cache) {
  const std::size_t H = params.hidden_size();
  const std::size_t F = params.input_size();
  if (x.size() != F || prev.h.size() != H || prev.c.size() != H ||
      params.W.rows() != 4 * H || params.b.rows() != 4 * H)
    throw ShapeError("LSTM step: input " + std::to_string(x.size()) + " / state " +
                     std::to_string(prev.h.size()) + " do not match cell " +
                     std::to_string(F) + " -> " + std::to_string(H));
  if (!recurrent_mask.empty() && recurrent_mask.size() != H)
    throw ShapeError("recurrent mask length " + std::to_string(recurrent_mask.size()) +
                     " for " + std::to_string(H) + " cells");

  std::vector<double> a(4 * H);
  for (std::size_t r = 0; r < 4 * H; ++r) {
    double acc = params.b(r, 0);
    auto w = params.W.row(r);
    for (std::size_t k = 0; k < F; ++k) acc += w[k] * x[k];
    auto rr = params.R.row(r);
    for (std::size_t k = 0; k < H; ++k) acc += rr[k] * prev.h[k];
    a[r] = acc;
  }
  LstmState next = LstmState::Zeros(H);
  if (cache) {
    cache->input_gate.resize(H);
    cache->forget_gate.resize(H);
    cache->output_gate.resize(H);
    cache->candidate.resize(H);
    cache->tanh_c.resize(H);
  }
  for (std::size_t j = 0; j < H; ++j) {
    const double i = Sigmoid(a[j]);
    const double f = Sigmoid(a[H + j]);
    const double o = Sigmoid(a[2 * H + j]);
    const double g = Tanh(a[3 * H + j]);
    const double write = recurrent_mask.empty() ? i * g : recurrent_mask[j] * i * g;
    next.c[j] = f * prev.c[j] + write;
    const double tc = Tanh(next.c[j]);
    next.h[j] = o * tc;
    if (cache) {
      cache->input_gate[j] = i;
      cache->forget_gate[j] = f;
      cache->output_gate[j] = o;
      cache->candidate[j] = g;
      cache->tanh_c[j] = tc;
    }
  }
  return next;
}

DirectionCache RunDirection(const Matrix& input, const LstmCellParams& params,
                            bool reverse, std::span<const double> recurrent_mask) {
  const std::size_t T = input.rows();
  const std::size_t H = params.hidden_size();
  DirectionCache dc;
  dc.reverse = reverse;
  dc.recurrent_mask.assign(recurrent_mask.begin(), recurrent_mask.end());
  for (Matrix* m : {&dc.input_gate, &dc.forget_gate, &dc.output_gate, &dc.candidate,
                    &dc.cell, &dc.tanh_cell, &dc.hidden})
    *m = Matrix(T, H);
  LstmState state = LstmState::Zeros(H);
  LstmStepCache step_cache;
  for (std::size_t step = 0; step < T; ++step) {
    const std::size_t t = reverse ? T - 1 - step : step;
    state = LstmCellStep(input.row(t), state, params, recurrent_mask, &step_cache);
    std::copy(step_cache.input_gate.begin(), step_cache.input_gate.end(),
              dc.input_gate.row(t).begin());
    std::copy(step_cache.forget_gate.begin(), step_cache.forget_gate.end(),
              dc.forget_gate.row(t).begin());
    std::copy(step_cache.output_gate.begin(), step_cache.output_gate.end(),
              dc.output_gate.row(t).begin());
    std::copy(step_cache.candidate.begin(), step_cache.candidate.end(),
              dc.candidate.row(t).begin());
    std::copy(step_cache.tanh_c.begin(), step_cache.tanh_c.end(),
              dc.tanh_cell.row(t).begin());
    std::copy(state.c.begin(), state.c.end(), dc.cell.row(t).begin());
    std::copy(state.h.begin(), state.h.end(), dc.hidden.row(t).begin());
  }
  return dc;
}

ForwardResult NetworkForward(const Matrix& features, const Model& model,
                             std::string_view language_id, const DropoutPlan* plan) {
  const ModelConfig& cfg = model.config;
  const std::size_t T = features.rows();
  const std::size_t H = cfg.hidden_size;
  if (T == 0) throw DomainError("empty utterance");
  if (features.cols() != cfg.feature_dim)
    throw ShapeError("features have " + std::to_string(features.cols()) +
                     " dims, model expects " + std::to_string(cfg.feature_dim));
  const std::vector<Matrix>* lhuc = nullptr;
  if (cfg.lhuc) {
    auto it = model.params.lhuc.find(language_id);
    if (it == model.params.lhuc.end())
      throw LookupError("no LHUC vectors for language '" + std::string(language_id) + "'");
    lhuc = &it->second;
  }
  const DropoutMode mode = plan ? plan->mode : DropoutMode::kNone;
  if (mode != DropoutMode::kNone) {
    if (plan->masks.size() != cfg.num_layers)
      throw ShapeError("dropout plan has " + std::to_string(plan->masks.size()) +
                       " masks for " + std::to_string(cfg.num_layers) + " layers");
    for (const auto& m : plan->masks)
      if (m.size() != 2 * H) throw ShapeError("dropout mask width mismatch");
  }

  ForwardResult result;
  ForwardCache& cache = result.cache;
  cache.language_id = std::string(language_id);
  cache.used_lhuc = lhuc != nullptr;
  cache.layers.resize(cfg.num_layers);
  Matrix current = features;
  for (std::size_t k = 0; k < cfg.num_layers; ++k) {
    LayerCache& lc = cache.layers[k];
    const BlstmLayerParams& layer = model.params.layers[k];
    std::span<const double> fwd_mask, bwd_mask;
    if (mode == DropoutMode::kRecurrent) {
      fwd_mask = std::span<const double>(plan->masks[k]).subspan(0, H);
      bwd_mask = std::span<const double>(plan->masks[k]).subspan(H, H);
    }
    lc.input = std::move(current);
    lc.fwd = RunDirection(lc.input, layer.fwd, false, fwd_mask);
    lc.bwd = RunDirection(lc.input, layer.bwd, true, bwd_mask);
    lc.concat = Matrix(T, 2 * H);
    for (std::size_t t = 0; t < T; ++t) {
      auto dst = lc.concat.row(t);
      auto hf = lc.fwd.hidden.row(t);
      auto hb = lc.bwd.hidden.row(t);
      std::copy(hf.begin(), hf.end(), dst.begin());
      std::copy(hb.begin(), hb.end(), dst.begin() + static_cast<std::ptrdiff_t>(H));
    }
    lc.post_lhuc = lhuc ? ApplyLhuc(lc.concat, (*lhuc)[k]) : lc.concat;
    if (lhuc) {
      lc.amplitude.resize(2 * H);
      for (std::size_t j = 0; j < 2 * H; ++j)
        lc.amplitude[j] = LhucAmplitude((*lhuc)[k](j, 0));
    }
    current = lc.post_lhuc;
    if (mode == DropoutMode::kForward) {
      const double inv_keep = 1.0 / (1.0 - plan->rate);
      lc.ff_scale.resize(2 * H);
      for (std::size_t j = 0; j < 2 * H; ++j) lc.ff_scale[j] = plan->masks[k][j] * inv_keep;
      for (std::size_t t = 0; t < T; ++t) {
        auto row = current.row(t);
        for (std::size_t j = 0; j < 2 * H; ++j) row[j] *= lc.ff_scale[j];
      }
    }
  }
  cache.top = std::move(current);

  const Matrix& W = model.params.output.W;
  const std::size_t V = W.rows();
  result.logits = Matrix(T, V);
  for (std::size_t t = 0; t < T; ++t) {
    auto y = cache.top.row(t);
    for (std::size_t v = 0; v < V; ++v) {
      double acc = model.params.output.b(v, 0);
      auto w = W.row(v);
      for (std::size_t j = 0; j < 2 * H; ++j) acc += w[j] * y[j];
      result.logits(t, v) = acc;
    }
  }
  result.log_probs = LogSoftmaxRows(result.logits);
  return result;
}

void NetworkBackward(const Model& model, const ForwardCache& cache,
                     const Matrix& grad_logits, Parameters& grads) {
  const std::size_t H = model.config.hidden_size;
  const std::size_t T = cache.top.rows();
  const Matrix& W = model.params.output.W;
  const std::size_t V = W.rows();
  if (grad_logits.rows() != T || grad_logits.cols() != V)
    throw ShapeError("logit gradient is " + std::to_string(grad_logits.rows()) + "x" +
                     std::to_string(grad_logits.cols()) + ", forward produced " +
                     std::to_string(T) + "x" + std::to_string(V));
  if (cache.layers.size() != model.config.num_layers)
    throw ShapeError("forward cache does not match the model");
  if (grads.layers.size() != model.config.num_layers || !grads.output.W.SameShape(W))
    throw ShapeError("gradient buffer does not match the model");

  Matrix d_out(T, 2 * H);
  for (std::size_t t = 0; t < T; ++t) {
    auto g = grad_logits.row(t);
    auto y = cache.top.row(t);
    auto dy = d_out.row(t);
    for (std::size_t v = 0; v < V; ++v) {
      const double gv = g[v];
      grads.output.b(v, 0) += gv;
      auto w = W.row(v);
      auto gw = grads.output.W.row(v);
      for (std::size_t j = 0; j < 2 * H; ++j) {
        gw[j] += gv * y[j];
        dy[j] += gv * w[j];
      }
    }
  }

  std::vector<Matrix>* lhuc_grads = nullptr;
  const std::vector<Matrix>* lhuc_params = nullptr;
  if (cache.used_lhuc) {
    auto it = grads.lhuc.find(cache.language_id);
    if (it == grads.lhuc.end())
      throw ShapeError("gradient buffer lacks LHUC vectors for '" + cache.language_id + "'");
    lhuc_grads = &it->second;
    lhuc_params = &model.params.lhuc.find(cache.language_id)->second;
  }

  for (std::size_t k = cache.layers.size(); k-- > 0;) {
    const LayerCache& lc = cache.layers[k];
    if (!lc.ff_scale.empty())
      for (std::size_t t = 0; t < T; ++t) {
        auto row = d_out.row(t);
        for (std::size_t j = 0; j < 2 * H; ++j) row[j] *= lc.ff_scale[j];
      }
    if (!lc.amplitude.empty()) {
      Matrix& dr = (*lhuc_grads)[k];
      const Matrix& r = (*lhuc_params)[k];
      for (std::size_t j = 0; j < 2 * H; ++j) {
        double acc = 0.0;
        for (std::size_t t = 0; t < T; ++t) acc += d_out(t, j) * lc.concat(t, j);
        dr(j, 0) += acc * LhucAmplitudeDerivative(r(j, 0));
        for (std::size_t t = 0; t < T; ++t) d_out(t, j) *= lc.amplitude[j];
      }
    }
    Matrix d_input(T, lc.input.cols());
    const BlstmLayerParams& layer = model.params.layers[k];
    DirectionBackward(lc.fwd, lc.input, layer.fwd, d_out, 0, grads.layers[k].fwd, d_input);
    DirectionBackward(lc.bwd, lc.input, layer.bwd, d_out, H, grads.layers[k].bwd, d_input);
    d_out = std::move(d_input);
  }
}

Parameters NetworkBackward(const Model& model, const ForwardCache& cache,
                           const Matrix& grad_logits) {
  Parameters grads = model.params.ZerosLike();
  NetworkBackward(model, cache, grad_logits, grads);
  return grads;
}

}  // namespace mlctc
