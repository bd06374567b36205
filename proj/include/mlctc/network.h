// include/mlctc/network.h

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

#ifndef MLCTC_NETWORK_H_
#define MLCTC_NETWORK_H_

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlctc/numerics.h"
#include "mlctc/phoneset.h"

namespace mlctc {

struct ModelConfig {
  std::size_t num_layers = 4;
  std::size_t hidden_size = 320;  // cells per layer and direction
  std::size_t feature_dim = 8;
  /// When set, every forward call routes through the language's LHUC vectors.
  bool lhuc = false;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Gate blocks are stacked in the order input, forget, output, candidate;
/// each block is H rows.
struct LstmCellParams {
  Matrix W;  // 4H x F
  Matrix R;  // 4H x H
  Matrix b;  // 4H x 1

  std::size_t hidden_size() const { return R.cols(); }
  std::size_t input_size() const { return W.cols(); }
  static LstmCellParams Zeros(std::size_t input_size, std::size_t hidden_size);

  friend bool operator==(const LstmCellParams&, const LstmCellParams&) = default;
};

struct BlstmLayerParams {
  LstmCellParams fwd;
  LstmCellParams bwd;

  friend bool operator==(const BlstmLayerParams&, const BlstmLayerParams&) = default;
};

struct OutputLayerParams {
  Matrix W;  // V x 2H
  Matrix b;  // V x 1

  friend bool operator==(const OutputLayerParams&, const OutputLayerParams&) = default;
};

/// Per-language LHUC parameters: one 2H x 1 vector r per layer. The applied
/// amplitude is 2 * sigmoid(r), always in (0, 2).
using LhucTable = std::map<std::string, std::vector<Matrix>, std::less<>>;

/// Every trainable tensor of a model. Gradients and optimizer velocity use
/// the same layout.
struct Parameters {
  std::vector<BlstmLayerParams> layers;
  LhucTable lhuc;
  OutputLayerParams output;

  /// Visits tensors in a fixed order with their checkpoint names
  /// (layer<k>.<fwd|bwd>.<W|R|b>, lhuc.<lang>.layer<k>, output.<W|b>).
  void ForEachTensor(const std::function<void(const std::string&, Matrix&)>& fn);
  void ForEachTensor(
      const std::function<void(const std::string&, const Matrix&)>& fn) const;
  std::vector<std::string> TensorNames() const;
  Parameters ZerosLike() const;
  void Accumulate(const Parameters& other, double scale = 1.0);
  void Scale(double factor);

  friend bool operator==(const Parameters&, const Parameters&) = default;
};

struct Model {
  ModelConfig config;
  Parameters params;
  UniversalPhoneSet phones;
  std::uint64_t phoneset_version = 0;
  std::uint64_t init_seed = 0;

  std::size_t num_outputs() const { return params.output.W.rows(); }
  /// Throws ShapeError/StaleModelError when tensors disagree with the config
  /// or the bound phone set.
  void Validate() const;

  friend bool operator==(const Model&, const Model&) = default;
};

/// Uniform [-0.1, 0.1] weights, zero biases except forget gates at +1.0.
/// LHUC vectors (r = 0) are created for lhuc_languages when config.lhuc is set.
Model CreateModel(const ModelConfig& config, const UniversalPhoneSet& phones,
                  const std::vector<std::string>& lhuc_languages, std::uint64_t seed);

/// Fresh r = 0 vectors for a language; no-op if already present.
void RegisterLhucLanguage(Model& model, const std::string& language_id);

/// Initialization draws shared by CreateModel and output-layer surgery.
void InitUniform(Matrix& m, Rng& rng);

double LhucAmplitude(double r);
double LhucAmplitudeDerivative(double r);

/// Scales column i of a T x 2H matrix by 2 * sigmoid(r_i).
Matrix ApplyLhuc(const Matrix& hidden, const Matrix& r);

// ---------------------------------------------------------------------------
// Dropout

enum class DropoutMode { kNone, kForward, kRecurrent };

const char* DropoutModeName(DropoutMode mode);

/// Masks for one utterance. masks[l] has 2H entries: the forward direction's
/// H cells then the backward direction's. The same mask applies at every
/// frame.
struct DropoutPlan {
  DropoutMode mode = DropoutMode::kNone;
  double rate = 0.0;
  std::vector<std::vector<double>> masks;
};

/// Fair coin between forward and recurrent dropout.
DropoutMode DrawDropoutMode(Rng& rng);

/// Per-utterance masks with keep probability 1 - rate. Throws DomainError
/// unless rate is in [0, 1).
DropoutPlan SampleDropoutPlan(DropoutMode mode, double rate, const ModelConfig& config,
                              Rng& rng);

/// One mode draw for the whole minibatch, then independent masks per
/// utterance.
std::vector<DropoutPlan> SampleMinibatchDropout(double rate, const ModelConfig& config,
                                                std::size_t batch_size, Rng& rng);

// ---------------------------------------------------------------------------
// LSTM cell

struct LstmState {
  std::vector<double> h;
  std::vector<double> c;

  static LstmState Zeros(std::size_t hidden_size) {
    return {std::vector<double>(hidden_size, 0.0), std::vector<double>(hidden_size, 0.0)};
  }
};

struct LstmStepCache {
  std::vector<double> input_gate, forget_gate, output_gate, candidate;
  std::vector<double> tanh_c;
};

/// One step:
///   c_t = f * c_{t-1} + m * i * tanh(W_c x + R_c h_{t-1} + b_c)
///   h_t = o * tanh(c_t)
/// with m = 1 when recurrent_mask is empty.
LstmState LstmCellStep(std::span<const double> x, const LstmState& prev,
                       const LstmCellParams& params,
                       std::span<const double> recurrent_mask = {},
                       LstmStepCache* cache = nullptr);

// ---------------------------------------------------------------------------
// Forward / backward

struct DirectionCache {
  // T x H activations stored in time order.
  Matrix input_gate, forget_gate, output_gate, candidate, cell, tanh_cell, hidden;
  std::vector<double> recurrent_mask;  // empty when unmasked
  bool reverse = false;
};

struct LayerCache {
  Matrix input;  // T x F_l
  DirectionCache fwd, bwd;
  Matrix concat;                  // T x 2H before LHUC
  Matrix post_lhuc;               // T x 2H after LHUC, before dropout
  std::vector<double> amplitude;  // empty when LHUC is off
  std::vector<double> ff_scale;   // empty unless feedforward dropout
};

struct ForwardCache {
  std::string language_id;
  bool used_lhuc = false;
  std::vector<LayerCache> layers;
  Matrix top;  // T x 2H input to the output layer
};

struct ForwardResult {
  Matrix logits;     // T x V
  Matrix log_probs;  // row-wise log-softmax of logits
  ForwardCache cache;
};

/// Runs one direction over a whole sequence. reverse = true processes frames
/// T-1 .. 0; outputs are stored in time order either way.
DirectionCache RunDirection(const Matrix& input, const LstmCellParams& params,
                            bool reverse, std::span<const double> recurrent_mask = {});

/// plan == nullptr is evaluation mode (no dropout, deterministic). Throws
/// DomainError for T = 0, LookupError for an unregistered LHUC language,
/// ShapeError for a feature-dimension mismatch.
ForwardResult NetworkForward(const Matrix& features, const Model& model,
                             std::string_view language_id,
                             const DropoutPlan* plan = nullptr);

/// Adds the gradients of the loss whose logit-gradient is grad_logits into
/// grads, which must be shaped like model.params.
void NetworkBackward(const Model& model, const ForwardCache& cache,
                     const Matrix& grad_logits, Parameters& grads);
Parameters NetworkBackward(const Model& model, const ForwardCache& cache,
                           const Matrix& grad_logits);

// ---------------------------------------------------------------------------
// Checkpoints

/// Versioned container: text header, embedded phone set, then named tensors
/// stored as little-endian doubles.
std::string SerializeCheckpoint(const Model& model);
/// Throws FormatError on malformed input and StaleModelError when the header's
/// phone-set version disagrees with the embedded set.
Model ParseCheckpoint(std::string_view bytes);

void SaveCheckpoint(const Model& model, const std::string& path);
Model LoadCheckpoint(const std::string& path);
/// Also rejects a model whose phone-set version differs from expected.
Model LoadCheckpoint(const std::string& path, const UniversalPhoneSet& expected);

}  // namespace mlctc

#endif  // MLCTC_NETWORK_H_
