// Copyright 2026 The SCST Lab Authors.
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

// Recurrent LSTM captioners.
//
// All three architectures share one LSTM cell whose cell candidate goes
// through a 2-unit maxout:
//
//   pre   = W_x x_t + W_h h_{t-1} + b          (rows: i | f | o | z z')
//   i,f,o = sigmoid(pre_i), sigmoid(pre_f), sigmoid(pre_o)
//   c_t   = i * maxout2(pre_z) + f * c_{t-1}
//   h_t   = o * tanh(c_t)
//   s_t   = W_s h_t
//
// FC feeds the projected image W_I g as x_1 and embedded words afterwards.
// The attention models start from w_0 = BOS and compute, every step,
//
//   a_t^i = w . tanh(W_aI I_i + W_ah h_{t-1} + b_a)
//   alpha = softmax(a_t + b_alpha),   I_t = sum_i alpha^i I_i
//
// Att2in adds W_zI I_t to the cell-candidate rows only. Att2all additionally
// adds W_gI I_t to the three gate rows and W_sI I_t to the logits.

#ifndef SCST_MODEL_H_
#define SCST_MODEL_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "scst/param_store.h"
#include "scst/random.h"
#include "scst/tensor.h"

namespace scst {

using TokenId = std::int32_t;
inline constexpr TokenId kBos = 0;
inline constexpr TokenId kEos = 1;
inline constexpr TokenId kUnk = 2;

enum class Arch : std::uint32_t { kFc = 1, kAtt2in = 2, kAtt2all = 3 };

const char* arch_name(Arch arch);
Arch parse_arch(const std::string& name);
inline bool is_attention(Arch arch) { return arch != Arch::kFc; }

struct ModelConfig {
  Arch arch = Arch::kFc;
  std::size_t vocab_size = 60;
  // Shared width of hidden state, word embedding, image embedding and
  // attention embedding.
  std::size_t hidden = 64;
  std::size_t feature_dim = 32;
  std::size_t num_locations = 9;
  std::size_t max_len = 12;

  void validate() const;
  std::vector<std::uint64_t> encode() const;
  static ModelConfig decode(std::uint32_t kind, const std::vector<std::uint64_t>& fields);
  bool operator==(const ModelConfig&) const = default;
};

// Image representation: a pooled global vector for FC models and one vector
// per spatial location for the attention models.
struct ImageFeatures {
  Tensor global;   // [F]
  Tensor spatial;  // [N, F]
};

// Per-image values computed once per decode: the features and, for the
// attention models, W_aI I_i for every location.
struct ImageContext {
  ImageFeatures features;
  Tensor projected;  // [N, hidden]; empty for FC
};

struct StepState {
  std::vector<double> h;
  std::vector<double> c;
  std::size_t t = 0;  // number of steps already taken
  std::shared_ptr<const ImageContext> context;
  std::vector<double> alpha;  // last attention weights (attention models)
};

// Everything one forward step computed that backward needs.
struct StepCache {
  TokenId input = kBos;  // fed token; ignored on the image step of FC
  bool image_input = false;
  std::vector<double> x;
  std::vector<double> h_prev, c_prev;
  std::vector<double> gates;  // i | f | o after sigmoid, 3H
  std::vector<double> z_pre;  // 2H
  std::vector<std::uint8_t> z_arg;
  std::vector<double> z;  // H
  std::vector<double> c, tanh_c, h;
  std::vector<double> att_tanh;  // N x H
  std::vector<double> alpha;     // N
  std::vector<double> attended;  // I_t, F
  std::vector<double> logits;
  std::vector<double> posterior;
};

struct StepResult {
  StepState state;
  std::vector<double> logits;
};

class Captioner {
 public:
  // Fresh model: weights uniform in [-0.08, 0.08], biases zero.
  Captioner(const ModelConfig& config, std::uint64_t init_seed);
  // Wraps an existing store; names and shapes must match `config`.
  Captioner(const ModelConfig& config, ParamStore store);

  const ModelConfig& config() const { return config_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }

  // h_0 = c_0 = 0. Validates feature shapes against the config.
  StepState initial_state(const ImageFeatures& features) const;

  // One decoder step. `prev` is the previously emitted word; it is ignored
  // on the first FC step, where the image is the input. Throws InputError
  // for out-of-vocabulary tokens and NumericError on non-finite logits.
  StepResult step(const StepState& state, TokenId prev, StepCache* cache = nullptr) const;

  // Reverse-mode pass through a recorded trajectory. `dlogits[t]` is dL/ds_t
  // for step t. Gradients are added into `grads` (additive across steps).
  void backward(const ImageContext& context, std::span<const StepCache> trace,
                std::span<const std::vector<double>> dlogits, GradSet& grads) const;

  void save(const std::string& path) const;
  static Captioner load(const std::string& path);
  std::string serialize() const;

 private:
  void register_parameters(std::uint64_t init_seed);
  void bind_indices();
  void attend(const ImageContext& ctx, std::span<const double> h_prev,
              std::vector<double>& att_tanh, std::vector<double>& alpha,
              std::vector<double>& attended) const;

  ModelConfig config_;
  ParamStore store_;

  struct Indices {
    std::size_t embed, wx, wh, b, ws;
    std::size_t wi = 0;                        // FC
    std::size_t wai = 0, wah = 0, ba = 0, w = 0, balpha = 0, wzi = 0;  // attention
    std::size_t wgi = 0, wsi = 0;              // Att2all
  } idx_{};
};

// Turns a posterior into the greedy token: argmax, ties to the lowest id.
TokenId argmax_token(std::span<const double> p);

}  // namespace scst

#endif  // SCST_MODEL_H_
