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

#include "scst/model.h"

#include <algorithm>
#include <cmath>

#include "scst/checkpoint.h"
#include "scst/error.h"
#include "scst/ops.h"

namespace scst {

namespace {

constexpr double kInitRange = 0.08;

Tensor uniform_tensor(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& x : t.data()) x = rng.uniform(-kInitRange, kInitRange);
  return t;
}

}  // namespace

const char* arch_name(Arch arch) {
  switch (arch) {
    case Arch::kFc: return "fc";
    case Arch::kAtt2in: return "att2in";
    case Arch::kAtt2all: return "att2all";
  }
  return "unknown";
}

Arch parse_arch(const std::string& name) {
  if (name == "fc") return Arch::kFc;
  if (name == "att2in") return Arch::kAtt2in;
  if (name == "att2all") return Arch::kAtt2all;
  throw ConfigError("unknown architecture: " + name);
}

void ModelConfig::validate() const {
  if (arch != Arch::kFc && arch != Arch::kAtt2in && arch != Arch::kAtt2all) {
    throw ConfigError("invalid architecture tag");
  }
  if (vocab_size < 3) throw ConfigError("vocabulary must hold BOS, EOS and UNK");
  if (hidden == 0) throw ConfigError("hidden width must be positive");
  if (feature_dim == 0) throw ConfigError("feature dimension must be positive");
  if (max_len == 0) throw ConfigError("max decode length must be positive");
  if (is_attention(arch) && num_locations == 0) {
    throw ConfigError("attention model needs at least one location");
  }
}

std::vector<std::uint64_t> ModelConfig::encode() const {
  return {vocab_size, hidden, feature_dim, num_locations, max_len};
}

ModelConfig ModelConfig::decode(std::uint32_t kind, const std::vector<std::uint64_t>& f) {
  if (f.size() != 5) throw IoError("checkpoint: model config has wrong length");
  ModelConfig c;
  c.arch = static_cast<Arch>(kind);
  c.vocab_size = f[0];
  c.hidden = f[1];
  c.feature_dim = f[2];
  c.num_locations = f[3];
  c.max_len = f[4];
  c.validate();
  return c;
}

TokenId argmax_token(std::span<const double> p) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] > p[best]) best = i;
  }
  return static_cast<TokenId>(best);
}

Captioner::Captioner(const ModelConfig& config, std::uint64_t init_seed) : config_(config) {
  config_.validate();
  register_parameters(init_seed);
  bind_indices();
}

Captioner::Captioner(const ModelConfig& config, ParamStore store)
    : config_(config), store_(std::move(store)) {
  config_.validate();
  // Build a reference layout and check names/shapes against it.
  Captioner reference(config_, 0);
  if (reference.store_.size() != store_.size()) {
    throw ConfigError("parameter count does not match architecture");
  }
  for (std::size_t i = 0; i < store_.size(); ++i) {
    const Parameter& want = reference.store_.param(i);
    const Parameter& got = store_.param(i);
    if (want.name != got.name || want.value.shape() != got.value.shape()) {
      throw ConfigError("parameter mismatch at " + got.name + " (expected " + want.name +
                        " " + shape_string(want.value.shape()) + ")");
    }
  }
  bind_indices();
}

void Captioner::register_parameters(std::uint64_t init_seed) {
  Rng rng(init_seed);
  const std::size_t v = config_.vocab_size, h = config_.hidden, f = config_.feature_dim;
  store_.add("embed", uniform_tensor({v, h}, rng));
  store_.add("lstm.wx", uniform_tensor({5 * h, h}, rng));
  store_.add("lstm.wh", uniform_tensor({5 * h, h}, rng));
  store_.add("lstm.b", Tensor({5 * h}));
  store_.add("out.ws", uniform_tensor({v, h}, rng));
  if (config_.arch == Arch::kFc) {
    store_.add("img.wi", uniform_tensor({h, f}, rng));
    return;
  }
  store_.add("att.wai", uniform_tensor({h, f}, rng));
  store_.add("att.wah", uniform_tensor({h, h}, rng));
  store_.add("att.ba", Tensor({h}));
  store_.add("att.w", uniform_tensor({h}, rng));
  store_.add("att.balpha", Tensor({config_.num_locations}));
  store_.add("lstm.wzi", uniform_tensor({2 * h, f}, rng));
  if (config_.arch == Arch::kAtt2all) {
    store_.add("lstm.wgi", uniform_tensor({3 * h, f}, rng));
    store_.add("out.wsi", uniform_tensor({v, f}, rng));
  }
}

void Captioner::bind_indices() {
  idx_.embed = store_.index("embed");
  idx_.wx = store_.index("lstm.wx");
  idx_.wh = store_.index("lstm.wh");
  idx_.b = store_.index("lstm.b");
  idx_.ws = store_.index("out.ws");
  if (config_.arch == Arch::kFc) {
    idx_.wi = store_.index("img.wi");
    return;
  }
  idx_.wai = store_.index("att.wai");
  idx_.wah = store_.index("att.wah");
  idx_.ba = store_.index("att.ba");
  idx_.w = store_.index("att.w");
  idx_.balpha = store_.index("att.balpha");
  idx_.wzi = store_.index("lstm.wzi");
  if (config_.arch == Arch::kAtt2all) {
    idx_.wgi = store_.index("lstm.wgi");
    idx_.wsi = store_.index("out.wsi");
  }
}

StepState Captioner::initial_state(const ImageFeatures& features) const {
  const std::size_t f = config_.feature_dim;
  auto ctx = std::make_shared<ImageContext>();
  ctx->features = features;
  if (config_.arch == Arch::kFc) {
    if (features.global.size() != f) {
      throw DimensionError("global feature has " + std::to_string(features.global.size()) +
                           " values, model expects " + std::to_string(f));
    }
    features.global.check_finite("global feature");
  } else {
    const Tensor& sp = features.spatial;
    if (sp.rank() != 2 || sp.dim(0) != config_.num_locations || sp.dim(1) != f) {
      throw DimensionError("spatial features must be [" +
                           std::to_string(config_.num_locations) + "x" + std::to_string(f) +
                           "], got " + shape_string(sp.shape()));
    }
    sp.check_finite("spatial feature");
    ctx->projected = Tensor({config_.num_locations, config_.hidden});
    const Tensor& wai = store_.value(idx_.wai);
    for (std::size_t i = 0; i < config_.num_locations; ++i) {
      gemv_acc(wai, sp.row(i), ctx->projected.row(i));
    }
  }
  StepState s;
  s.h.assign(config_.hidden, 0.0);
  s.c.assign(config_.hidden, 0.0);
  s.context = std::move(ctx);
  return s;
}

void Captioner::attend(const ImageContext& ctx, std::span<const double> h_prev,
                       std::vector<double>& att_tanh, std::vector<double>& alpha,
                       std::vector<double>& attended) const {
  const std::size_t n = config_.num_locations, h = config_.hidden, f = config_.feature_dim;
  std::vector<double> q(store_.value(idx_.ba).values());
  gemv_acc(store_.value(idx_.wah), h_prev, q);
  const auto w = store_.value(idx_.w).data();
  const auto balpha = store_.value(idx_.balpha).data();
  att_tanh.assign(n * h, 0.0);
  alpha.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = ctx.projected.row(i);
    double a = 0.0;
    for (std::size_t k = 0; k < h; ++k) {
      const double u = std::tanh(p[k] + q[k]);
      att_tanh[i * h + k] = u;
      a += w[k] * u;
    }
    alpha[i] = a + balpha[i];
  }
  softmax_inplace(alpha);
  attended.assign(f, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto feat = ctx.features.spatial.row(i);
    for (std::size_t k = 0; k < f; ++k) attended[k] += alpha[i] * feat[k];
  }
}

StepResult Captioner::step(const StepState& state, TokenId prev, StepCache* cache) const {
  const std::size_t h = config_.hidden, v = config_.vocab_size;
  if (!state.context) throw UsageError("step: state has no image context");
  const ImageContext& ctx = *state.context;
  const bool image_step = config_.arch == Arch::kFc && state.t == 0;

  StepCache local;
  StepCache& k = cache ? *cache : local;
  k.image_input = image_step;
  k.input = prev;
  k.x.assign(h, 0.0);
  if (image_step) {
    gemv_acc(store_.value(idx_.wi), ctx.features.global.data(), k.x);
  } else {
    if (prev < 0 || static_cast<std::size_t>(prev) >= v) {
      throw InputError("token id " + std::to_string(prev) + " outside vocabulary of size " +
                       std::to_string(v));
    }
    const auto row = store_.value(idx_.embed).row(static_cast<std::size_t>(prev));
    std::copy(row.begin(), row.end(), k.x.begin());
  }
  k.h_prev = state.h;
  k.c_prev = state.c;

  std::vector<double> pre(store_.value(idx_.b).values());
  gemv_acc(store_.value(idx_.wx), k.x, pre);
  gemv_acc(store_.value(idx_.wh), k.h_prev, pre);
  if (is_attention(config_.arch)) {
    attend(ctx, k.h_prev, k.att_tanh, k.alpha, k.attended);
    gemv_acc(store_.value(idx_.wzi), k.attended, std::span<double>(pre).subspan(3 * h, 2 * h));
    if (config_.arch == Arch::kAtt2all) {
      gemv_acc(store_.value(idx_.wgi), k.attended, std::span<double>(pre).subspan(0, 3 * h));
    }
  } else {
    k.att_tanh.clear();
    k.alpha.clear();
    k.attended.clear();
  }

  k.gates.assign(pre.begin(), pre.begin() + 3 * h);
  sigmoid_inplace(k.gates);
  k.z_pre.assign(pre.begin() + 3 * h, pre.end());
  k.z.assign(h, 0.0);
  k.z_arg.assign(h, 0);
  maxout2_forward(k.z_pre, k.z, k.z_arg);

  k.c.assign(h, 0.0);
  k.tanh_c.assign(h, 0.0);
  k.h.assign(h, 0.0);
  for (std::size_t j = 0; j < h; ++j) {
    const double in = k.gates[j], forget = k.gates[h + j], out = k.gates[2 * h + j];
    k.c[j] = in * k.z[j] + forget * k.c_prev[j];
    k.tanh_c[j] = std::tanh(k.c[j]);
    k.h[j] = out * k.tanh_c[j];
  }

  k.logits.assign(v, 0.0);
  gemv_acc(store_.value(idx_.ws), k.h, k.logits);
  if (config_.arch == Arch::kAtt2all) gemv_acc(store_.value(idx_.wsi), k.attended, k.logits);
  for (double s : k.logits) {
    if (!std::isfinite(s)) throw NumericError("non-finite logits at step " + std::to_string(state.t));
  }
  k.posterior = k.logits;
  softmax_inplace(k.posterior);

  StepResult r;
  r.state.h = k.h;
  r.state.c = k.c;
  r.state.t = state.t + 1;
  r.state.context = state.context;
  r.state.alpha = k.alpha;
  r.logits = k.logits;
  return r;
}

void Captioner::backward(const ImageContext& ctx, std::span<const StepCache> trace,
                         std::span<const std::vector<double>> dlogits, GradSet& g) const {
  if (dlogits.size() != trace.size()) {
    throw UsageError("backward: " + std::to_string(dlogits.size()) +
                     " logits gradients for a rollout of length " +
                     std::to_string(trace.size()));
  }
  if (g.size() != store_.size()) throw DimensionError("backward: gradient layout mismatch");
  const std::size_t h = config_.hidden, v = config_.vocab_size, n = config_.num_locations,
                    f = config_.feature_dim;
  const bool att = is_attention(config_.arch);
  const bool all = config_.arch == Arch::kAtt2all;

  std::vector<double> dh_next(h, 0.0), dc_next(h, 0.0);
  std::vector<double> dh(h), dc(h), dpre(5 * h), dx(h), dattended(f), dq(h), dalpha(n);
  Tensor dprojected;
  if (att) dprojected = Tensor({n, h});

  for (std::size_t step = trace.size(); step-- > 0;) {
    const StepCache& k = trace[step];
    const std::vector<double>& ds = dlogits[step];
    if (ds.size() != v) throw DimensionError("backward: logits gradient has wrong width");

    std::copy(dh_next.begin(), dh_next.end(), dh.begin());
    gemv_t_acc(store_.value(idx_.ws), ds, dh);
    outer_acc(g[idx_.ws], ds, k.h);
    if (att) std::fill(dattended.begin(), dattended.end(), 0.0);
    if (all) {
      outer_acc(g[idx_.wsi], ds, k.attended);
      gemv_t_acc(store_.value(idx_.wsi), ds, dattended);
    }

    for (std::size_t j = 0; j < h; ++j) {
      const double in = k.gates[j], forget = k.gates[h + j], out = k.gates[2 * h + j];
      const double d_out = dh[j] * k.tanh_c[j];
      dc[j] = dc_next[j] + dh[j] * out * (1.0 - k.tanh_c[j] * k.tanh_c[j]);
      const double d_in = dc[j] * k.z[j];
      const double d_forget = dc[j] * k.c_prev[j];
      dpre[j] = d_in * in * (1.0 - in);
      dpre[h + j] = d_forget * forget * (1.0 - forget);
      dpre[2 * h + j] = d_out * out * (1.0 - out);
      dc_next[j] = dc[j] * forget;
    }
    std::fill(dpre.begin() + 3 * h, dpre.end(), 0.0);
    {
      std::vector<double> dz(h);
      for (std::size_t j = 0; j < h; ++j) dz[j] = dc[j] * k.gates[j];
      maxout2_backward(dz, k.z_arg, std::span<double>(dpre).subspan(3 * h, 2 * h));
    }

    auto& db = g[idx_.b];
    for (std::size_t r = 0; r < 5 * h; ++r) db[r] += dpre[r];
    outer_acc(g[idx_.wx], dpre, k.x);
    outer_acc(g[idx_.wh], dpre, k.h_prev);
    std::fill(dx.begin(), dx.end(), 0.0);
    gemv_t_acc(store_.value(idx_.wx), dpre, dx);
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    gemv_t_acc(store_.value(idx_.wh), dpre, dh_next);

    if (att) {
      const std::span<const double> dz_pre = std::span<const double>(dpre).subspan(3 * h, 2 * h);
      outer_acc(g[idx_.wzi], dz_pre, k.attended);
      gemv_t_acc(store_.value(idx_.wzi), dz_pre, dattended);
      if (all) {
        const std::span<const double> dgates = std::span<const double>(dpre).subspan(0, 3 * h);
        outer_acc(g[idx_.wgi], dgates, k.attended);
        gemv_t_acc(store_.value(idx_.wgi), dgates, dattended);
      }
      // I_t = sum_i alpha_i I_i
      for (std::size_t i = 0; i < n; ++i) {
        const auto feat = ctx.features.spatial.row(i);
        double acc = 0.0;
        for (std::size_t c = 0; c < f; ++c) acc += dattended[c] * feat[c];
        dalpha[i] = acc;
      }
      softmax_backward_inplace(k.alpha, dalpha);
      auto& dbalpha = g[idx_.balpha];
      auto& dw = g[idx_.w];
      const auto w = store_.value(idx_.w).data();
      std::fill(dq.begin(), dq.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        dbalpha[i] += dalpha[i];
        const double da = dalpha[i];
        if (da == 0.0) continue;
        auto dp = dprojected.row(i);
        for (std::size_t c = 0; c < h; ++c) {
          const double u = k.att_tanh[i * h + c];
          dw[c] += da * u;
          const double du = da * w[c] * (1.0 - u * u);
          dq[c] += du;
          dp[c] += du;
        }
      }
      auto& dba = g[idx_.ba];
      for (std::size_t c = 0; c < h; ++c) dba[c] += dq[c];
      outer_acc(g[idx_.wah], dq, k.h_prev);
      gemv_t_acc(store_.value(idx_.wah), dq, dh_next);
    }

    if (k.image_input) {
      outer_acc(g[idx_.wi], dx, ctx.features.global.data());
    } else {
      auto row = g[idx_.embed].row(static_cast<std::size_t>(k.input));
      for (std::size_t c = 0; c < h; ++c) row[c] += dx[c];
    }
  }

  if (att) {
    auto& dwai = g[idx_.wai];
    for (std::size_t i = 0; i < n; ++i) {
      outer_acc(dwai, dprojected.row(i), ctx.features.spatial.row(i));
    }
  }
}

std::string Captioner::serialize() const {
  CheckpointHeader header;
  header.model_kind = static_cast<std::uint32_t>(config_.arch);
  header.config = config_.encode();
  return serialize_checkpoint(header, store_);
}

void Captioner::save(const std::string& path) const { write_file(path, serialize()); }

Captioner Captioner::load(const std::string& path) {
  CheckpointHeader header;
  ParamStore store = load_checkpoint(path, &header);
  return Captioner(ModelConfig::decode(header.model_kind, header.config), std::move(store));
}

}  // namespace scst
