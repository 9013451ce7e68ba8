#include "pupilwatch/neural.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <stdexcept>

#include "pupilwatch/evaluation.hpp"
#include "pupilwatch/parallel.hpp"
#include "pupilwatch/rng.hpp"

namespace pupilwatch {

std::vector<int> Architecture::pooled_lengths() const {
  std::vector<int> out;
  int len = kWindowSamples;
  for (const auto& layer : conv) {
    (void)layer;
    len /= 2;
    out.push_back(len);
  }
  return out;
}

int Architecture::flat_features() const {
  const auto lens = pooled_lengths();
  return conv.back().out_channels * lens.back();
}

std::size_t Architecture::parameter_count() const {
  std::size_t n = 0;
  int in = in_channels;
  for (const auto& layer : conv) {
    n += static_cast<std::size_t>(layer.out_channels) * in * layer.kernel;
    n += static_cast<std::size_t>(layer.out_channels);
    in = layer.out_channels;
  }
  const auto flat = static_cast<std::size_t>(flat_features());
  n += static_cast<std::size_t>(hidden_units) * flat + hidden_units;  // dense 1
  n += static_cast<std::size_t>(hidden_units) + 1;                    // logit
  n += static_cast<std::size_t>(kWindowSamples) * flat + kWindowSamples;  // recon
  return n;
}

std::vector<ParameterGroup> parameter_groups(const Architecture& arch) {
  std::vector<ParameterGroup> groups;
  std::size_t off = 0;
  int in = arch.in_channels;
  for (std::size_t l = 0; l < arch.conv.size(); ++l) {
    const auto& layer = arch.conv[l];
    const auto w = static_cast<std::size_t>(layer.out_channels) * in * layer.kernel;
    groups.push_back({"conv" + std::to_string(l + 1) + ".weight", off, w});
    off += w;
    groups.push_back({"conv" + std::to_string(l + 1) + ".bias", off,
                      static_cast<std::size_t>(layer.out_channels)});
    off += static_cast<std::size_t>(layer.out_channels);
    in = layer.out_channels;
  }
  const auto flat = static_cast<std::size_t>(arch.flat_features());
  const auto hidden = static_cast<std::size_t>(arch.hidden_units);
  groups.push_back({"clf.dense1.weight", off, hidden * flat});
  off += hidden * flat;
  groups.push_back({"clf.dense1.bias", off, hidden});
  off += hidden;
  groups.push_back({"clf.logit.weight", off, hidden});
  off += hidden;
  groups.push_back({"clf.logit.bias", off, 1});
  off += 1;
  groups.push_back({"recon.weight", off, static_cast<std::size_t>(kWindowSamples) * flat});
  off += static_cast<std::size_t>(kWindowSamples) * flat;
  groups.push_back({"recon.bias", off, static_cast<std::size_t>(kWindowSamples)});
  return groups;
}

ModelParameters init_parameters(const Architecture& arch, std::uint64_t seed) {
  ModelParameters params;
  params.arch = arch;
  params.theta.assign(arch.parameter_count(), 0.0);
  Rng rng(mix_seed(seed, 0x696e6974ULL));

  // He-style fan-in scaling for weights, zero biases.
  for (const auto& g : parameter_groups(arch)) {
    if (g.name.find("bias") != std::string::npos) continue;
    std::size_t fan_in = 1;
    if (g.name.rfind("conv", 0) == 0) {
      const std::size_t l = static_cast<std::size_t>(g.name[4] - '1');
      const int in = l == 0 ? arch.in_channels : arch.conv[l - 1].out_channels;
      fan_in = static_cast<std::size_t>(in) * arch.conv[l].kernel;
    } else if (g.name == "clf.dense1.weight" || g.name == "recon.weight") {
      fan_in = static_cast<std::size_t>(arch.flat_features());
    } else {
      fan_in = static_cast<std::size_t>(arch.hidden_units);
    }
    const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (std::size_t i = 0; i < g.size; ++i)
      params.theta[g.offset + i] = scale * rng.normal();
  }
  return params;
}

Sample to_sample(const LabeledWindow& w, int in_channels) {
  Sample s;
  s.input.reserve(static_cast<std::size_t>(in_channels) * kWindowSamples);
  for (int c = 0; c < in_channels; ++c)
    s.input.insert(s.input.end(), w.values[static_cast<std::size_t>(c)].begin(),
                   w.values[static_cast<std::size_t>(c)].end());
  s.label = w.label;
  s.id = w.participant_id + "/" + w.session_id + "/" + to_string(w.task) + "/" +
         std::to_string(w.stimulus_index) + "/" + to_string(w.role);
  return s;
}

DropoutMasks make_dropout_masks(const Architecture& arch, std::uint64_t seed) {
  DropoutMasks m;
  Rng rng(mix_seed(seed, 0x64726f70ULL));
  const auto lens = arch.pooled_lengths();
  for (std::size_t l = 0; l < arch.conv.size(); ++l) {
    const auto n = static_cast<std::size_t>(arch.conv[l].out_channels) *
                   static_cast<std::size_t>(lens[l]);
    std::vector<double> scale(n, 1.0);
    const double rate = arch.conv[l].dropout;
    if (rate > 0.0) {
      const double keep = 1.0 - rate;
      for (double& s : scale) s = (rng.uniform() < keep) ? 1.0 / keep : 0.0;
    }
    m.scale.push_back(std::move(scale));
  }
  return m;
}

namespace {

constexpr double kProbEps = 1e-12;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Per-sample scratch buffers, reused across a worker's samples.
struct Workspace {
  // Per conv layer: pre-activation conv output, pooled output (post dropout),
  // and the argmax chosen by each pool element.
  std::vector<std::vector<double>> conv_out;
  std::vector<std::vector<double>> pooled;
  std::vector<std::vector<int>> argmax;
  std::vector<double> hidden_pre, hidden;
  std::vector<double> recon;
  double logit = 0.0, p_clf = 0.5;
  // backward scratch
  std::vector<std::vector<double>> d_pooled;
  std::vector<std::vector<double>> d_conv;
  std::vector<double> d_hidden, d_input;

  void resize(const Architecture& arch) {
    const auto lens = arch.pooled_lengths();
    conv_out.resize(arch.conv.size());
    pooled.resize(arch.conv.size());
    argmax.resize(arch.conv.size());
    d_pooled.resize(arch.conv.size());
    d_conv.resize(arch.conv.size());
    int in_len = kWindowSamples;
    for (std::size_t l = 0; l < arch.conv.size(); ++l) {
      const auto oc = static_cast<std::size_t>(arch.conv[l].out_channels);
      conv_out[l].resize(oc * static_cast<std::size_t>(in_len));
      d_conv[l].resize(oc * static_cast<std::size_t>(in_len));
      pooled[l].resize(oc * static_cast<std::size_t>(lens[l]));
      d_pooled[l].resize(oc * static_cast<std::size_t>(lens[l]));
      argmax[l].resize(oc * static_cast<std::size_t>(lens[l]));
      in_len = lens[l];
    }
    hidden_pre.resize(static_cast<std::size_t>(arch.hidden_units));
    hidden.resize(static_cast<std::size_t>(arch.hidden_units));
    d_hidden.resize(static_cast<std::size_t>(arch.hidden_units));
    recon.resize(kWindowSamples);
    d_input.resize(static_cast<std::size_t>(arch.in_channels) * kWindowSamples);
  }
};

struct Offsets {
  std::vector<std::size_t> conv_w, conv_b;
  std::size_t w1, b1, w2, b2, wr, br;
};

Offsets compute_offsets(const Architecture& arch) {
  Offsets o;
  std::size_t off = 0;
  int in = arch.in_channels;
  for (const auto& layer : arch.conv) {
    o.conv_w.push_back(off);
    off += static_cast<std::size_t>(layer.out_channels) * in * layer.kernel;
    o.conv_b.push_back(off);
    off += static_cast<std::size_t>(layer.out_channels);
    in = layer.out_channels;
  }
  const auto flat = static_cast<std::size_t>(arch.flat_features());
  const auto hidden = static_cast<std::size_t>(arch.hidden_units);
  o.w1 = off; off += hidden * flat;
  o.b1 = off; off += hidden;
  o.w2 = off; off += hidden;
  o.b2 = off; off += 1;
  o.wr = off; off += static_cast<std::size_t>(kWindowSamples) * flat;
  o.br = off;
  return o;
}

// y[o][t] = b[o] + sum_c sum_k W[o][c][k] * x[c][t + k - pad], zero padded.
void conv1d_forward(const double* W, const double* b, const double* x, double* y,
                    int in_ch, int out_ch, int len, int kernel) {
  const int pad = (kernel - 1) / 2;
  for (int o = 0; o < out_ch; ++o) {
    double* yo = y + static_cast<std::size_t>(o) * len;
    std::fill(yo, yo + len, b[o]);
    for (int c = 0; c < in_ch; ++c) {
      const double* xc = x + static_cast<std::size_t>(c) * len;
      const double* w = W + (static_cast<std::size_t>(o) * in_ch + c) * kernel;
      for (int k = 0; k < kernel; ++k) {
        const int shift = k - pad;
        const double wk = w[k];
        const int t0 = std::max(0, -shift);
        const int t1 = std::min(len, len - shift);
        for (int t = t0; t < t1; ++t) yo[t] += wk * xc[t + shift];
      }
    }
  }
}

void conv1d_backward(const double* W, const double* x, const double* dy, double* dW,
                     double* db, double* dx, int in_ch, int out_ch, int len,
                     int kernel) {
  const int pad = (kernel - 1) / 2;
  if (dx) std::fill(dx, dx + static_cast<std::size_t>(in_ch) * len, 0.0);
  for (int o = 0; o < out_ch; ++o) {
    const double* dyo = dy + static_cast<std::size_t>(o) * len;
    double acc = 0.0;
    for (int t = 0; t < len; ++t) acc += dyo[t];
    db[o] += acc;
    for (int c = 0; c < in_ch; ++c) {
      const double* xc = x + static_cast<std::size_t>(c) * len;
      const double* w = W + (static_cast<std::size_t>(o) * in_ch + c) * kernel;
      double* dwoc = dW + (static_cast<std::size_t>(o) * in_ch + c) * kernel;
      double* dxc = dx ? dx + static_cast<std::size_t>(c) * len : nullptr;
      for (int k = 0; k < kernel; ++k) {
        const int shift = k - pad;
        const int t0 = std::max(0, -shift);
        const int t1 = std::min(len, len - shift);
        double g = 0.0;
        for (int t = t0; t < t1; ++t) g += dyo[t] * xc[t + shift];
        dwoc[k] += g;
        if (dxc) {
          const double wk = w[k];
          for (int t = t0; t < t1; ++t) dxc[t + shift] += wk * dyo[t];
        }
      }
    }
  }
}

// Forward through the whole net, filling the workspace.
void forward_pass(const ModelParameters& params, const Offsets& off,
                  const std::vector<double>& input, const DropoutMasks* masks,
                  Workspace& ws) {
  const Architecture& arch = params.arch;
  const double* theta = params.theta.data();
  const auto lens = arch.pooled_lengths();

  const double* x = input.data();
  int in_ch = arch.in_channels;
  int len = kWindowSamples;

  for (std::size_t l = 0; l < arch.conv.size(); ++l) {
    const auto& layer = arch.conv[l];
    conv1d_forward(theta + off.conv_w[l], theta + off.conv_b[l], x,
                   ws.conv_out[l].data(), in_ch, layer.out_channels, len, layer.kernel);
    // ReLU in place
    for (double& v : ws.conv_out[l]) v = v > 0.0 ? v : 0.0;
    // max-pool width 2 (floor), first index wins ties
    const int plen = lens[l];
    for (int o = 0; o < layer.out_channels; ++o) {
      const double* a = ws.conv_out[l].data() + static_cast<std::size_t>(o) * len;
      double* p = ws.pooled[l].data() + static_cast<std::size_t>(o) * plen;
      int* am = ws.argmax[l].data() + static_cast<std::size_t>(o) * plen;
      for (int j = 0; j < plen; ++j) {
        const int i0 = 2 * j;
        if (a[i0] >= a[i0 + 1]) {
          p[j] = a[i0];
          am[j] = i0;
        } else {
          p[j] = a[i0 + 1];
          am[j] = i0 + 1;
        }
      }
    }
    if (masks) {
      const auto& scale = masks->scale[l];
      for (std::size_t i = 0; i < ws.pooled[l].size(); ++i) ws.pooled[l][i] *= scale[i];
    }
    x = ws.pooled[l].data();
    in_ch = layer.out_channels;
    len = plen;
  }

  const double* f = ws.pooled.back().data();
  const auto flat = static_cast<std::size_t>(arch.flat_features());
  const auto hidden = static_cast<std::size_t>(arch.hidden_units);

  for (std::size_t j = 0; j < hidden; ++j) {
    const double* w = theta + off.w1 + j * flat;
    double acc = theta[off.b1 + j];
    for (std::size_t k = 0; k < flat; ++k) acc += w[k] * f[k];
    ws.hidden_pre[j] = acc;
    ws.hidden[j] = acc > 0.0 ? acc : 0.0;
  }
  double z = theta[off.b2];
  for (std::size_t j = 0; j < hidden; ++j) z += theta[off.w2 + j] * ws.hidden[j];
  ws.logit = z;
  ws.p_clf = sigmoid(z);

  for (int i = 0; i < kWindowSamples; ++i) {
    const double* w = theta + off.wr + static_cast<std::size_t>(i) * flat;
    double acc = theta[off.br + i];
    for (std::size_t k = 0; k < flat; ++k) acc += w[k] * f[k];
    ws.recon[static_cast<std::size_t>(i)] = acc;
  }
}

double sample_loss_from_ws(const Workspace& ws, double label, const double* pd_input,
                           double alpha) {
  const double p = std::clamp(ws.p_clf, kProbEps, 1.0 - kProbEps);
  const double bce = -(label * std::log(p) + (1.0 - label) * std::log(1.0 - p));
  double mae = 0.0;
  for (int i = 0; i < kWindowSamples; ++i)
    mae += std::abs(ws.recon[static_cast<std::size_t>(i)] - pd_input[i]);
  mae /= kWindowSamples;
  return bce + alpha * mae;
}

// Backward for one sample, accumulating (unscaled) gradients into grad.
void backward_pass(const ModelParameters& params, const Offsets& off,
                   const std::vector<double>& input, double label,
                   const DropoutMasks* masks, Workspace& ws, double* grad) {
  const Architecture& arch = params.arch;
  const double* theta = params.theta.data();
  const auto lens = arch.pooled_lengths();
  const auto flat = static_cast<std::size_t>(arch.flat_features());
  const auto hidden = static_cast<std::size_t>(arch.hidden_units);
  const double* pd_input = input.data();  // PD is always channel 0

  const double* f = ws.pooled.back().data();
  std::vector<double>& df = ws.d_pooled.back();
  std::fill(df.begin(), df.end(), 0.0);

  // Reconstruction head: d(alpha * MAE)/dr_i = alpha * sign(r_i - x_i)/250.
  const double mae_scale = arch.alpha / kWindowSamples;
  for (int i = 0; i < kWindowSamples; ++i) {
    const double diff = ws.recon[static_cast<std::size_t>(i)] - pd_input[i];
    const double dr = diff > 0.0 ? mae_scale : (diff < 0.0 ? -mae_scale : 0.0);
    if (dr == 0.0) continue;
    const double* w = theta + off.wr + static_cast<std::size_t>(i) * flat;
    double* dw = grad + off.wr + static_cast<std::size_t>(i) * flat;
    for (std::size_t k = 0; k < flat; ++k) {
      dw[k] += dr * f[k];
      df[k] += dr * w[k];
    }
    grad[off.br + i] += dr;
  }

  // Classification head: dBCE/dlogit = p - y.
  const double dz = ws.p_clf - label;
  grad[off.b2] += dz;
  for (std::size_t j = 0; j < hidden; ++j) {
    grad[off.w2 + j] += dz * ws.hidden[j];
    ws.d_hidden[j] = (ws.hidden_pre[j] > 0.0) ? dz * theta[off.w2 + j] : 0.0;
  }
  for (std::size_t j = 0; j < hidden; ++j) {
    const double dh = ws.d_hidden[j];
    if (dh == 0.0) continue;
    const double* w = theta + off.w1 + j * flat;
    double* dw = grad + off.w1 + j * flat;
    for (std::size_t k = 0; k < flat; ++k) {
      dw[k] += dh * f[k];
      df[k] += dh * w[k];
    }
    grad[off.b1 + j] += dh;
  }

  // Conv stack, last layer to first.
  for (std::size_t l = arch.conv.size(); l-- > 0;) {
    const auto& layer = arch.conv[l];
    const int len = l == 0 ? kWindowSamples : lens[l - 1];
    const int plen = lens[l];
    std::vector<double>& dp = ws.d_pooled[l];

    if (masks) {
      const auto& scale = masks->scale[l];
      for (std::size_t i = 0; i < dp.size(); ++i) dp[i] *= scale[i];
    }

    // un-pool then ReLU derivative
    std::vector<double>& dc = ws.d_conv[l];
    std::fill(dc.begin(), dc.end(), 0.0);
    for (int o = 0; o < layer.out_channels; ++o) {
      const int* am = ws.argmax[l].data() + static_cast<std::size_t>(o) * plen;
      const double* dpo = dp.data() + static_cast<std::size_t>(o) * plen;
      double* dco = dc.data() + static_cast<std::size_t>(o) * len;
      const double* a = ws.conv_out[l].data() + static_cast<std::size_t>(o) * len;
      for (int j = 0; j < plen; ++j)
        if (a[am[j]] > 0.0) dco[am[j]] += dpo[j];
    }

    const int in_ch = l == 0 ? arch.in_channels : arch.conv[l - 1].out_channels;
    const double* x = l == 0 ? input.data() : ws.pooled[l - 1].data();
    double* dx = l == 0 ? nullptr : ws.d_pooled[l - 1].data();
    conv1d_backward(theta + off.conv_w[l], x, dc.data(), grad + off.conv_w[l],
                    grad + off.conv_b[l], dx, in_ch, layer.out_channels, len,
                    layer.kernel);
  }
}

constexpr unsigned kGradSlots = 8;

// Mean gradient over a batch; optionally also the mean loss. Slot-wise
// accumulation keeps the summation order independent of thread count.
std::vector<double> batch_gradient_impl(const ModelParameters& params,
                                        const std::vector<Sample>& batch,
                                        const std::vector<DropoutMasks>* masks,
                                        double* mean_loss_out) {
  if (batch.empty()) throw std::runtime_error("empty batch");
  const Offsets off = compute_offsets(params.arch);
  const std::size_t n_params = params.theta.size();

  std::vector<std::vector<double>> slot_grads(kGradSlots);
  std::vector<double> slot_loss(kGradSlots, 0.0);
  std::vector<std::string> bad_sample(kGradSlots);

  parallel_slots(kGradSlots, [&](unsigned slot) {
    Workspace ws;
    ws.resize(params.arch);
    auto& grad = slot_grads[slot];
    grad.assign(n_params, 0.0);
    for (std::size_t i = slot; i < batch.size(); i += kGradSlots) {
      const Sample& s = batch[i];
      const DropoutMasks* m = masks ? &(*masks)[i] : nullptr;
      forward_pass(params, off, s.input, m, ws);
      const double loss =
          sample_loss_from_ws(ws, s.label, s.input.data(), params.arch.alpha);
      if (!std::isfinite(loss) && bad_sample[slot].empty()) bad_sample[slot] = s.id;
      slot_loss[slot] += loss;
      backward_pass(params, off, s.input, s.label, m, ws, grad.data());
    }
  });

  for (unsigned s = 0; s < kGradSlots; ++s)
    if (!bad_sample[s].empty())
      throw std::runtime_error("non-finite loss for sample " + bad_sample[s]);

  std::vector<double> grad(n_params, 0.0);
  double loss = 0.0;
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (unsigned s = 0; s < kGradSlots; ++s) {
    loss += slot_loss[s];
    const auto& g = slot_grads[s];
    for (std::size_t i = 0; i < n_params; ++i) grad[i] += g[i];
  }
  for (double& g : grad) g *= inv;
  if (mean_loss_out) *mean_loss_out = loss * inv;
  return grad;
}

}  // namespace

PredictionPair forward(const ModelParameters& params, const std::vector<double>& input,
                       const DropoutMasks* masks) {
  if (input.size() !=
      static_cast<std::size_t>(params.arch.in_channels) * kWindowSamples)
    throw std::runtime_error("input shape mismatch");
  const Offsets off = compute_offsets(params.arch);
  Workspace ws;
  ws.resize(params.arch);
  forward_pass(params, off, input, masks, ws);
  PredictionPair out;
  out.p_clf = ws.p_clf;
  out.pd_recon = ws.recon;
  return out;
}

double composite_loss(const PredictionPair& pred, double label,
                      const std::vector<double>& pd_input, double alpha) {
  const double p = std::clamp(pred.p_clf, kProbEps, 1.0 - kProbEps);
  const double bce = -(label * std::log(p) + (1.0 - label) * std::log(1.0 - p));
  double mae = 0.0;
  for (std::size_t i = 0; i < pred.pd_recon.size(); ++i)
    mae += std::abs(pred.pd_recon[i] - pd_input[i]);
  mae /= static_cast<double>(pred.pd_recon.size());
  return bce + alpha * mae;
}

double batch_loss(const ModelParameters& params, const std::vector<Sample>& batch,
                  const std::vector<DropoutMasks>* masks) {
  if (batch.empty()) throw std::runtime_error("empty batch");
  const Offsets off = compute_offsets(params.arch);
  Workspace ws;
  ws.resize(params.arch);
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    forward_pass(params, off, batch[i].input, masks ? &(*masks)[i] : nullptr, ws);
    total += sample_loss_from_ws(ws, batch[i].label, batch[i].input.data(),
                                 params.arch.alpha);
  }
  return total / static_cast<double>(batch.size());
}

std::vector<double> backward_gradients(const ModelParameters& params,
                                       const std::vector<Sample>& batch,
                                       const std::vector<DropoutMasks>* masks) {
  return batch_gradient_impl(params, batch, masks, nullptr);
}

std::pair<ModelParameters, TrainReport> train(const std::vector<LabeledWindow>& train_set,
                                              const std::vector<LabeledWindow>& val_set,
                                              const Architecture& arch,
                                              const Hyperparams& hp, std::uint64_t seed) {
  if (train_set.empty()) throw std::runtime_error("empty train set");
  const auto t_start = std::chrono::steady_clock::now();

  std::vector<Sample> samples;
  samples.reserve(train_set.size());
  for (const auto& w : train_set) samples.push_back(to_sample(w, arch.in_channels));

  ModelParameters params = init_parameters(arch, seed);
  const std::size_t n_params = params.theta.size();

  // Adam state
  std::vector<double> m(n_params, 0.0), v(n_params, 0.0);
  const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  long step = 0;

  std::vector<int> val_labels;
  for (const auto& w : val_set) val_labels.push_back(w.label);

  TrainReport report;
  report.seed = seed;
  ModelParameters best = params;
  double best_mcc = -2.0;
  int since_best = 0;

  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const bool use_dropout = std::any_of(arch.conv.begin(), arch.conv.end(),
                                       [](const ConvLayerSpec& c) { return c.dropout > 0; });

  for (int epoch = 0; epoch < hp.max_epochs; ++epoch) {
    // Seed-derived shuffle: depends on (seed, epoch), not on input order of
    // previous epochs.
    Rng shuffle_rng(mix_seed(seed, 0x65706f63ULL + static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.below(i)]);

    double epoch_loss = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t b0 = 0; b0 < samples.size();
         b0 += static_cast<std::size_t>(hp.batch_size)) {
      const std::size_t b1 =
          std::min(samples.size(), b0 + static_cast<std::size_t>(hp.batch_size));
      std::vector<Sample> batch;
      batch.reserve(b1 - b0);
      std::vector<DropoutMasks> masks;
      for (std::size_t i = b0; i < b1; ++i) {
        batch.push_back(samples[order[i]]);
        if (use_dropout)
          masks.push_back(make_dropout_masks(
              arch, mix_seed(mix_seed(seed, 0x6d61736bULL),
                             static_cast<std::uint64_t>(epoch) * 0x100000000ULL +
                                 static_cast<std::uint64_t>(i))));
      }
      double loss = 0.0;
      std::vector<double> grad =
          batch_gradient_impl(params, batch, use_dropout ? &masks : nullptr, &loss);
      epoch_loss += loss;
      ++n_batches;

      ++step;
      const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      for (std::size_t i = 0; i < n_params; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
        params.theta[i] -=
            hp.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + adam_eps);
      }
    }
    report.epoch_train_loss.push_back(epoch_loss / static_cast<double>(n_batches));

    double val_score = 0.0;
    if (!val_set.empty()) {
      const std::vector<double> probs = predict_proba(params, val_set);
      val_score = mcc(confusion(val_labels, probs));
    }
    report.epoch_val_mcc.push_back(val_score);

    if (val_set.empty() || val_score > best_mcc) {
      best_mcc = val_score;
      best = params;
      report.chosen_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= hp.patience) {
      break;
    }
  }

  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return {std::move(best), std::move(report)};
}

std::vector<double> predict_proba(const ModelParameters& params,
                                  const std::vector<LabeledWindow>& windows) {
  const Offsets off = compute_offsets(params.arch);
  std::vector<double> out(windows.size(), 0.0);
  const unsigned n_slots = 32;
  parallel_slots(n_slots, [&](unsigned slot) {
    Workspace ws;
    ws.resize(params.arch);
    for (std::size_t i = slot; i < windows.size(); i += n_slots) {
      const Sample s = to_sample(windows[i], params.arch.in_channels);
      forward_pass(params, off, s.input, nullptr, ws);
      out[i] = ws.p_clf;
    }
  });
  return out;
}

namespace {

constexpr char kWeightMagic[4] = {'P', 'W', 'N', 'N'};
constexpr std::uint16_t kWeightVersion = 1;

template <typename T>
void put_raw(std::ofstream& f, T v) {
  unsigned char b[sizeof(T)];
  std::uint64_t u = 0;
  std::memcpy(&u, &v, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T); ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
  f.write(reinterpret_cast<char*>(b), sizeof(T));
}

template <typename T>
T get_raw(std::ifstream& f) {
  unsigned char b[sizeof(T)];
  if (!f.read(reinterpret_cast<char*>(b), sizeof(T)))
    throw std::runtime_error("truncated weight file");
  std::uint64_t u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  T v;
  std::memcpy(&v, &u, sizeof(T));
  return v;
}

}  // namespace

void save_weights(const ModelParameters& params, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f.write(kWeightMagic, 4);
  put_raw<std::uint16_t>(f, kWeightVersion);
  put_raw<std::uint8_t>(f, static_cast<std::uint8_t>(params.arch.in_channels));
  put_raw<double>(f, params.arch.alpha);
  put_raw<std::uint16_t>(f, static_cast<std::uint16_t>(params.arch.conv.size()));
  for (const auto& layer : params.arch.conv) {
    put_raw<std::uint32_t>(f, static_cast<std::uint32_t>(layer.out_channels));
    put_raw<std::uint32_t>(f, static_cast<std::uint32_t>(layer.kernel));
    put_raw<double>(f, layer.dropout);
  }
  put_raw<std::uint32_t>(f, static_cast<std::uint32_t>(params.arch.hidden_units));
  put_raw<std::uint64_t>(f, params.theta.size());
  for (double x : params.theta) put_raw<double>(f, x);
}

ModelParameters load_weights(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  char magic[4];
  if (!f.read(magic, 4) || std::memcmp(magic, kWeightMagic, 4) != 0)
    throw std::runtime_error("bad magic in " + path.string());
  if (get_raw<std::uint16_t>(f) != kWeightVersion)
    throw std::runtime_error("unsupported weight file version");
  ModelParameters params;
  params.arch.in_channels = get_raw<std::uint8_t>(f);
  params.arch.alpha = get_raw<double>(f);
  const std::uint16_t n_conv = get_raw<std::uint16_t>(f);
  params.arch.conv.clear();
  for (std::uint16_t l = 0; l < n_conv; ++l) {
    ConvLayerSpec spec;
    spec.out_channels = static_cast<int>(get_raw<std::uint32_t>(f));
    spec.kernel = static_cast<int>(get_raw<std::uint32_t>(f));
    spec.dropout = get_raw<double>(f);
    params.arch.conv.push_back(spec);
  }
  params.arch.hidden_units = static_cast<int>(get_raw<std::uint32_t>(f));
  const std::uint64_t n = get_raw<std::uint64_t>(f);
  if (n != params.arch.parameter_count())
    throw std::runtime_error("weight count does not match architecture");
  params.theta.resize(n);
  for (double& x : params.theta) x = get_raw<double>(f);
  return params;
}

void ensure_channel_mode(const ModelParameters& params, int expected_channels) {
  if (params.arch.in_channels != expected_channels)
    throw std::runtime_error("channel-mode mismatch");
}

}  // namespace pupilwatch
