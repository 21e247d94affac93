#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "aviary/parallel.hpp"
#include "aviary/rng.hpp"

namespace aviary {

struct ConvBlockSpec {
  int filters = 16;
  int kernel = 3;  // odd, stride 1, same padding
  int pool = 2;    // window == stride; must divide the incoming side
};

struct CnnConfig {
  int input_size = 64;
  int channels = 3;
  std::vector<ConvBlockSpec> blocks = {{16, 3, 2}, {32, 3, 2}, {64, 3, 2}};
  int fc_neurons = 256;
  int batch_size = 32;
  int max_epochs = 100;
  int patience = 35;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
};

namespace detail {

/// Y[M][N] = W[M][K] * col[K][N] + bias broadcast. Each output row is
/// produced by exactly one worker, so results do not depend on the thread
/// count.
template <typename S>
void gemm_rows(const S* w, const S* col, const S* bias, S* y, int m_total, int k_total,
               long n_total) {
  parallel_for(static_cast<std::size_t>(m_total), [&](std::size_t m) {
    S* __restrict__ out = y + m * n_total;
    const S b = bias ? bias[m] : S(0);
    for (long n = 0; n < n_total; ++n) out[n] = b;
    const S* wrow = w + m * k_total;
    for (int k = 0; k < k_total; ++k) {
      const S wk = wrow[k];
      if (wk == S(0)) continue;
      const S* __restrict__ crow = col + static_cast<long>(k) * n_total;
      for (long n = 0; n < n_total; ++n) out[n] += wk * crow[n];
    }
  });
}

/// dW[M][K] = dY[M][N] * col[K][N]^T ; db[M] = row sums of dY.
template <typename S>
void gemm_grad_w(const S* dy, const S* col, S* dw, S* db, int m_total, int k_total,
                 long n_total) {
  parallel_for(static_cast<std::size_t>(m_total), [&](std::size_t m) {
    const S* __restrict__ dyrow = dy + m * n_total;
    S* wrow = dw + m * k_total;
    for (int k = 0; k < k_total; ++k) {
      const S* __restrict__ crow = col + static_cast<long>(k) * n_total;
      S acc = 0;
      for (long n = 0; n < n_total; ++n) acc += dyrow[n] * crow[n];
      wrow[k] = acc;
    }
    S acc = 0;
    for (long n = 0; n < n_total; ++n) acc += dyrow[n];
    db[m] = acc;
  });
}

/// dcol[K][N] = W[M][K]^T * dY[M][N].
template <typename S>
void gemm_grad_col(const S* w, const S* dy, S* dcol, int m_total, int k_total, long n_total) {
  parallel_for(static_cast<std::size_t>(k_total), [&](std::size_t k) {
    S* __restrict__ out = dcol + k * n_total;
    for (long n = 0; n < n_total; ++n) out[n] = 0;
    for (int m = 0; m < m_total; ++m) {
      const S wk = w[static_cast<long>(m) * k_total + k];
      if (wk == S(0)) continue;
      const S* __restrict__ dyrow = dy + static_cast<long>(m) * n_total;
      for (long n = 0; n < n_total; ++n) out[n] += wk * dyrow[n];
    }
  });
}

}  // namespace detail

/// The compact trainable convolutional network: conv(same,3x3)/ReLU/maxpool
/// blocks, one hidden fully connected layer, softmax output. Activations are
/// kept feature-major ([channel][batch*h*w]) so convolutions become plain
/// GEMMs over a batch-wide im2col buffer. All reductions run in a fixed
/// order; see parallel.hpp for the determinism contract.
template <typename S>
class ConvNetCore {
 public:
  ConvNetCore() = default;

  ConvNetCore(const CnnConfig& cfg, int n_classes) : cfg_(cfg), n_classes_(n_classes) {
    if (n_classes < 2) throw std::invalid_argument("convnet: need at least 2 classes");
    if (cfg.input_size < 4) throw std::invalid_argument("convnet: input_size too small");
    if (cfg.channels < 1) throw std::invalid_argument("convnet: channels must be >= 1");
    if (cfg.blocks.empty()) throw std::invalid_argument("convnet: need at least one conv block");
    if (cfg.fc_neurons < 1) throw std::invalid_argument("convnet: fc_neurons must be >= 1");

    int side = cfg.input_size;
    int ch = cfg.channels;
    for (const auto& b : cfg.blocks) {
      if (b.kernel < 1 || b.kernel % 2 == 0) {
        throw std::invalid_argument("convnet: kernels must be odd (same padding)");
      }
      if (b.pool < 1 || side % b.pool != 0) {
        throw std::invalid_argument("convnet: pool " + std::to_string(b.pool) +
                                    " must divide the layer side " + std::to_string(side));
      }
      Block blk;
      blk.in_ch = ch;
      blk.out_ch = b.filters;
      blk.kernel = b.kernel;
      blk.pool = b.pool;
      blk.in_side = side;
      blk.out_side = side / b.pool;
      blk.w.assign(static_cast<std::size_t>(b.filters) * ch * b.kernel * b.kernel, S(0));
      blk.b.assign(static_cast<std::size_t>(b.filters), S(0));
      blocks_.push_back(std::move(blk));
      side = side / b.pool;
      ch = b.filters;
    }
    flat_dim_ = ch * side * side;
    fc1_w_.assign(static_cast<std::size_t>(flat_dim_) * cfg.fc_neurons, S(0));
    fc1_b_.assign(static_cast<std::size_t>(cfg.fc_neurons), S(0));
    fc2_w_.assign(static_cast<std::size_t>(cfg.fc_neurons) * n_classes, S(0));
    fc2_b_.assign(static_cast<std::size_t>(n_classes), S(0));
  }

  const CnnConfig& config() const { return cfg_; }
  int n_classes() const { return n_classes_; }
  int flat_dim() const { return flat_dim_; }
  std::size_t sample_values() const {
    return static_cast<std::size_t>(cfg_.channels) * cfg_.input_size * cfg_.input_size;
  }

  /// He-normal weights, one stream per layer.
  void init_weights(std::uint64_t seed) {
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      auto& blk = blocks_[i];
      SeededRng rng(seed, 0xC0DE00 + i);
      const double std_dev = std::sqrt(2.0 / (blk.in_ch * blk.kernel * blk.kernel));
      for (auto& w : blk.w) w = static_cast<S>(rng.normal(0.0, std_dev));
      std::fill(blk.b.begin(), blk.b.end(), S(0));
    }
    {
      SeededRng rng(seed, 0xC0DE00 + blocks_.size());
      const double std_dev = std::sqrt(2.0 / flat_dim_);
      for (auto& w : fc1_w_) w = static_cast<S>(rng.normal(0.0, std_dev));
    }
    {
      SeededRng rng(seed, 0xC0DE00 + blocks_.size() + 1);
      const double std_dev = std::sqrt(2.0 / cfg_.fc_neurons);
      for (auto& w : fc2_w_) w = static_cast<S>(rng.normal(0.0, std_dev));
    }
    adam_t_ = 0;
    adam_m_.clear();
    adam_v_.clear();
  }

  std::vector<std::vector<S>*> params() {
    std::vector<std::vector<S>*> out;
    for (auto& blk : blocks_) {
      out.push_back(&blk.w);
      out.push_back(&blk.b);
    }
    out.push_back(&fc1_w_);
    out.push_back(&fc1_b_);
    out.push_back(&fc2_w_);
    out.push_back(&fc2_b_);
    return out;
  }

  std::vector<std::vector<S>*> grads() {
    ensure_grads();
    std::vector<std::vector<S>*> out;
    for (auto& g : grads_) out.push_back(&g);
    return out;
  }

  std::vector<std::vector<S>> snapshot() const {
    std::vector<std::vector<S>> out;
    for (const auto& blk : blocks_) {
      out.push_back(blk.w);
      out.push_back(blk.b);
    }
    out.push_back(fc1_w_);
    out.push_back(fc1_b_);
    out.push_back(fc2_w_);
    out.push_back(fc2_b_);
    return out;
  }

  void restore(const std::vector<std::vector<S>>& snap) {
    auto ps = params();
    if (snap.size() != ps.size()) throw std::invalid_argument("convnet: snapshot shape mismatch");
    for (std::size_t i = 0; i < ps.size(); ++i) *ps[i] = snap[i];
  }

  /// Mean cross-entropy over the batch; gradients land in grads().
  /// batch_x holds B samples of CHW values back to back.
  double forward_backward(const std::vector<S>& batch_x, const std::vector<int>& batch_y) {
    const int batch = static_cast<int>(batch_y.size());
    Workspace& ws = train_ws_;
    forward_impl(batch_x, batch, ws, /*keep_for_backward=*/true);
    ensure_grads();

    // softmax + cross-entropy (sequential; the batch is small)
    const long n_out = static_cast<long>(batch) * n_classes_;
    ws.dlogits.assign(static_cast<std::size_t>(n_out), S(0));
    double loss = 0.0;
    for (int b = 0; b < batch; ++b) {
      const S* row = ws.logits.data() + static_cast<long>(b) * n_classes_;
      S* drow = ws.dlogits.data() + static_cast<long>(b) * n_classes_;
      double mx = row[0];
      for (int c = 1; c < n_classes_; ++c) mx = std::max(mx, static_cast<double>(row[c]));
      double denom = 0.0;
      for (int c = 0; c < n_classes_; ++c) denom += std::exp(static_cast<double>(row[c]) - mx);
      const double logp = static_cast<double>(row[batch_y[b]]) - mx - std::log(denom);
      loss -= logp;
      for (int c = 0; c < n_classes_; ++c) {
        const double p = std::exp(static_cast<double>(row[c]) - mx) / denom;
        drow[c] = static_cast<S>((p - (c == batch_y[b] ? 1.0 : 0.0)) / batch);
      }
    }
    loss /= batch;

    backward_impl(batch, ws);
    return loss;
  }

  void adam_step() {
    ensure_grads();
    auto ps = params();
    if (adam_m_.empty()) {
      for (auto* p : ps) {
        adam_m_.emplace_back(p->size(), S(0));
        adam_v_.emplace_back(p->size(), S(0));
      }
    }
    ++adam_t_;
    const double b1 = cfg_.beta1, b2 = cfg_.beta2;
    const double bias1 = 1.0 - std::pow(b1, adam_t_);
    const double bias2 = 1.0 - std::pow(b2, adam_t_);
    const double lr = cfg_.learning_rate;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      auto& p = *ps[i];
      auto& g = grads_[i];
      auto& m = adam_m_[i];
      auto& v = adam_v_[i];
      for (std::size_t j = 0; j < p.size(); ++j) {
        const double gj = g[j];
        const double mj = b1 * m[j] + (1.0 - b1) * gj;
        const double vj = b2 * v[j] + (1.0 - b2) * gj * gj;
        m[j] = static_cast<S>(mj);
        v[j] = static_cast<S>(vj);
        p[j] -= static_cast<S>(lr * (mj / bias1) / (std::sqrt(vj / bias2) + cfg_.epsilon));
      }
    }
  }

  /// Thread-safe single-sample inference with call-local buffers.
  std::vector<double> predict_scores(const std::vector<S>& chw) const {
    if (chw.size() != sample_values()) {
      throw std::invalid_argument("convnet: input size mismatch (expected " +
                                  std::to_string(sample_values()) + " values, got " +
                                  std::to_string(chw.size()) + ")");
    }
    Workspace ws;
    forward_impl(chw, 1, ws, /*keep_for_backward=*/false);
    std::vector<double> scores(static_cast<std::size_t>(n_classes_));
    double mx = ws.logits[0];
    for (int c = 1; c < n_classes_; ++c) mx = std::max(mx, static_cast<double>(ws.logits[c]));
    double denom = 0.0;
    for (int c = 0; c < n_classes_; ++c) {
      scores[c] = std::exp(static_cast<double>(ws.logits[c]) - mx);
      denom += scores[c];
    }
    for (double& s : scores) s /= denom;
    return scores;
  }

  /// Batched inference reusing the training workspace (driver-thread only).
  std::vector<std::vector<double>> predict_scores_batch(const std::vector<S>& batch_x, int batch) {
    forward_impl(batch_x, batch, train_ws_, /*keep_for_backward=*/false);
    std::vector<std::vector<double>> out(static_cast<std::size_t>(batch));
    for (int b = 0; b < batch; ++b) {
      const S* row = train_ws_.logits.data() + static_cast<long>(b) * n_classes_;
      double mx = row[0];
      for (int c = 1; c < n_classes_; ++c) mx = std::max(mx, static_cast<double>(row[c]));
      double denom = 0.0;
      std::vector<double> scores(static_cast<std::size_t>(n_classes_));
      for (int c = 0; c < n_classes_; ++c) {
        scores[c] = std::exp(static_cast<double>(row[c]) - mx);
        denom += scores[c];
      }
      for (double& s : scores) s /= denom;
      out[b] = std::move(scores);
    }
    return out;
  }

  struct Block {
    int in_ch, out_ch, kernel, pool, in_side, out_side;
    std::vector<S> w;  // [out_ch][in_ch*kernel*kernel]
    std::vector<S> b;
  };
  const std::vector<Block>& conv_blocks() const { return blocks_; }
  std::vector<Block>& conv_blocks() { return blocks_; }
  std::vector<S>& fc1_w() { return fc1_w_; }
  std::vector<S>& fc1_b() { return fc1_b_; }
  std::vector<S>& fc2_w() { return fc2_w_; }
  std::vector<S>& fc2_b() { return fc2_b_; }

 private:
  struct Workspace {
    // per block: im2col buffer, pre-pool activation (post-ReLU), pooled
    // output, argmax source index per pooled cell
    std::vector<std::vector<S>> col;
    std::vector<std::vector<S>> act;     // [out_ch][B*in_side^2] after ReLU
    std::vector<std::vector<S>> pooled;  // [out_ch][B*out_side^2]
    std::vector<std::vector<int>> pool_src;
    std::vector<S> input_fm;  // feature-major copy of the batch input
    std::vector<S> flat;      // [B][flat_dim]
    std::vector<S> fc1_out;   // [B][fc] after ReLU
    std::vector<S> logits;    // [B][classes]
    std::vector<S> dlogits;
    std::vector<S> dfc1, dflat;
    std::vector<std::vector<S>> dact, dpooled, dcol;
  };

  void ensure_grads() {
    if (!grads_.empty()) return;
    auto ps = params();
    grads_.resize(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) grads_[i].assign(ps[i]->size(), S(0));
  }

  /// col[(c,ky,kx)][(b,y,x)] = act[c][(b, y+ky-pad, x+kx-pad)] with zero pad.
  static void im2col(const S* act, int channels, int side, int batch, int kernel,
                     std::vector<S>& col) {
    const int pad = kernel / 2;
    const long plane = static_cast<long>(side) * side;
    const long n_total = static_cast<long>(batch) * plane;
    col.assign(static_cast<std::size_t>(channels) * kernel * kernel * n_total, S(0));
    parallel_for(static_cast<std::size_t>(channels) * kernel * kernel, [&](std::size_t k) {
      const int c = static_cast<int>(k) / (kernel * kernel);
      const int rem = static_cast<int>(k) % (kernel * kernel);
      const int ky = rem / kernel - pad;
      const int kx = rem % kernel - pad;
      S* out = col.data() + k * n_total;
      const S* src = act + static_cast<long>(c) * n_total;
      for (int b = 0; b < batch; ++b) {
        const long base = static_cast<long>(b) * plane;
        for (int y = 0; y < side; ++y) {
          const int sy = y + ky;
          if (sy < 0 || sy >= side) continue;
          const int x0 = std::max(0, -kx);
          const int x1 = std::min(side, side - kx);
          const S* srow = src + base + static_cast<long>(sy) * side + kx;
          S* orow = out + base + static_cast<long>(y) * side;
          for (int x = x0; x < x1; ++x) orow[x] = srow[x];
        }
      }
    });
  }

  /// Transpose of im2col: scatter-adds dcol back into dact. Parallel over
  /// channels; the (ky,kx) order within a channel is fixed.
  static void col2im(const std::vector<S>& dcol, int channels, int side, int batch, int kernel,
                     std::vector<S>& dact) {
    const int pad = kernel / 2;
    const long plane = static_cast<long>(side) * side;
    const long n_total = static_cast<long>(batch) * plane;
    dact.assign(static_cast<std::size_t>(channels) * n_total, S(0));
    parallel_for(static_cast<std::size_t>(channels), [&](std::size_t c) {
      S* dst = dact.data() + c * n_total;
      for (int rem = 0; rem < kernel * kernel; ++rem) {
        const int ky = rem / kernel - pad;
        const int kx = rem % kernel - pad;
        const S* src = dcol.data() + (c * kernel * kernel + rem) * n_total;
        for (int b = 0; b < batch; ++b) {
          const long base = static_cast<long>(b) * plane;
          for (int y = 0; y < side; ++y) {
            const int sy = y + ky;
            if (sy < 0 || sy >= side) continue;
            const int x0 = std::max(0, -kx);
            const int x1 = std::min(side, side - kx);
            const S* srow = src + base + static_cast<long>(y) * side;
            S* drow = dst + base + static_cast<long>(sy) * side + kx;
            for (int x = x0; x < x1; ++x) drow[x] += srow[x];
          }
        }
      }
    });
  }

  void forward_impl(const std::vector<S>& batch_x, int batch, Workspace& ws,
                    bool keep_for_backward) const {
    const int side0 = cfg_.input_size;
    const long plane0 = static_cast<long>(side0) * side0;
    const long n0 = static_cast<long>(batch) * plane0;

    // batch [B][C][H][W] -> feature-major [C][B*H*W]
    ws.input_fm.assign(static_cast<std::size_t>(cfg_.channels) * n0, S(0));
    for (int b = 0; b < batch; ++b) {
      for (int c = 0; c < cfg_.channels; ++c) {
        const S* src = batch_x.data() + (static_cast<long>(b) * cfg_.channels + c) * plane0;
        S* dst = ws.input_fm.data() + static_cast<long>(c) * n0 + static_cast<long>(b) * plane0;
        std::copy(src, src + plane0, dst);
      }
    }

    ws.col.resize(blocks_.size());
    ws.act.resize(blocks_.size());
    ws.pooled.resize(blocks_.size());
    ws.pool_src.resize(blocks_.size());

    const S* cur = ws.input_fm.data();
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      const Block& blk = blocks_[i];
      const long plane_in = static_cast<long>(blk.in_side) * blk.in_side;
      const long n_in = static_cast<long>(batch) * plane_in;
      const int k_total = blk.in_ch * blk.kernel * blk.kernel;

      im2col(cur, blk.in_ch, blk.in_side, batch, blk.kernel, ws.col[i]);
      ws.act[i].assign(static_cast<std::size_t>(blk.out_ch) * n_in, S(0));
      detail::gemm_rows(blk.w.data(), ws.col[i].data(), blk.b.data(), ws.act[i].data(),
                        blk.out_ch, k_total, n_in);
      if (!keep_for_backward) ws.col[i].clear();

      // ReLU in place
      parallel_for(static_cast<std::size_t>(blk.out_ch), [&](std::size_t m) {
        S* row = ws.act[i].data() + m * n_in;
        for (long n = 0; n < n_in; ++n) row[n] = row[n] > S(0) ? row[n] : S(0);
      });

      // max pool window == stride
      const int out_side = blk.out_side;
      const long plane_out = static_cast<long>(out_side) * out_side;
      const long n_out = static_cast<long>(batch) * plane_out;
      ws.pooled[i].assign(static_cast<std::size_t>(blk.out_ch) * n_out, S(0));
      ws.pool_src[i].assign(static_cast<std::size_t>(blk.out_ch) * n_out, 0);
      const int pool = blk.pool;
      parallel_for(static_cast<std::size_t>(blk.out_ch), [&](std::size_t m) {
        const S* in_row = ws.act[i].data() + m * n_in;
        S* out_row = ws.pooled[i].data() + m * n_out;
        int* src_row = ws.pool_src[i].data() + m * n_out;
        for (int b = 0; b < batch; ++b) {
          const long in_base = static_cast<long>(b) * plane_in;
          const long out_base = static_cast<long>(b) * plane_out;
          for (int oy = 0; oy < out_side; ++oy) {
            for (int ox = 0; ox < out_side; ++ox) {
              long best_idx = in_base + static_cast<long>(oy * pool) * blk.in_side + ox * pool;
              S best = in_row[best_idx];
              for (int py = 0; py < pool; ++py) {
                for (int px = 0; px < pool; ++px) {
                  const long idx =
                      in_base + static_cast<long>(oy * pool + py) * blk.in_side + ox * pool + px;
                  if (in_row[idx] > best) {
                    best = in_row[idx];
                    best_idx = idx;
                  }
                }
              }
              out_row[out_base + static_cast<long>(oy) * out_side + ox] = best;
              src_row[out_base + static_cast<long>(oy) * out_side + ox] =
                  static_cast<int>(best_idx);
            }
          }
        }
      });
      cur = ws.pooled[i].data();
    }

    // feature-major [C][B*P] -> per-sample flat [B][C*P]
    const Block& last = blocks_.back();
    const long plane_l = static_cast<long>(last.out_side) * last.out_side;
    ws.flat.assign(static_cast<std::size_t>(batch) * flat_dim_, S(0));
    for (int b = 0; b < batch; ++b) {
      S* dst = ws.flat.data() + static_cast<long>(b) * flat_dim_;
      for (int c = 0; c < last.out_ch; ++c) {
        const S* src = ws.pooled.back().data() + static_cast<long>(c) * batch * plane_l +
                       static_cast<long>(b) * plane_l;
        std::copy(src, src + plane_l, dst + static_cast<long>(c) * plane_l);
      }
    }

    // fc1 + ReLU
    const int fc = cfg_.fc_neurons;
    ws.fc1_out.assign(static_cast<std::size_t>(batch) * fc, S(0));
    parallel_for(static_cast<std::size_t>(batch), [&](std::size_t b) {
      S* out = ws.fc1_out.data() + b * fc;
      for (int u = 0; u < fc; ++u) out[u] = fc1_b_[u];
      const S* xrow = ws.flat.data() + b * flat_dim_;
      for (int f = 0; f < flat_dim_; ++f) {
        const S xf = xrow[f];
        if (xf == S(0)) continue;
        const S* wrow = fc1_w_.data() + static_cast<long>(f) * fc;
        for (int u = 0; u < fc; ++u) out[u] += xf * wrow[u];
      }
      for (int u = 0; u < fc; ++u) out[u] = out[u] > S(0) ? out[u] : S(0);
    });

    // fc2 (logits)
    ws.logits.assign(static_cast<std::size_t>(batch) * n_classes_, S(0));
    parallel_for(static_cast<std::size_t>(batch), [&](std::size_t b) {
      S* out = ws.logits.data() + b * n_classes_;
      for (int c = 0; c < n_classes_; ++c) out[c] = fc2_b_[c];
      const S* xrow = ws.fc1_out.data() + b * cfg_.fc_neurons;
      for (int u = 0; u < cfg_.fc_neurons; ++u) {
        const S xu = xrow[u];
        if (xu == S(0)) continue;
        const S* wrow = fc2_w_.data() + static_cast<long>(u) * n_classes_;
        for (int c = 0; c < n_classes_; ++c) out[c] += xu * wrow[c];
      }
    });
  }

  void backward_impl(int batch, Workspace& ws) {
    const int fc = cfg_.fc_neurons;
    const std::size_t n_blocks = blocks_.size();
    // grads_ layout: [convW0, convB0, convW1, convB1, ..., fc1W, fc1B, fc2W, fc2B]
    auto& g_fc2_w = grads_[2 * n_blocks + 2];
    auto& g_fc2_b = grads_[2 * n_blocks + 3];
    auto& g_fc1_w = grads_[2 * n_blocks + 0];
    auto& g_fc1_b = grads_[2 * n_blocks + 1];

    // fc2 gradients
    parallel_for(static_cast<std::size_t>(fc), [&](std::size_t u) {
      S* wrow = g_fc2_w.data() + u * n_classes_;
      for (int c = 0; c < n_classes_; ++c) wrow[c] = S(0);
      for (int b = 0; b < batch; ++b) {
        const S xu = ws.fc1_out[static_cast<long>(b) * fc + u];
        if (xu == S(0)) continue;
        const S* drow = ws.dlogits.data() + static_cast<long>(b) * n_classes_;
        for (int c = 0; c < n_classes_; ++c) wrow[c] += xu * drow[c];
      }
    });
    for (int c = 0; c < n_classes_; ++c) {
      S acc = 0;
      for (int b = 0; b < batch; ++b) acc += ws.dlogits[static_cast<long>(b) * n_classes_ + c];
      g_fc2_b[c] = acc;
    }

    // into fc1 (through its ReLU)
    ws.dfc1.assign(static_cast<std::size_t>(batch) * fc, S(0));
    parallel_for(static_cast<std::size_t>(batch), [&](std::size_t b) {
      S* drow = ws.dfc1.data() + b * fc;
      const S* dlog = ws.dlogits.data() + b * n_classes_;
      const S* act = ws.fc1_out.data() + b * fc;
      for (int u = 0; u < fc; ++u) {
        if (act[u] <= S(0)) {
          drow[u] = S(0);
          continue;
        }
        const S* wrow = fc2_w_.data() + static_cast<long>(u) * n_classes_;
        S acc = 0;
        for (int c = 0; c < n_classes_; ++c) acc += wrow[c] * dlog[c];
        drow[u] = acc;
      }
    });

    // fc1 gradients
    parallel_for(static_cast<std::size_t>(flat_dim_), [&](std::size_t f) {
      S* wrow = g_fc1_w.data() + f * fc;
      for (int u = 0; u < fc; ++u) wrow[u] = S(0);
      for (int b = 0; b < batch; ++b) {
        const S xf = ws.flat[static_cast<long>(b) * flat_dim_ + f];
        if (xf == S(0)) continue;
        const S* drow = ws.dfc1.data() + static_cast<long>(b) * fc;
        for (int u = 0; u < fc; ++u) wrow[u] += xf * drow[u];
      }
    });
    for (int u = 0; u < fc; ++u) {
      S acc = 0;
      for (int b = 0; b < batch; ++b) acc += ws.dfc1[static_cast<long>(b) * fc + u];
      g_fc1_b[u] = acc;
    }

    // into the flat features
    ws.dflat.assign(static_cast<std::size_t>(batch) * flat_dim_, S(0));
    parallel_for(static_cast<std::size_t>(batch), [&](std::size_t b) {
      S* drow = ws.dflat.data() + b * flat_dim_;
      const S* dfc1 = ws.dfc1.data() + b * fc;
      for (int f = 0; f < flat_dim_; ++f) {
        const S* wrow = fc1_w_.data() + static_cast<long>(f) * fc;
        S acc = 0;
        for (int u = 0; u < fc; ++u) acc += wrow[u] * dfc1[u];
        drow[f] = acc;
      }
    });

    // per-sample flat -> feature-major dpooled for the last block
    ws.dact.resize(n_blocks);
    ws.dpooled.resize(n_blocks);
    ws.dcol.resize(n_blocks);
    const Block& last = blocks_.back();
    const long plane_l = static_cast<long>(last.out_side) * last.out_side;
    ws.dpooled[n_blocks - 1].assign(static_cast<std::size_t>(last.out_ch) * batch * plane_l,
                                    S(0));
    for (int b = 0; b < batch; ++b) {
      const S* src = ws.dflat.data() + static_cast<long>(b) * flat_dim_;
      for (int c = 0; c < last.out_ch; ++c) {
        S* dst = ws.dpooled[n_blocks - 1].data() + static_cast<long>(c) * batch * plane_l +
                 static_cast<long>(b) * plane_l;
        std::copy(src + static_cast<long>(c) * plane_l, src + static_cast<long>(c + 1) * plane_l,
                  dst);
      }
    }

    for (int i = static_cast<int>(n_blocks) - 1; i >= 0; --i) {
      const Block& blk = blocks_[i];
      const long plane_in = static_cast<long>(blk.in_side) * blk.in_side;
      const long n_in = static_cast<long>(batch) * plane_in;
      const long plane_out = static_cast<long>(blk.out_side) * blk.out_side;
      const long n_out = static_cast<long>(batch) * plane_out;
      const int k_total = blk.in_ch * blk.kernel * blk.kernel;

      // unpool (scatter through the recorded argmax); ReLU mask via act > 0
      ws.dact[i].assign(static_cast<std::size_t>(blk.out_ch) * n_in, S(0));
      parallel_for(static_cast<std::size_t>(blk.out_ch), [&](std::size_t m) {
        const S* dp = ws.dpooled[i].data() + m * n_out;
        const int* src = ws.pool_src[i].data() + m * n_out;
        const S* act = ws.act[i].data() + m * n_in;
        S* da = ws.dact[i].data() + m * n_in;
        for (long n = 0; n < n_out; ++n) {
          const long idx = src[n];
          if (act[idx] > S(0)) da[idx] += dp[n];
        }
      });

      auto& g_w = grads_[2 * static_cast<std::size_t>(i)];
      auto& g_b = grads_[2 * static_cast<std::size_t>(i) + 1];
      detail::gemm_grad_w(ws.dact[i].data(), ws.col[i].data(), g_w.data(), g_b.data(),
                          blk.out_ch, k_total, n_in);

      if (i > 0) {
        ws.dcol[i].assign(static_cast<std::size_t>(k_total) * n_in, S(0));
        detail::gemm_grad_col(blk.w.data(), ws.dact[i].data(), ws.dcol[i].data(), blk.out_ch,
                              k_total, n_in);
        col2im(ws.dcol[i], blk.in_ch, blk.in_side, batch, blk.kernel, ws.dpooled[i - 1]);
      }
    }
  }

  CnnConfig cfg_;
  int n_classes_ = 0;
  int flat_dim_ = 0;
  std::vector<Block> blocks_;
  std::vector<S> fc1_w_, fc1_b_, fc2_w_, fc2_b_;

  std::vector<std::vector<S>> grads_;
  std::vector<std::vector<S>> adam_m_, adam_v_;
  long adam_t_ = 0;
  Workspace train_ws_;
};

}  // namespace aviary
