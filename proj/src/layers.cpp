#include "cfh/layers.hpp"

#include <algorithm>
#include <cmath>

namespace cfh {

namespace {

void require_rank(const Tensor& t, std::size_t rank, const std::string& who) {
  if (t.rank() != rank) {
    throw ShapeError(who + ": expected rank-" + std::to_string(rank) + " input, got " +
                     t.shape_str());
  }
}

double uniform_sym(std::mt19937_64& rng, double bound) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  return dist(rng);
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

// ---------------------------------------------------------------- Conv1D

Conv1D::Conv1D(std::size_t in_channels, std::size_t out_channels, std::size_t kernel_len,
               std::size_t stride, bool with_bias)
    : weight({out_channels, in_channels, kernel_len}),
      bias({out_channels}),
      in_channels_(in_channels),
      out_channels_(out_channels),
      kernel_len_(kernel_len),
      stride_(stride),
      with_bias_(with_bias) {
  if (kernel_len_ == 0 || stride_ == 0) throw ConfigError("Conv1D: kernel length and stride must be >= 1");
  weight.ensure_grad();
  if (with_bias_) bias.ensure_grad();
}

std::size_t Conv1D::out_len(std::size_t in_len, std::size_t kernel_len, std::size_t stride) {
  return (in_len - kernel_len) / stride + 1;
}

void Conv1D::init_weights(std::mt19937_64& rng) {
  // Fan-in-scaled uniform; biases stay zero.
  const double bound = std::sqrt(1.0 / static_cast<double>(in_channels_ * kernel_len_));
  for (double& w : weight.data) w = uniform_sym(rng, bound);
  std::fill(bias.data.begin(), bias.data.end(), 0.0);
}

Tensor Conv1D::forward(const Tensor& input, Mode mode) {
  (void)mode;
  require_rank(input, 3, "Conv1D");
  const std::size_t batch = input.dim(0), chans = input.dim(1), len = input.dim(2);
  if (chans != in_channels_) {
    throw ShapeError("Conv1D: input has " + std::to_string(chans) + " channels, layer expects " +
                     std::to_string(in_channels_));
  }
  if (len < kernel_len_) {
    throw ShapeError("Conv1D: input length " + std::to_string(len) +
                     " shorter than kernel length " + std::to_string(kernel_len_));
  }
  const std::size_t len_out = out_len(len, kernel_len_, stride_);
  Tensor out({batch, out_channels_, len_out});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < out_channels_; ++o) {
      double* dst = &out.at(b, o, 0);
      for (std::size_t t = 0; t < len_out; ++t) dst[t] = bias.at(o);
      for (std::size_t c = 0; c < chans; ++c) {
        const double* src = &input.at(b, c, 0);
        const double* w = &weight.at(o, c, 0);
        for (std::size_t t = 0; t < len_out; ++t) {
          const double* x = src + t * stride_;
          double acc = 0.0;
          for (std::size_t k = 0; k < kernel_len_; ++k) acc += w[k] * x[k];
          dst[t] += acc;
        }
      }
    }
  }
  cached_input_ = input;
  return out;
}

Tensor Conv1D::backward(const Tensor& grad_out) {
  const Tensor& input = cached_input_;
  const std::size_t batch = input.dim(0), chans = input.dim(1), len = input.dim(2);
  const std::size_t len_out = grad_out.dim(2);
  Tensor grad_in({batch, chans, len});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < out_channels_; ++o) {
      const double* go = &grad_out.at(b, o, 0);
      if (with_bias_) {
        for (std::size_t t = 0; t < len_out; ++t) bias.grad[o] += go[t];
      }
      for (std::size_t c = 0; c < chans; ++c) {
        const double* src = &input.at(b, c, 0);
        const double* w = &weight.at(o, c, 0);
        double* wg = &weight.grad[(o * chans + c) * kernel_len_];
        double* gi = &grad_in.at(b, c, 0);
        for (std::size_t t = 0; t < len_out; ++t) {
          const double g = go[t];
          const std::size_t base = t * stride_;
          for (std::size_t k = 0; k < kernel_len_; ++k) {
            wg[k] += g * src[base + k];
            gi[base + k] += g * w[k];
          }
        }
      }
    }
  }
  return grad_in;
}

void Conv1D::collect_params(std::vector<ParamRef>& out, const std::string& prefix) {
  out.push_back({prefix + ".weight", &weight});
  if (with_bias_) out.push_back({prefix + ".bias", &bias});
}

// ------------------------------------------------------------ BatchNorm1D

BatchNorm1D::BatchNorm1D(std::size_t channels, double epsilon, double momentum)
    : gamma({channels}),
      beta({channels}),
      running_mean({channels}),
      running_var({channels}),
      channels_(channels),
      epsilon_(epsilon),
      momentum_(momentum) {
  if (epsilon_ <= 0.0) throw ConfigError("BatchNorm1D: epsilon must be > 0");
  std::fill(gamma.data.begin(), gamma.data.end(), 1.0);
  std::fill(running_var.data.begin(), running_var.data.end(), 1.0);
  gamma.ensure_grad();
  beta.ensure_grad();
}

Tensor BatchNorm1D::forward(const Tensor& input, Mode mode) {
  require_rank(input, 3, "BatchNorm1D");
  const std::size_t batch = input.dim(0), chans = input.dim(1), len = input.dim(2);
  if (chans != channels_) {
    throw ShapeError("BatchNorm1D: input has " + std::to_string(chans) +
                     " channels, layer expects " + std::to_string(channels_));
  }
  Tensor out({batch, chans, len});
  const double n = static_cast<double>(batch * len);
  if (mode == Mode::Train) {
    batch_mean_.assign(chans, 0.0);
    batch_var_.assign(chans, 0.0);
    for (std::size_t c = 0; c < chans; ++c) {
      double sum = 0.0;
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t t = 0; t < len; ++t) sum += input.at(b, c, t);
      const double mean = sum / n;
      double var = 0.0;
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t t = 0; t < len; ++t) {
          const double d = input.at(b, c, t) - mean;
          var += d * d;
        }
      var /= n;
      batch_mean_[c] = mean;
      batch_var_[c] = var;
      running_mean.data[c] = (1.0 - momentum_) * running_mean.data[c] + momentum_ * mean;
      running_var.data[c] = (1.0 - momentum_) * running_var.data[c] + momentum_ * var;
      const double inv_std = 1.0 / std::sqrt(var + epsilon_);
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t t = 0; t < len; ++t)
          out.at(b, c, t) = gamma.data[c] * (input.at(b, c, t) - mean) * inv_std + beta.data[c];
    }
    seen_batch_ = true;
    cached_mode_ = Mode::Train;
    cached_input_ = input;
  } else {
    if (!seen_batch_) {
      throw Error("BatchNorm1D: Eval-mode forward before any Train-mode call (no running statistics)");
    }
    for (std::size_t c = 0; c < chans; ++c) {
      const double inv_std = 1.0 / std::sqrt(running_var.data[c] + epsilon_);
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t t = 0; t < len; ++t)
          out.at(b, c, t) =
              gamma.data[c] * (input.at(b, c, t) - running_mean.data[c]) * inv_std + beta.data[c];
    }
    cached_mode_ = Mode::Eval;
    cached_input_ = input;
  }
  return out;
}

Tensor BatchNorm1D::backward(const Tensor& grad_out) {
  const Tensor& input = cached_input_;
  const std::size_t batch = input.dim(0), chans = input.dim(1), len = input.dim(2);
  if (cached_mode_ == Mode::Eval) {
    // Running statistics are constants, so normalization is a per-channel
    // affine map.
    Tensor grad_in({batch, chans, len});
    for (std::size_t c = 0; c < chans; ++c) {
      const double inv_std = 1.0 / std::sqrt(running_var.data[c] + epsilon_);
      double sum_g = 0.0, sum_gx = 0.0;
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t t = 0; t < len; ++t) {
          const double g = grad_out.at(b, c, t);
          sum_g += g;
          sum_gx += g * (input.at(b, c, t) - running_mean.data[c]) * inv_std;
        }
      gamma.grad[c] += sum_gx;
      beta.grad[c] += sum_g;
      const double scale = gamma.data[c] * inv_std;
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t t = 0; t < len; ++t)
          grad_in.at(b, c, t) = grad_out.at(b, c, t) * scale;
    }
    return grad_in;
  }
  const double n = static_cast<double>(batch * len);
  Tensor grad_in({batch, chans, len});
  for (std::size_t c = 0; c < chans; ++c) {
    const double mean = batch_mean_[c];
    const double inv_std = 1.0 / std::sqrt(batch_var_[c] + epsilon_);
    double sum_g = 0.0, sum_gx = 0.0;
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t t = 0; t < len; ++t) {
        const double g = grad_out.at(b, c, t);
        const double xn = (input.at(b, c, t) - mean) * inv_std;
        sum_g += g;
        sum_gx += g * xn;
      }
    gamma.grad[c] += sum_gx;
    beta.grad[c] += sum_g;
    const double gm = gamma.data[c];
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t t = 0; t < len; ++t) {
        const double g = grad_out.at(b, c, t);
        const double xn = (input.at(b, c, t) - mean) * inv_std;
        grad_in.at(b, c, t) = gm * inv_std * (g - sum_g / n - xn * sum_gx / n);
      }
  }
  return grad_in;
}

void BatchNorm1D::collect_params(std::vector<ParamRef>& out, const std::string& prefix) {
  out.push_back({prefix + ".gamma", &gamma});
  out.push_back({prefix + ".beta", &beta});
}

void BatchNorm1D::collect_state(std::vector<ParamRef>& out, const std::string& prefix) {
  out.push_back({prefix + ".running_mean", &running_mean});
  out.push_back({prefix + ".running_var", &running_var});
}

// -------------------------------------------------------------- MaxPool1D

MaxPool1D::MaxPool1D(std::size_t pool_len) : pool_len_(pool_len) {
  if (pool_len_ < 1) throw ConfigError("MaxPool1D: pool length must be >= 1");
}

Tensor MaxPool1D::forward(const Tensor& input, Mode mode) {
  (void)mode;
  require_rank(input, 3, "MaxPool1D");
  const std::size_t batch = input.dim(0), chans = input.dim(1), len = input.dim(2);
  const std::size_t len_out = len / pool_len_;
  if (len_out == 0) {
    throw ShapeError("MaxPool1D: input length " + std::to_string(len) +
                     " shorter than pool length " + std::to_string(pool_len_));
  }
  Tensor out({batch, chans, len_out});
  cached_in_shape_ = input.shape;
  argmax_.assign(batch * chans * len_out, 0);
  std::size_t idx = 0;
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t c = 0; c < chans; ++c)
      for (std::size_t t = 0; t < len_out; ++t, ++idx) {
        const std::size_t base = t * pool_len_;
        std::size_t best = base;
        double best_v = input.at(b, c, base);
        for (std::size_t k = 1; k < pool_len_; ++k) {
          const double v = input.at(b, c, base + k);
          if (v > best_v) {
            best_v = v;
            best = base + k;
          }
        }
        out.at(b, c, t) = best_v;
        argmax_[idx] = best;
      }
  return out;
}

Tensor MaxPool1D::backward(const Tensor& grad_out) {
  Tensor grad_in(cached_in_shape_);
  const std::size_t batch = grad_out.dim(0), chans = grad_out.dim(1), len_out = grad_out.dim(2);
  std::size_t idx = 0;
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t c = 0; c < chans; ++c)
      for (std::size_t t = 0; t < len_out; ++t, ++idx)
        grad_in.at(b, c, argmax_[idx]) += grad_out.at(b, c, t);
  return grad_in;
}

// ---------------------------------------------------------------- Dropout

Dropout::Dropout(double probability, std::uint64_t seed) : probability_(probability), rng_(seed) {
  if (probability_ < 0.0 || probability_ >= 1.0) {
    throw ConfigError("Dropout: probability must lie in [0,1)");
  }
}

Tensor Dropout::forward(const Tensor& input, Mode mode) {
  if (mode == Mode::Eval || probability_ == 0.0) {
    mask_.assign(input.size(), 1.0);
    return input;
  }
  const double keep = 1.0 - probability_;
  const double scale = 1.0 / keep;
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  mask_.resize(input.size());
  Tensor out(input.shape);
  for (std::size_t i = 0; i < input.size(); ++i) {
    mask_[i] = dist(rng_) < keep ? scale : 0.0;
    out.data[i] = input.data[i] * mask_[i];
  }
  return out;
}

Tensor Dropout::backward(const Tensor& grad_out) {
  Tensor grad_in(grad_out.shape);
  for (std::size_t i = 0; i < grad_out.size(); ++i) grad_in.data[i] = grad_out.data[i] * mask_[i];
  return grad_in;
}

// ------------------------------------------------------------------ Dense

Dense::Dense(std::size_t in_features, std::size_t out_features)
    : weight({out_features, in_features}),
      bias({out_features}),
      in_features_(in_features),
      out_features_(out_features) {
  weight.ensure_grad();
  bias.ensure_grad();
}

void Dense::init_weights(std::mt19937_64& rng) {
  const double bound = std::sqrt(1.0 / static_cast<double>(in_features_));
  for (double& w : weight.data) w = uniform_sym(rng, bound);
  std::fill(bias.data.begin(), bias.data.end(), 0.0);
}

Tensor Dense::forward(const Tensor& input, Mode mode) {
  (void)mode;
  require_rank(input, 2, "Dense");
  const std::size_t batch = input.dim(0);
  if (input.dim(1) != in_features_) {
    throw ShapeError("Dense: input width " + std::to_string(input.dim(1)) + ", layer expects " +
                     std::to_string(in_features_));
  }
  Tensor out({batch, out_features_});
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t o = 0; o < out_features_; ++o) {
      double acc = bias.data[o];
      const double* w = &weight.at(o, 0);
      const double* x = &input.at(b, 0);
      for (std::size_t i = 0; i < in_features_; ++i) acc += w[i] * x[i];
      out.at(b, o) = acc;
    }
  cached_input_ = input;
  return out;
}

Tensor Dense::backward(const Tensor& grad_out) {
  const Tensor& input = cached_input_;
  const std::size_t batch = input.dim(0);
  Tensor grad_in({batch, in_features_});
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t o = 0; o < out_features_; ++o) {
      const double g = grad_out.at(b, o);
      bias.grad[o] += g;
      double* wg = &weight.grad[o * in_features_];
      const double* w = &weight.at(o, 0);
      const double* x = &input.at(b, 0);
      double* gi = &grad_in.at(b, 0);
      for (std::size_t i = 0; i < in_features_; ++i) {
        wg[i] += g * x[i];
        gi[i] += g * w[i];
      }
    }
  return grad_in;
}

void Dense::collect_params(std::vector<ParamRef>& out, const std::string& prefix) {
  out.push_back({prefix + ".weight", &weight});
  out.push_back({prefix + ".bias", &bias});
}

// ------------------------------------------------------------------- ReLU

Tensor ReLU::forward(const Tensor& input, Mode mode) {
  (void)mode;
  Tensor out(input.shape);
  for (std::size_t i = 0; i < input.size(); ++i) out.data[i] = std::max(0.0, input.data[i]);
  cached_input_ = input;
  return out;
}

Tensor ReLU::backward(const Tensor& grad_out) {
  Tensor grad_in(grad_out.shape);
  for (std::size_t i = 0; i < grad_out.size(); ++i)
    grad_in.data[i] = cached_input_.data[i] > 0.0 ? grad_out.data[i] : 0.0;
  return grad_in;
}

// ------------------------------------------------------------------- LSTM

LSTM::LSTM(std::size_t input_size, std::size_t hidden_size)
    : w_input({4 * hidden_size, input_size}),
      w_hidden({4 * hidden_size, hidden_size}),
      bias({4 * hidden_size}),
      input_size_(input_size),
      hidden_size_(hidden_size) {
  w_input.ensure_grad();
  w_hidden.ensure_grad();
  bias.ensure_grad();
}

void LSTM::init_weights(std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_size_));
  for (double& w : w_input.data) w = uniform_sym(rng, bound);
  for (double& w : w_hidden.data) w = uniform_sym(rng, bound);
  std::fill(bias.data.begin(), bias.data.end(), 0.0);
  // Forget-gate bias 1 keeps early cell state alive on short sequences.
  for (std::size_t h = 0; h < hidden_size_; ++h) bias.data[hidden_size_ + h] = 1.0;
}

Tensor LSTM::forward(const Tensor& input, Mode mode) {
  (void)mode;
  require_rank(input, 3, "LSTM");
  const std::size_t batch = input.dim(0), steps = input.dim(1), feats = input.dim(2);
  if (steps == 0) throw ShapeError("LSTM: empty sequence (T = 0)");
  if (feats != input_size_) {
    throw ShapeError("LSTM: feature size " + std::to_string(feats) + ", layer expects " +
                     std::to_string(input_size_));
  }
  const std::size_t H = hidden_size_;
  cached_input_ = input;
  gate_i_.assign(batch * steps * H, 0.0);
  gate_f_.assign(batch * steps * H, 0.0);
  gate_g_.assign(batch * steps * H, 0.0);
  gate_o_.assign(batch * steps * H, 0.0);
  tanh_cell_.assign(batch * steps * H, 0.0);
  cell_.assign(batch * (steps + 1) * H, 0.0);
  hidden_.assign(batch * (steps + 1) * H, 0.0);

  Tensor out({batch, steps, H});
  std::vector<double> pre(4 * H);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = 0; t < steps; ++t) {
      const double* x = &input.at(b, t, 0);
      const double* h_prev = &hidden_[(b * (steps + 1) + t) * H];
      const double* c_prev = &cell_[(b * (steps + 1) + t) * H];
      for (std::size_t r = 0; r < 4 * H; ++r) {
        double acc = bias.data[r];
        const double* wi = &w_input.at(r, 0);
        for (std::size_t f = 0; f < input_size_; ++f) acc += wi[f] * x[f];
        const double* wh = &w_hidden.at(r, 0);
        for (std::size_t h = 0; h < H; ++h) acc += wh[h] * h_prev[h];
        pre[r] = acc;
      }
      const std::size_t at = (b * steps + t) * H;
      double* h_next = &hidden_[(b * (steps + 1) + t + 1) * H];
      double* c_next = &cell_[(b * (steps + 1) + t + 1) * H];
      for (std::size_t h = 0; h < H; ++h) {
        const double gi = sigmoid(pre[h]);
        const double gf = sigmoid(pre[H + h]);
        const double gg = std::tanh(pre[2 * H + h]);
        const double go = sigmoid(pre[3 * H + h]);
        const double c = gf * c_prev[h] + gi * gg;
        const double tc = std::tanh(c);
        gate_i_[at + h] = gi;
        gate_f_[at + h] = gf;
        gate_g_[at + h] = gg;
        gate_o_[at + h] = go;
        tanh_cell_[at + h] = tc;
        c_next[h] = c;
        h_next[h] = go * tc;
        out.at(b, t, h) = h_next[h];
      }
    }
  }
  return out;
}

Tensor LSTM::backward(const Tensor& grad_out) {
  const Tensor& input = cached_input_;
  const std::size_t batch = input.dim(0), steps = input.dim(1);
  const std::size_t H = hidden_size_;
  Tensor grad_in({batch, steps, input_size_});
  std::vector<double> dh(H), dc(H), dpre(4 * H);
  for (std::size_t b = 0; b < batch; ++b) {
    std::fill(dh.begin(), dh.end(), 0.0);
    std::fill(dc.begin(), dc.end(), 0.0);
    for (std::size_t t = steps; t-- > 0;) {
      const std::size_t at = (b * steps + t) * H;
      const double* c_prev = &cell_[(b * (steps + 1) + t) * H];
      const double* h_prev = &hidden_[(b * (steps + 1) + t) * H];
      const double* x = &input.at(b, t, 0);
      for (std::size_t h = 0; h < H; ++h) {
        const double gi = gate_i_[at + h], gf = gate_f_[at + h];
        const double gg = gate_g_[at + h], go = gate_o_[at + h];
        const double tc = tanh_cell_[at + h];
        const double dh_t = dh[h] + grad_out.at(b, t, h);
        const double dc_t = dc[h] + dh_t * go * (1.0 - tc * tc);
        dpre[h] = dc_t * gg * gi * (1.0 - gi);
        dpre[H + h] = dc_t * c_prev[h] * gf * (1.0 - gf);
        dpre[2 * H + h] = dc_t * gi * (1.0 - gg * gg);
        dpre[3 * H + h] = dh_t * tc * go * (1.0 - go);
        dc[h] = dc_t * gf;
      }
      std::fill(dh.begin(), dh.end(), 0.0);
      double* gx = &grad_in.at(b, t, 0);
      for (std::size_t r = 0; r < 4 * H; ++r) {
        const double g = dpre[r];
        if (g == 0.0) continue;
        bias.grad[r] += g;
        double* wig = &w_input.grad[r * input_size_];
        const double* wi = &w_input.at(r, 0);
        for (std::size_t f = 0; f < input_size_; ++f) {
          wig[f] += g * x[f];
          gx[f] += g * wi[f];
        }
        double* whg = &w_hidden.grad[r * H];
        const double* wh = &w_hidden.at(r, 0);
        for (std::size_t h = 0; h < H; ++h) {
          whg[h] += g * h_prev[h];
          dh[h] += g * wh[h];
        }
      }
    }
  }
  return grad_in;
}

void LSTM::collect_params(std::vector<ParamRef>& out, const std::string& prefix) {
  out.push_back({prefix + ".w_input", &w_input});
  out.push_back({prefix + ".w_hidden", &w_hidden});
  out.push_back({prefix + ".bias", &bias});
}

// -------------------------------------------------- shape-only adapters

Tensor Transpose::forward(const Tensor& input, Mode mode) {
  (void)mode;
  require_rank(input, 3, "Transpose");
  cached_in_shape_ = input.shape;
  const std::size_t a = input.dim(0), b = input.dim(1), c = input.dim(2);
  Tensor out({a, c, b});
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t j = 0; j < b; ++j)
      for (std::size_t k = 0; k < c; ++k) out.at(i, k, j) = input.at(i, j, k);
  return out;
}

Tensor Transpose::backward(const Tensor& grad_out) {
  const std::size_t a = cached_in_shape_[0], b = cached_in_shape_[1], c = cached_in_shape_[2];
  Tensor grad_in(cached_in_shape_);
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t j = 0; j < b; ++j)
      for (std::size_t k = 0; k < c; ++k) grad_in.at(i, j, k) = grad_out.at(i, k, j);
  return grad_in;
}

Tensor Flatten::forward(const Tensor& input, Mode mode) {
  (void)mode;
  cached_in_shape_ = input.shape;
  const std::size_t batch = input.dim(0);
  return Tensor({batch, input.size() / batch}, input.data);
}

Tensor Flatten::backward(const Tensor& grad_out) {
  return Tensor(cached_in_shape_, grad_out.data);
}

Tensor LastStep::forward(const Tensor& input, Mode mode) {
  (void)mode;
  require_rank(input, 3, "LastStep");
  cached_in_shape_ = input.shape;
  const std::size_t batch = input.dim(0), steps = input.dim(1), width = input.dim(2);
  Tensor out({batch, width});
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t h = 0; h < width; ++h) out.at(b, h) = input.at(b, steps - 1, h);
  return out;
}

Tensor LastStep::backward(const Tensor& grad_out) {
  Tensor grad_in(cached_in_shape_);
  const std::size_t batch = cached_in_shape_[0], steps = cached_in_shape_[1],
                    width = cached_in_shape_[2];
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t h = 0; h < width; ++h) grad_in.at(b, steps - 1, h) = grad_out.at(b, h);
  return grad_in;
}

// ------------------------------------------------------------- Sequential

Tensor Sequential::forward(const Tensor& input, Mode mode) {
  Tensor x = input;
  for (auto& l : layers_) x = l->forward(x, mode);
  return x;
}

Tensor Sequential::backward(const Tensor& grad_out) {
  Tensor g = grad_out;
  for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g);
  return g;
}

void Sequential::collect_params(std::vector<ParamRef>& out, const std::string& prefix) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i]->collect_params(out, prefix + "." + std::to_string(i) + "." + layers_[i]->kind());
  }
}

void Sequential::collect_state(std::vector<ParamRef>& out, const std::string& prefix) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i]->collect_state(out, prefix + "." + std::to_string(i) + "." + layers_[i]->kind());
  }
}

}  // namespace cfh
