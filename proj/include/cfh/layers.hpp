#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "cfh/tensor.hpp"

namespace cfh {

enum class Mode { Train, Eval };

struct ParamRef {
  std::string name;
  Tensor* tensor;  // tensor->grad is the accumulation buffer
};

/// A layer owns its parameters and the caches needed for one backward pass.
/// forward() in Train mode records caches; backward() consumes them,
/// accumulates into each parameter's grad buffer, and returns the gradient
/// with respect to the layer input.
class Layer {
 public:
  virtual ~Layer() = default;

  virtual Tensor forward(const Tensor& input, Mode mode) = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;
  virtual std::string kind() const = 0;

  // Trainable parameters; prefix is prepended to each name.
  virtual void collect_params(std::vector<ParamRef>& out, const std::string& prefix) {
    (void)out;
    (void)prefix;
  }
  // Non-trainable state that still serializes (BN running statistics).
  virtual void collect_state(std::vector<ParamRef>& out, const std::string& prefix) {
    (void)out;
    (void)prefix;
  }
};

/// Valid (no-padding) 1-D convolution over [B x C_in x L].
class Conv1D final : public Layer {
 public:
  /// `with_bias = false` is for convolutions immediately followed by BatchNorm,
  /// where a bias is a null direction (the batch-mean subtraction cancels it).
  Conv1D(std::size_t in_channels, std::size_t out_channels, std::size_t kernel_len,
         std::size_t stride = 1, bool with_bias = true);

  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "Conv1D"; }
  void collect_params(std::vector<ParamRef>& out, const std::string& prefix) override;

  void init_weights(std::mt19937_64& rng);
  static std::size_t out_len(std::size_t in_len, std::size_t kernel_len, std::size_t stride);

  std::size_t in_channels() const { return in_channels_; }
  std::size_t out_channels() const { return out_channels_; }
  std::size_t kernel_len() const { return kernel_len_; }
  bool has_bias() const { return with_bias_; }

  Tensor weight;  // [out x in x k]
  Tensor bias;    // [out]

 private:
  std::size_t in_channels_, out_channels_, kernel_len_, stride_;
  bool with_bias_;
  Tensor cached_input_;
};

/// Per-channel batch normalization over batch and time of [B x C x L].
class BatchNorm1D final : public Layer {
 public:
  explicit BatchNorm1D(std::size_t channels, double epsilon = 1e-5, double momentum = 0.1);

  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "BatchNorm1D"; }
  void collect_params(std::vector<ParamRef>& out, const std::string& prefix) override;
  void collect_state(std::vector<ParamRef>& out, const std::string& prefix) override;

  Tensor gamma, beta;
  Tensor running_mean, running_var;
  bool has_running_stats() const { return seen_batch_; }
  void mark_stats_loaded() { seen_batch_ = true; }

 private:
  std::size_t channels_;
  double epsilon_, momentum_;
  bool seen_batch_ = false;
  // Caches for backward.
  Mode cached_mode_ = Mode::Train;
  Tensor cached_input_;
  std::vector<double> batch_mean_, batch_var_;
};

/// Non-overlapping max pooling along the time axis of [B x C x L];
/// a trailing remainder shorter than the pool length is discarded.
class MaxPool1D final : public Layer {
 public:
  explicit MaxPool1D(std::size_t pool_len = 2);

  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "MaxPool1D"; }

 private:
  std::size_t pool_len_;
  std::vector<std::size_t> cached_in_shape_;
  std::vector<std::size_t> argmax_;
};

/// Inverted dropout: surviving activations are scaled by 1/(1-p) in Train,
/// Eval is the identity. The mask RNG is owned by the layer and seeded at
/// construction so a full training run is reproducible.
class Dropout final : public Layer {
 public:
  Dropout(double probability, std::uint64_t seed);

  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "Dropout"; }

  double probability() const { return probability_; }

 private:
  double probability_;
  std::mt19937_64 rng_;
  std::vector<double> mask_;
};

/// Fully connected layer over [B x F_in].
class Dense final : public Layer {
 public:
  Dense(std::size_t in_features, std::size_t out_features);

  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "Dense"; }
  void collect_params(std::vector<ParamRef>& out, const std::string& prefix) override;

  void init_weights(std::mt19937_64& rng);

  Tensor weight;  // [out x in]
  Tensor bias;    // [out]

 private:
  std::size_t in_features_, out_features_;
  Tensor cached_input_;
};

class ReLU final : public Layer {
 public:
  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "ReLU"; }

 private:
  Tensor cached_input_;
};

/// Single-layer LSTM over [B x T x F] with gate order (input, forget,
/// candidate, output). Returns the full hidden sequence [B x T x H];
/// backward runs truncated-nowhere BPTT over all T steps.
class LSTM final : public Layer {
 public:
  LSTM(std::size_t input_size, std::size_t hidden_size);

  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "LSTM"; }
  void collect_params(std::vector<ParamRef>& out, const std::string& prefix) override;

  void init_weights(std::mt19937_64& rng);

  std::size_t hidden_size() const { return hidden_size_; }

  Tensor w_input;   // [4H x F]
  Tensor w_hidden;  // [4H x H]
  Tensor bias;      // [4H], forget-gate slice initialized to 1

 private:
  std::size_t input_size_, hidden_size_;
  // Per-step caches, laid out [B x T x H] (gates) and [B x (T+1) x H] (states).
  Tensor cached_input_;
  std::vector<double> gate_i_, gate_f_, gate_g_, gate_o_;
  std::vector<double> cell_, hidden_, tanh_cell_;
};

/// Swaps the last two axes of a rank-3 tensor ([B x C x L] <-> [B x L x C]).
class Transpose final : public Layer {
 public:
  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "Transpose"; }

 private:
  std::vector<std::size_t> cached_in_shape_;
};

/// Collapses [B x ...] to [B x F].
class Flatten final : public Layer {
 public:
  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "Flatten"; }

 private:
  std::vector<std::size_t> cached_in_shape_;
};

/// Selects the final timestep of [B x T x H] -> [B x H].
class LastStep final : public Layer {
 public:
  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "LastStep"; }

 private:
  std::vector<std::size_t> cached_in_shape_;
};

/// Ordered stack of layers sharing one forward/backward chain.
class Sequential final : public Layer {
 public:
  Sequential() = default;

  void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }
  std::size_t size() const { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_[i]; }

  Tensor forward(const Tensor& input, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::string kind() const override { return "Sequential"; }
  void collect_params(std::vector<ParamRef>& out, const std::string& prefix) override;
  void collect_state(std::vector<ParamRef>& out, const std::string& prefix) override;

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

}  // namespace cfh
