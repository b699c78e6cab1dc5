#pragma once

#include <memory>
#include <string>
#include <vector>

#include "deepmpc/backend.hpp"
#include "deepmpc/tensor.hpp"

namespace deepmpc {

enum class InitMode {
  secure,  // weights drawn jointly from shared randomness
  seeded,  // weights drawn in the clear from a public seed, input by party 0
};

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
};

class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::string kind() const = 0;
  // Per-sample shapes, without the batch dimension.
  virtual Shape output_shape(const Shape& in) const = 0;
  virtual Tensor forward(Backend& be, const Tensor& x, bool train) = 0;
  // Accumulates parameter gradients; returns dL/dx unless need_input_grad
  // is false, in which case the result is empty.
  virtual Tensor backward(Backend& be, const Tensor& grad, bool need_input_grad) = 0;
  virtual std::vector<Param*> params() { return {}; }
  virtual void init(Backend&, InitMode, Rng&) {}
};

class Dense : public Layer {
 public:
  Dense(std::size_t in, std::size_t out);
  std::string kind() const override { return "dense"; }
  Shape output_shape(const Shape& in) const override;
  Tensor forward(Backend& be, const Tensor& x, bool train) override;
  Tensor backward(Backend& be, const Tensor& grad, bool need_input_grad) override;
  std::vector<Param*> params() override { return {&w_, &b_}; }
  void init(Backend& be, InitMode mode, Rng& rng) override;

  Param& weight() { return w_; }  // in × out
  Param& bias() { return b_; }

 private:
  std::size_t in_, out_;
  Param w_, b_;
  Tensor x_;
};

struct ConvSpec {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;
};

class Conv2d : public Layer {
 public:
  explicit Conv2d(const ConvSpec& spec);
  std::string kind() const override { return "conv2d"; }
  Shape output_shape(const Shape& in) const override;
  Tensor forward(Backend& be, const Tensor& x, bool train) override;
  Tensor backward(Backend& be, const Tensor& grad, bool need_input_grad) override;
  std::vector<Param*> params() override { return {&k_, &b_}; }
  void init(Backend& be, InitMode mode, Rng& rng) override;

  Param& kernel() { return k_; }  // out × (in·kh·kw)
  Param& bias() { return b_; }

 private:
  void prepare(const Shape& in_full);

  ConvSpec spec_;
  Param k_, b_;
  Shape in_shape_;
  std::size_t oh_ = 0, ow_ = 0;
  std::vector<std::size_t> col_idx_;  // im2col gather, rows × (B·oh·ow)
  std::vector<std::size_t> to_nchw_;  // (oc × B·P) -> (B, oc, P)
  std::vector<std::size_t> to_cmaj_;  // (B, oc, P) -> (oc × B·P)
  ArithVec cols_;
};

class Relu : public Layer {
 public:
  std::string kind() const override { return "relu"; }
  Shape output_shape(const Shape& in) const override { return in; }
  Tensor forward(Backend& be, const Tensor& x, bool train) override;
  Tensor backward(Backend& be, const Tensor& grad, bool need_input_grad) override;

 private:
  ArithVec negative_;  // saved [x < 0]
  bool saved_ = false;
};

class MaxPool : public Layer {
 public:
  MaxPool(std::size_t window, std::size_t stride);
  explicit MaxPool(std::size_t window) : MaxPool(window, window) {}
  std::string kind() const override { return "maxpool"; }
  Shape output_shape(const Shape& in) const override;
  Tensor forward(Backend& be, const Tensor& x, bool train) override;
  Tensor backward(Backend& be, const Tensor& grad, bool need_input_grad) override;

 private:
  std::size_t window_, stride_;
  Shape in_shape_;
  // Input index of each window element, per output.
  std::vector<std::vector<std::size_t>> leaves_;
  // Per tree level, the selection bits of each compared pair.
  std::vector<ArithVec> select_;
  std::vector<std::size_t> level_sizes_;
};

class Dropout : public Layer {
 public:
  explicit Dropout(double rate);
  std::string kind() const override { return "dropout"; }
  Shape output_shape(const Shape& in) const override { return in; }
  Tensor forward(Backend& be, const Tensor& x, bool train) override;
  Tensor backward(Backend& be, const Tensor& grad, bool need_input_grad) override;

 private:
  ArithVec apply(Backend& be, const ArithVec& v) const;

  double rate_;
  ArithVec mask_;
  bool active_ = false;
};

class BatchNorm : public Layer {
 public:
  explicit BatchNorm(std::size_t channels, double eps = 1.0 / 4096);
  std::string kind() const override { return "batchnorm"; }
  Shape output_shape(const Shape& in) const override { return in; }
  Tensor forward(Backend& be, const Tensor& x, bool train) override;
  Tensor backward(Backend& be, const Tensor& grad, bool need_input_grad) override;
  std::vector<Param*> params() override { return {&gamma_, &beta_}; }
  void init(Backend& be, InitMode mode, Rng& rng) override;

 private:
  // Per-channel mean of values grouped channel-major (C × n).
  ArithVec channel_mean(Backend& be, const ArithVec& grouped, std::size_t n) const;
  ArithVec broadcast(const ArithVec& per_channel, std::size_t n) const;

  std::size_t channels_;
  double eps_;
  Param gamma_, beta_;
  Shape shape_;
  std::vector<std::size_t> to_group_, from_group_;
  ArithVec xhat_, inv_;
};

class Flatten : public Layer {
 public:
  std::string kind() const override { return "flatten"; }
  Shape output_shape(const Shape& in) const override { return {numel(in)}; }
  Tensor forward(Backend& be, const Tensor& x, bool train) override;
  Tensor backward(Backend& be, const Tensor& grad, bool need_input_grad) override;

 private:
  Shape in_shape_;
};

struct SoftmaxResult {
  Tensor grad;     // p - y
  Tensor probs;
  ArithVec loss;   // summed over the batch, natural log; empty if not requested
};

SoftmaxResult softmax_xent_grad(Backend& be, const Tensor& logits,
                                const ArithVec& onehot, bool with_loss);

// Rowwise maximum of a rows×cols matrix via a balanced tree.
ArithVec row_max(Backend& be, const ArithVec& m, std::size_t rows, std::size_t cols);

double glorot_bound(std::size_t d_in, std::size_t d_out);
ArithVec glorot_init(Backend& be, std::size_t d_in, std::size_t d_out,
                     std::size_t count, InitMode mode, Rng& rng);

std::vector<std::size_t> shuffle_epoch(Rng& rng, std::size_t n);

}  // namespace deepmpc
