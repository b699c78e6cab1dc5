#pragma once

#include <memory>
#include <string>
#include <vector>

#include "deepmpc/layers.hpp"

namespace deepmpc {

class Model {
 public:
  Model(std::string name, Shape input_shape, std::size_t classes);

  void add(std::unique_ptr<Layer> layer);
  const std::string& name() const { return name_; }
  const Shape& input_shape() const { return input_shape_; }
  std::size_t classes() const { return classes_; }
  std::size_t size() const { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_.at(i); }

  // Per-sample shape after each layer.
  std::vector<Shape> shape_trace() const;
  void init(Backend& be, InitMode mode, Rng& rng);
  Tensor forward(Backend& be, const Tensor& x, bool train);
  // Backpropagates a logits gradient; the input gradient is not formed.
  void backward(Backend& be, const Tensor& grad);
  std::vector<Param*> params();
  std::size_t param_count();

 private:
  std::string name_;
  Shape input_shape_;
  std::size_t classes_;
  std::vector<std::unique_ptr<Layer>> layers_;
};

// One of A, B, C, D, alexnet. Dropout only affects C.
Model build_model(const std::string& name, bool dropout = false);
std::vector<std::string> model_names();

}  // namespace deepmpc
