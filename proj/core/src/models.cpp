#include "deepmpc/models.hpp"

namespace deepmpc {

Model::Model(std::string name, Shape input_shape, std::size_t classes)
    : name_(std::move(name)), input_shape_(std::move(input_shape)), classes_(classes) {}

void Model::add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }

std::vector<Shape> Model::shape_trace() const {
  std::vector<Shape> out;
  Shape s = input_shape_;
  for (const auto& l : layers_) {
    s = l->output_shape(s);
    out.push_back(s);
  }
  return out;
}

void Model::init(Backend& be, InitMode mode, Rng& rng) {
  for (auto& l : layers_) l->init(be, mode, rng);
}

Tensor Model::forward(Backend& be, const Tensor& x, bool train) {
  Shape sample(x.shape.begin() + (x.shape.empty() ? 0 : 1), x.shape.end());
  if (sample != input_shape_)
    throw ShapeError(name_ + " expects samples of shape " + shape_str(input_shape_) +
                     ", got " + shape_str(sample));
  Tensor h = x;
  for (auto& l : layers_) h = l->forward(be, h, train);
  return h;
}

void Model::backward(Backend& be, const Tensor& grad) {
  Tensor g = grad;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    // Layers below the first parameterised one need no gradient.
    bool below = false;
    for (std::size_t j = 0; j < i; ++j)
      if (!layers_[j]->params().empty()) below = true;
    g = layers_[i]->backward(be, g, below);
    if (!below) break;
  }
}

std::vector<Param*> Model::params() {
  std::vector<Param*> out;
  for (auto& l : layers_)
    for (Param* p : l->params()) out.push_back(p);
  return out;
}

std::size_t Model::param_count() {
  std::size_t n = 0;
  for (Param* p : params()) n += numel(p->value.shape);
  return n;
}

namespace {

std::unique_ptr<Layer> conv(std::size_t in, std::size_t out, std::size_t k,
                            std::size_t stride, std::size_t pad) {
  return std::make_unique<Conv2d>(ConvSpec{in, out, k, stride, pad});
}

std::unique_ptr<Layer> dense(std::size_t in, std::size_t out) {
  return std::make_unique<Dense>(in, out);
}

std::unique_ptr<Layer> relu() { return std::make_unique<Relu>(); }

}  // namespace

std::vector<std::string> model_names() { return {"A", "B", "C", "D", "alexnet"}; }

Model build_model(const std::string& name, bool dropout) {
  if (name == "A") {
    Model m("A", {1, 28, 28}, 10);
    m.add(std::make_unique<Flatten>());
    m.add(dense(784, 128));
    m.add(relu());
    m.add(dense(128, 128));
    m.add(relu());
    m.add(dense(128, 10));
    return m;
  }
  if (name == "B") {
    Model m("B", {1, 28, 28}, 10);
    m.add(conv(1, 16, 5, 1, 2));
    m.add(relu());
    m.add(std::make_unique<MaxPool>(2));
    m.add(conv(16, 16, 5, 1, 2));
    m.add(relu());
    m.add(std::make_unique<MaxPool>(2));
    m.add(std::make_unique<Flatten>());
    m.add(dense(16 * 7 * 7, 100));
    m.add(relu());
    m.add(dense(100, 10));
    return m;
  }
  if (name == "C") {
    Model m("C", {1, 28, 28}, 10);
    m.add(conv(1, 20, 5, 1, 0));
    m.add(relu());
    m.add(std::make_unique<MaxPool>(2));
    m.add(conv(20, 50, 5, 1, 0));
    m.add(relu());
    m.add(std::make_unique<MaxPool>(2));
    m.add(std::make_unique<Flatten>());
    if (dropout) m.add(std::make_unique<Dropout>(0.5));
    m.add(dense(50 * 4 * 4, 100));
    m.add(relu());
    m.add(dense(100, 10));
    return m;
  }
  if (name == "D") {
    Model m("D", {1, 28, 28}, 10);
    m.add(conv(1, 5, 5, 2, 2));
    m.add(relu());
    m.add(std::make_unique<Flatten>());
    m.add(dense(5 * 14 * 14, 100));
    m.add(relu());
    m.add(dense(100, 10));
    return m;
  }
  if (name == "alexnet") {
    Model m("alexnet", {3, 32, 32}, 10);
    m.add(conv(3, 96, 11, 4, 9));
    m.add(relu());
    m.add(std::make_unique<MaxPool>(3, 2));
    m.add(std::make_unique<BatchNorm>(96));
    m.add(conv(96, 256, 5, 1, 1));
    m.add(relu());
    m.add(std::make_unique<BatchNorm>(256));
    m.add(std::make_unique<MaxPool>(2, 1));
    m.add(conv(256, 384, 3, 1, 1));
    m.add(relu());
    m.add(conv(384, 384, 3, 1, 1));
    m.add(relu());
    m.add(conv(384, 256, 3, 1, 1));
    m.add(relu());
    m.add(std::make_unique<Flatten>());
    m.add(dense(256, 256));
    m.add(relu());
    m.add(dense(256, 256));
    m.add(relu());
    m.add(dense(256, 10));
    return m;
  }
  throw ConfigError("unknown model '" + name + "'");
}

}  // namespace deepmpc
