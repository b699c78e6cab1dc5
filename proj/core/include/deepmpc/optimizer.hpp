#pragma once

#include <string>
#include <vector>

#include "deepmpc/layers.hpp"

namespace deepmpc {

enum class OptimMode { sgd, adam, amsgrad };

const char* to_string(OptimMode m);
OptimMode parse_optim_mode(const std::string& s);

struct OptimConfig {
  OptimMode mode = OptimMode::sgd;
  double lr = 0.01;
  std::size_t batch = 128;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;  // raised to one representation step if it rounds to zero
};

// Parameter updates from batch-summed gradients.
class Optimizer {
 public:
  explicit Optimizer(const OptimConfig& cfg);

  const OptimConfig& config() const { return cfg_; }
  void step(Backend& be, const std::vector<Param*>& params);

  // Second-moment state of parameter i (the running max for amsgrad).
  const ArithVec& second_moment(std::size_t i) const;
  // The ε actually used, as a raw fixed-point value.
  static Ring effective_eps(double eps, int f);

 private:
  void step_sgd(Backend& be, const std::vector<Param*>& params);
  void step_adam(Backend& be, const std::vector<Param*>& params);

  OptimConfig cfg_;
  int log2_batch_ = 0;
  std::vector<ArithVec> m_, v_, vmax_;
};

}  // namespace deepmpc
