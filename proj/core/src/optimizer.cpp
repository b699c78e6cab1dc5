#include "deepmpc/optimizer.hpp"

#include <cmath>

#include "deepmpc/secmath.hpp"

namespace deepmpc {

namespace {

// Extra fractional bits carried by the learning rate constant.
constexpr int kLrBits = 8;

ArithVec concat_grads(const std::vector<Param*>& params, bool values) {
  std::vector<const ArithVec*> parts;
  for (const Param* p : params) parts.push_back(values ? &p->value.data : &p->grad.data);
  return concat(parts);
}

void scatter_back(const std::vector<Param*>& params, const ArithVec& flat) {
  std::size_t off = 0;
  for (Param* p : params) {
    const std::size_t n = p->value.data.size();
    p->value.data = flat.slice(off, n);
    off += n;
  }
}

}  // namespace

const char* to_string(OptimMode m) {
  switch (m) {
    case OptimMode::sgd: return "sgd";
    case OptimMode::adam: return "adam";
    case OptimMode::amsgrad: return "amsgrad";
  }
  return "?";
}

OptimMode parse_optim_mode(const std::string& s) {
  if (s == "sgd") return OptimMode::sgd;
  if (s == "adam") return OptimMode::adam;
  if (s == "amsgrad") return OptimMode::amsgrad;
  throw ConfigError("unknown optimizer '" + s + "'");
}

Optimizer::Optimizer(const OptimConfig& cfg) : cfg_(cfg) {
  if (!(cfg.lr > 0)) throw ConfigError("learning rate must be positive");
  if (cfg.batch == 0) throw ConfigError("batch size must be positive");
  if (cfg.mode == OptimMode::sgd && (cfg.batch & (cfg.batch - 1)))
    throw ConfigError("sgd needs a power-of-two batch size, got " + std::to_string(cfg.batch));
  while ((std::size_t{1} << log2_batch_) < cfg.batch) ++log2_batch_;
}

Ring Optimizer::effective_eps(double eps, int f) {
  Ring raw = fx_encode_raw(eps, f);
  return raw == 0 ? 1 : raw;
}

const ArithVec& Optimizer::second_moment(std::size_t i) const {
  if (i >= v_.size()) throw std::out_of_range("no optimizer state for parameter");
  return cfg_.mode == OptimMode::amsgrad ? vmax_[i] : v_[i];
}

void Optimizer::step(Backend& be, const std::vector<Param*>& params) {
  for (const Param* p : params)
    if (p->grad.data.size() != p->value.data.size())
      throw ShapeError("gradient of " + p->name + " does not match its parameter");
  if (cfg_.mode == OptimMode::sgd)
    step_sgd(be, params);
  else
    step_adam(be, params);
}

// θ -= lr/B · G with the batch division folded into a single truncation.
void Optimizer::step_sgd(Backend& be, const std::vector<Param*>& params) {
  const int f = be.cfg().f;
  ArithVec g = concat_grads(params, false);
  const int shift = f + kLrBits + log2_batch_;
  ArithVec delta = be.trunc(scale(g, fx_encode_raw(cfg_.lr, f + kLrBits)),
                            be.cfg().k + shift - log2_batch_, shift, be.rounding());
  scatter_back(params, sub(concat_grads(params, true), delta));
}

void Optimizer::step_adam(Backend& be, const std::vector<Param*>& params) {
  const int f = be.cfg().f;
  if (m_.empty()) {
    for (const Param* p : params) {
      m_.push_back(be.zeros(p->value.data.size()));
      v_.push_back(be.zeros(p->value.data.size()));
    }
    if (cfg_.mode == OptimMode::amsgrad) vmax_ = v_;
  }
  if (m_.size() != params.size()) throw ShapeError("parameter list changed between steps");
  ArithVec g = concat_grads(params, false);
  const std::size_t n = g.size();
  std::vector<const ArithVec*> mp, vp, vmp;
  for (std::size_t i = 0; i < params.size(); ++i) {
    mp.push_back(&m_[i]);
    vp.push_back(&v_[i]);
    if (!vmax_.empty()) vmp.push_back(&vmax_[i]);
  }
  ArithVec m = concat(mp), v = concat(vp);

  // m' = β1 m + (1-β1) G and a = sqrt(1-β2)·G in one truncation round; the
  // square of a is the (1-β2)·G² term without squaring G itself.
  ArithVec mom = scale(m, fx_encode_raw(cfg_.beta1, f));
  add_inplace(mom, scale(g, fx_encode_raw(1 - cfg_.beta1, f)));
  ArithVec a = scale(g, fx_encode_raw(std::sqrt(1 - cfg_.beta2), f));
  ArithVec both = be.trunc(concat<ArithDomain>({&mom, &a}), f);
  m = both.slice(0, n);
  a = both.slice(n, n);
  ArithVec vraw = be.mul(a, a);
  add_inplace(vraw, scale(v, fx_encode_raw(cfg_.beta2, f)));
  v = be.trunc(vraw, f);

  ArithVec denom = v;
  if (cfg_.mode == OptimMode::amsgrad) {
    denom = max(be, concat(vmp), v);
  }
  ArithVec inv = invert_sqrt(be, be.add_public(denom, effective_eps(cfg_.eps, f)));
  ArithVec u = fx_mul(be, m, inv);
  ArithVec delta = be.trunc(scale(u, fx_encode_raw(cfg_.lr, f + kLrBits)),
                            be.cfg().k + f + kLrBits, f + kLrBits, be.rounding());
  scatter_back(params, sub(concat_grads(params, true), delta));

  std::size_t off = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::size_t len = m_[i].size();
    m_[i] = m.slice(off, len);
    v_[i] = v.slice(off, len);
    if (!vmax_.empty()) vmax_[i] = denom.slice(off, len);
    off += len;
  }
}

}  // namespace deepmpc
