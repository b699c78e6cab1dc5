#include "deepmpc/layers.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "deepmpc/secmath.hpp"

namespace deepmpc {

namespace {

constexpr std::size_t kZero = ArithVec::kZero;

int ceil_log2(std::size_t v) {
  int l = 0;
  while ((std::size_t{1} << l) < v) ++l;
  return l;
}

// out[i] = v[i / group] for a vector of n groups.
ArithVec repeat_each(const ArithVec& v, std::size_t group) {
  std::vector<std::size_t> idx(v.size() * group);
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i / group;
  return v.gather(idx);
}

// out[i] = v[i % v.size()]
ArithVec tile(const ArithVec& v, std::size_t times) {
  std::vector<std::size_t> idx(v.size() * times);
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i % v.size();
  return v.gather(idx);
}

void scatter_add(ArithVec& dst, const ArithVec& src,
                 std::span<const std::size_t> idx) {
  for (int p = 0; p < dst.parts(); ++p) {
    auto d = dst.part(p);
    auto s = src.part(p);
    for (std::size_t i = 0; i < idx.size(); ++i)
      if (idx[i] != kZero) d[idx[i]] += s[i];
  }
}

Tensor zeros_like(Backend& be, const Shape& s) { return {s, be.zeros(numel(s))}; }

}  // namespace

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ')';
  return os.str();
}

Tensor::Tensor(Shape s, ArithVec d) : shape(std::move(s)), data(std::move(d)) {
  if (numel(shape) != data.size())
    throw ShapeError("tensor data does not match shape " + shape_str(shape));
}

std::size_t Tensor::sample_size() const {
  return shape.empty() ? 0 : numel(shape) / shape[0];
}

double glorot_bound(std::size_t d_in, std::size_t d_out) {
  if (d_in + d_out == 0) throw ConfigError("glorot needs a positive fan");
  return std::sqrt(6.0 / static_cast<double>(d_in + d_out));
}

ArithVec glorot_init(Backend& be, std::size_t d_in, std::size_t d_out,
                     std::size_t count, InitMode mode, Rng& rng) {
  const int f = be.cfg().f;
  const double bound = glorot_bound(d_in, d_out);
  const Ring width = fx_encode_raw(2 * bound, f);
  const Ring low = fx_encode_raw(bound, f);
  if (mode == InitMode::secure) {
    ArithVec r = rand_fraction(be, count, 0);
    return be.add_public(be.trunc(scale(r, width), f), Ring{0} - low);
  }
  std::vector<Ring> w;
  if (be.plays(0)) {
    w.resize(count);
    const Ring mask = (Ring{1} << f) - 1;
    for (auto& v : w)
      v = round_nearest_shift((rng() & mask) * width, f) - low;
  } else {
    for (std::size_t i = 0; i < count; ++i) rng();
  }
  return be.input(0, w, count);
}

std::vector<std::size_t> shuffle_epoch(Rng& rng, std::size_t n) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = n; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(perm[i - 1], perm[pick(rng)]);
  }
  return perm;
}

// ---------------------------------------------------------------------------
// Dense

Dense::Dense(std::size_t in, std::size_t out) : in_(in), out_(out) {
  w_.name = "weight";
  b_.name = "bias";
}

Shape Dense::output_shape(const Shape& in) const {
  if (numel(in) != in_)
    throw ShapeError("dense expects " + std::to_string(in_) + " inputs, got " +
                     shape_str(in));
  return {out_};
}

void Dense::init(Backend& be, InitMode mode, Rng& rng) {
  w_.value = {{in_, out_}, glorot_init(be, in_, out_, in_ * out_, mode, rng)};
  b_.value = zeros_like(be, {out_});
}

Tensor Dense::forward(Backend& be, const Tensor& x, bool) {
  const std::size_t b = x.batch();
  output_shape({x.sample_size()});
  x_ = x;
  ArithVec y = be.trunc(be.matmul(x.data, w_.value.data, b, in_, out_), be.cfg().f);
  add_inplace(y, tile(b_.value.data, b));
  return {{b, out_}, std::move(y)};
}

Tensor Dense::backward(Backend& be, const Tensor& grad, bool need_input_grad) {
  const std::size_t b = x_.batch();
  if (grad.data.size() != b * out_) throw ShapeError("dense gradient shape mismatch");
  ArithVec dw = be.matmul(transpose(x_.data, b, in_), grad.data, in_, b, out_);
  b_.grad = {{out_}, sum_groups(transpose(grad.data, b, out_), b)};
  if (!need_input_grad) {
    w_.grad = {{in_, out_}, be.trunc(dw, be.cfg().f)};
    return {};
  }
  ArithVec dx = be.matmul(grad.data, transpose(w_.value.data, in_, out_), b, out_, in_);
  ArithVec both = be.trunc(concat<ArithDomain>({&dw, &dx}), be.cfg().f);
  w_.grad = {{in_, out_}, both.slice(0, dw.size())};
  return {x_.shape, both.slice(dw.size(), dx.size())};
}

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(const ConvSpec& spec) : spec_(spec) {
  if (spec.kernel == 0 || spec.stride == 0) throw ConfigError("conv kernel and stride must be positive");
  k_.name = "kernel";
  b_.name = "bias";
}

Shape Conv2d::output_shape(const Shape& in) const {
  if (in.size() != 3 || in[0] != spec_.in_channels)
    throw ShapeError("conv2d expects (" + std::to_string(spec_.in_channels) +
                     ",H,W), got " + shape_str(in));
  const std::size_t k = spec_.kernel, p = spec_.padding, s = spec_.stride;
  if (in[1] + 2 * p < k || in[2] + 2 * p < k)
    throw ShapeError("conv2d kernel larger than padded input " + shape_str(in));
  return {spec_.out_channels, (in[1] + 2 * p - k) / s + 1, (in[2] + 2 * p - k) / s + 1};
}

void Conv2d::init(Backend& be, InitMode mode, Rng& rng) {
  const std::size_t area = spec_.kernel * spec_.kernel;
  const std::size_t rows = spec_.in_channels * area;
  k_.value = {{spec_.out_channels, rows},
              glorot_init(be, spec_.in_channels * area, spec_.out_channels * area,
                          spec_.out_channels * rows, mode, rng)};
  b_.value = zeros_like(be, {spec_.out_channels});
}

void Conv2d::prepare(const Shape& in_full) {
  if (in_full == in_shape_) return;
  Shape out = output_shape({in_full[1], in_full[2], in_full[3]});
  in_shape_ = in_full;
  const std::size_t bsz = in_full[0], c = in_full[1], h = in_full[2], w = in_full[3];
  const std::size_t k = spec_.kernel, s = spec_.stride;
  const long pad = static_cast<long>(spec_.padding);
  oh_ = out[1];
  ow_ = out[2];
  const std::size_t pix = oh_ * ow_, n = bsz * pix, rows = c * k * k;
  col_idx_.assign(rows * n, kZero);
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t ki = 0; ki < k; ++ki)
      for (std::size_t kj = 0; kj < k; ++kj) {
        std::size_t r = (ch * k + ki) * k + kj;
        for (std::size_t b = 0; b < bsz; ++b)
          for (std::size_t oy = 0; oy < oh_; ++oy)
            for (std::size_t ox = 0; ox < ow_; ++ox) {
              long iy = static_cast<long>(oy * s + ki) - pad;
              long ix = static_cast<long>(ox * s + kj) - pad;
              if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) || ix >= static_cast<long>(w))
                continue;
              col_idx_[r * n + b * pix + oy * ow_ + ox] =
                  ((b * c + ch) * h + static_cast<std::size_t>(iy)) * w +
                  static_cast<std::size_t>(ix);
            }
      }
  const std::size_t oc = spec_.out_channels;
  to_nchw_.resize(oc * n);
  to_cmaj_.resize(oc * n);
  for (std::size_t b = 0; b < bsz; ++b)
    for (std::size_t o = 0; o < oc; ++o)
      for (std::size_t q = 0; q < pix; ++q) {
        to_nchw_[(b * oc + o) * pix + q] = o * n + b * pix + q;
        to_cmaj_[o * n + b * pix + q] = (b * oc + o) * pix + q;
      }
}

Tensor Conv2d::forward(Backend& be, const Tensor& x, bool) {
  if (x.shape.size() != 4) throw ShapeError("conv2d expects a (B,C,H,W) tensor");
  prepare(x.shape);
  const std::size_t bsz = x.shape[0], pix = oh_ * ow_, n = bsz * pix;
  const std::size_t rows = spec_.in_channels * spec_.kernel * spec_.kernel;
  cols_ = x.data.gather(col_idx_);
  ArithVec y = be.trunc(be.matmul(k_.value.data, cols_, spec_.out_channels, rows, n),
                        be.cfg().f);
  ArithVec out = y.gather(to_nchw_);
  add_inplace(out, tile(repeat_each(b_.value.data, pix), bsz));
  return {{bsz, spec_.out_channels, oh_, ow_}, std::move(out)};
}

Tensor Conv2d::backward(Backend& be, const Tensor& grad, bool need_input_grad) {
  const std::size_t bsz = in_shape_[0], pix = oh_ * ow_, n = bsz * pix;
  const std::size_t oc = spec_.out_channels;
  const std::size_t rows = spec_.in_channels * spec_.kernel * spec_.kernel;
  if (grad.data.size() != oc * n) throw ShapeError("conv2d gradient shape mismatch");
  ArithVec g = grad.data.gather(to_cmaj_);
  ArithVec dk = be.matmul(g, transpose(cols_, rows, n), oc, n, rows);
  b_.grad = {{oc}, sum_groups(g, n)};
  if (!need_input_grad) {
    k_.grad = {{oc, rows}, be.trunc(dk, be.cfg().f)};
    return {};
  }
  ArithVec dcols = be.matmul(transpose(k_.value.data, oc, rows), g, rows, oc, n);
  ArithVec dx = be.zeros(numel(in_shape_));
  scatter_add(dx, dcols, col_idx_);
  ArithVec both = be.trunc(concat<ArithDomain>({&dk, &dx}), be.cfg().f);
  k_.grad = {{oc, rows}, both.slice(0, dk.size())};
  return {in_shape_, both.slice(dk.size(), dx.size())};
}

// ---------------------------------------------------------------------------
// ReLU

Tensor Relu::forward(Backend& be, const Tensor& x, bool) {
  negative_ = be.bit2a(ltz(be, x.data));
  saved_ = true;
  return {x.shape, sub(x.data, be.mul(negative_, x.data))};
}

Tensor Relu::backward(Backend& be, const Tensor& grad, bool) {
  if (!saved_) throw std::logic_error("relu backward without a saved forward mask");
  if (grad.data.size() != negative_.size()) throw ShapeError("relu gradient shape mismatch");
  return {grad.shape, sub(grad.data, be.mul(negative_, grad.data))};
}

// ---------------------------------------------------------------------------
// MaxPool

MaxPool::MaxPool(std::size_t window, std::size_t stride)
    : window_(window), stride_(stride) {
  if (window == 0 || stride == 0) throw ConfigError("pool window and stride must be positive");
}

Shape MaxPool::output_shape(const Shape& in) const {
  if (in.size() != 3) throw ShapeError("maxpool expects (C,H,W), got " + shape_str(in));
  if (in[1] < window_ || in[2] < window_)
    throw ShapeError("pool window larger than input " + shape_str(in));
  if (stride_ == window_ && (in[1] % window_ || in[2] % window_))
    throw ShapeError("spatial dims of " + shape_str(in) + " not divisible by pool window");
  return {in[0], (in[1] - window_) / stride_ + 1, (in[2] - window_) / stride_ + 1};
}

namespace {

// One balanced-tree level: pairs (2i, 2i+1) are reduced, an odd tail carries.
struct Level {
  std::vector<ArithVec> next;
  ArithVec select;
};

Level reduce_level(Backend& be, const std::vector<ArithVec>& cur) {
  const std::size_t pairs = cur.size() / 2;
  std::vector<const ArithVec*> lhs, rhs;
  for (std::size_t i = 0; i < pairs; ++i) {
    lhs.push_back(&cur[2 * i]);
    rhs.push_back(&cur[2 * i + 1]);
  }
  ArithVec a = concat(lhs), b = concat(rhs);
  ArithVec diff = sub(b, a);
  Level lv;
  lv.select = be.bit2a(ltz(be, sub(a, b)));
  ArithVec m = add(a, be.mul(lv.select, diff));
  const std::size_t n = cur.front().size();
  for (std::size_t i = 0; i < pairs; ++i) lv.next.push_back(m.slice(i * n, n));
  if (cur.size() % 2) lv.next.push_back(cur.back());
  return lv;
}

}  // namespace

Tensor MaxPool::forward(Backend& be, const Tensor& x, bool) {
  if (x.shape.size() != 4) throw ShapeError("maxpool expects a (B,C,H,W) tensor");
  Shape out = output_shape({x.shape[1], x.shape[2], x.shape[3]});
  in_shape_ = x.shape;
  const std::size_t bsz = x.shape[0], c = x.shape[1], h = x.shape[2], w = x.shape[3];
  const std::size_t oh = out[1], ow = out[2], m = bsz * c * oh * ow;
  leaves_.assign(window_ * window_, std::vector<std::size_t>(m));
  for (std::size_t bc = 0; bc < bsz * c; ++bc)
    for (std::size_t oy = 0; oy < oh; ++oy)
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t o = (bc * oh + oy) * ow + ox;
        for (std::size_t dy = 0; dy < window_; ++dy)
          for (std::size_t dx = 0; dx < window_; ++dx)
            leaves_[dy * window_ + dx][o] =
                (bc * h + oy * stride_ + dy) * w + ox * stride_ + dx;
      }
  std::vector<ArithVec> cur;
  for (const auto& idx : leaves_) cur.push_back(x.data.gather(idx));
  select_.clear();
  level_sizes_.clear();
  while (cur.size() > 1) {
    level_sizes_.push_back(cur.size());
    Level lv = reduce_level(be, cur);
    select_.push_back(std::move(lv.select));
    cur = std::move(lv.next);
  }
  return {{bsz, c, oh, ow}, std::move(cur.front())};
}

Tensor MaxPool::backward(Backend& be, const Tensor& grad, bool) {
  const std::size_t m = leaves_.front().size();
  if (grad.data.size() != m) throw ShapeError("maxpool gradient shape mismatch");
  std::vector<ArithVec> g{grad.data};
  for (std::size_t l = select_.size(); l-- > 0;) {
    const std::size_t size = level_sizes_[l], pairs = size / 2;
    std::vector<const ArithVec*> parents;
    for (std::size_t i = 0; i < pairs; ++i) parents.push_back(&g[i]);
    ArithVec gp = concat(parents);
    ArithVec gb = be.mul(select_[l], gp);
    ArithVec ga = sub(gp, gb);
    std::vector<ArithVec> below;
    for (std::size_t i = 0; i < pairs; ++i) {
      below.push_back(ga.slice(i * m, m));
      below.push_back(gb.slice(i * m, m));
    }
    if (size % 2) below.push_back(g.back());
    g = std::move(below);
  }
  ArithVec dx = be.zeros(numel(in_shape_));
  for (std::size_t e = 0; e < leaves_.size(); ++e) scatter_add(dx, g[e], leaves_[e]);
  return {in_shape_, std::move(dx)};
}

// ---------------------------------------------------------------------------
// Dropout

Dropout::Dropout(double rate) : rate_(rate) {
  if (rate != 0.0) {
    int e;
    double mant = std::frexp(rate, &e);
    if (!(rate > 0.0 && rate < 1.0) || mant != 0.5)
      throw ConfigError("dropout rate must be zero or a power of two below one");
  }
}

ArithVec Dropout::apply(Backend& be, const ArithVec& v) const {
  ArithVec kept = be.mul(mask_, v);
  const double keep = 1.0 - rate_;
  int e;
  if (std::frexp(keep, &e) == 0.5) return scale(kept, Ring{1} << (1 - e));
  return fx_mul_public(be, kept, 1.0 / keep);
}

Tensor Dropout::forward(Backend& be, const Tensor& x, bool train) {
  active_ = train && rate_ > 0.0;
  if (!active_) return x;
  mask_ = bernoulli(be, x.data.size(), 1.0 - rate_);
  return {x.shape, apply(be, x.data)};
}

Tensor Dropout::backward(Backend& be, const Tensor& grad, bool) {
  if (!active_) return grad;
  return {grad.shape, apply(be, grad.data)};
}

// ---------------------------------------------------------------------------
// BatchNorm

BatchNorm::BatchNorm(std::size_t channels, double eps)
    : channels_(channels), eps_(eps) {
  gamma_.name = "gamma";
  beta_.name = "beta";
}

void BatchNorm::init(Backend& be, InitMode, Rng&) {
  gamma_.value = {{channels_}, be.constant(channels_, Ring{1} << be.cfg().f)};
  beta_.value = zeros_like(be, {channels_});
}

ArithVec BatchNorm::channel_mean(Backend& be, const ArithVec& grouped,
                                 std::size_t n) const {
  const int extra = std::max(1, ceil_log2(n));
  const int f = be.cfg().f;
  ArithVec sums = sum_groups(grouped, n);
  return be.trunc(scale(sums, fx_encode_raw(1.0 / static_cast<double>(n), f + extra)),
                  be.cfg().k + f + extra, f + extra, be.rounding());
}

ArithVec BatchNorm::broadcast(const ArithVec& per_channel, std::size_t n) const {
  return repeat_each(per_channel, n);
}

Tensor BatchNorm::forward(Backend& be, const Tensor& x, bool) {
  if (x.shape.size() < 2 || x.shape[1] != channels_)
    throw ShapeError("batchnorm expects " + std::to_string(channels_) + " channels");
  if (x.shape[0] < 2) throw ShapeError("batchnorm needs a batch of at least two");
  if (x.shape != shape_) {
    shape_ = x.shape;
    const std::size_t bsz = x.shape[0], spatial = x.sample_size() / channels_;
    const std::size_t n = bsz * spatial;
    to_group_.resize(x.data.size());
    from_group_.resize(x.data.size());
    for (std::size_t b = 0; b < bsz; ++b)
      for (std::size_t c = 0; c < channels_; ++c)
        for (std::size_t s = 0; s < spatial; ++s) {
          std::size_t flat = (b * channels_ + c) * spatial + s;
          std::size_t grouped = c * n + b * spatial + s;
          to_group_[grouped] = flat;
          from_group_[flat] = grouped;
        }
  }
  const std::size_t n = x.data.size() / channels_;
  const int f = be.cfg().f;
  ArithVec xg = x.data.gather(to_group_);
  ArithVec d = sub(xg, broadcast(channel_mean(be, xg, n), n));
  ArithVec var = channel_mean(be, fx_mul(be, d, d), n);
  inv_ = invert_sqrt(be, be.add_public(var, fx_encode_raw(eps_, f)));
  xhat_ = fx_mul(be, d, broadcast(inv_, n));
  ArithVec y = fx_mul(be, xhat_, broadcast(gamma_.value.data, n));
  add_inplace(y, broadcast(beta_.value.data, n));
  return {x.shape, y.gather(from_group_)};
}

Tensor BatchNorm::backward(Backend& be, const Tensor& grad, bool) {
  const std::size_t n = grad.data.size() / channels_;
  const int f = be.cfg().f;
  ArithVec dy = grad.data.gather(to_group_);
  beta_.grad = {{channels_}, sum_groups(dy, n)};
  ArithVec dxhat = fx_mul(be, dy, broadcast(gamma_.value.data, n));
  ArithVec prods = be.mul(concat<ArithDomain>({&dy, &dxhat}),
                          concat<ArithDomain>({&xhat_, &xhat_}));
  ArithVec both = be.trunc(prods, f);
  gamma_.grad = {{channels_}, sum_groups(both.slice(0, dy.size()), n)};
  ArithVec m1 = channel_mean(be, dxhat, n);
  ArithVec m2 = channel_mean(be, both.slice(dy.size(), dy.size()), n);
  ArithVec t = sub(sub(dxhat, broadcast(m1, n)), fx_mul(be, xhat_, broadcast(m2, n)));
  ArithVec dx = fx_mul(be, t, broadcast(inv_, n));
  return {grad.shape, dx.gather(from_group_)};
}

// ---------------------------------------------------------------------------
// Flatten

Tensor Flatten::forward(Backend&, const Tensor& x, bool) {
  in_shape_ = x.shape;
  return {{x.batch(), x.sample_size()}, x.data};
}

Tensor Flatten::backward(Backend&, const Tensor& grad, bool) {
  return {in_shape_, grad.data};
}

// ---------------------------------------------------------------------------
// Softmax cross-entropy

ArithVec row_max(Backend& be, const ArithVec& m, std::size_t rows, std::size_t cols) {
  std::vector<ArithVec> cur;
  for (std::size_t j = 0; j < cols; ++j) {
    std::vector<std::size_t> idx(rows);
    for (std::size_t i = 0; i < rows; ++i) idx[i] = i * cols + j;
    cur.push_back(m.gather(idx));
  }
  while (cur.size() > 1) cur = reduce_level(be, cur).next;
  return cur.front();
}

SoftmaxResult softmax_xent_grad(Backend& be, const Tensor& logits,
                                const ArithVec& onehot, bool with_loss) {
  if (logits.shape.size() != 2 || logits.shape[1] == 0)
    throw ShapeError("softmax expects a non-empty (B,L) tensor");
  const std::size_t rows = logits.shape[0], cols = logits.shape[1];
  if (onehot.size() != logits.data.size()) throw ShapeError("label shape mismatch");
  const int f = be.cfg().f;
  ArithVec xmax = row_max(be, logits.data, rows, cols);
  ArithVec shifted = sub(logits.data, repeat_each(xmax, cols));
  ArithVec ex = exp_e(be, shifted);
  ArithVec sums = sum_groups(ex, cols);
  ArithVec inv = div(be, be.constant(rows, Ring{1} << f), sums);
  ArithVec probs = fx_mul(be, ex, repeat_each(inv, cols));
  SoftmaxResult out;
  out.grad = {logits.shape, sub(probs, onehot)};
  out.probs = {logits.shape, probs};
  if (with_loss) {
    ArithVec lse = fx_mul_public(be, log2(be, sums), std::numbers::ln2);
    ArithVec picked = be.trunc(sum_groups(be.mul(onehot, shifted), cols), f);
    out.loss = sum_groups(sub(lse, picked), rows);
  }
  return out;
}

}  // namespace deepmpc
