#include "deepmpc/secmath.hpp"

#include <cmath>
#include <numbers>

#include "deepmpc/bincircuit.hpp"

namespace deepmpc {

using namespace secmath_constants;

namespace {

int ceil_log2(int v) {
  int l = 0;
  while ((1 << l) < v) ++l;
  return l;
}

Ring mask_bits(int bits) { return bits >= 64 ? ~Ring{0} : (Ring{1} << bits) - 1; }

// Word whose bit i is bit 2i xor bit 2i+1 of the input, for i < width.
BinVec fold_pairs(const BinVec& x, int width) {
  BinVec out(x.size(), x.parts());
  for (int p = 0; p < x.parts(); ++p)
    for (std::size_t i = 0; i < x.size(); ++i) {
      Ring w = x.at(p, i), r = 0;
      for (int b = 0; b < width; ++b) r |= (((w >> (2 * b)) ^ (w >> (2 * b + 1))) & 1) << b;
      out.at(p, i) = r;
    }
  return out;
}

// Binary representation of the index of a one-hot word.
BinVec one_hot_index(const BinVec& z, int index_bits) {
  BinVec out(z.size(), z.parts());
  for (int t = 0; t < index_bits; ++t) {
    Ring mask = 0;
    for (int i = 0; i < 64; ++i)
      if ((i >> t) & 1) mask |= Ring{1} << i;
    out = bxor(out, bshl(parity(z, mask), t));
  }
  return out;
}

}  // namespace

BinVec ltz(Backend& be, const ArithVec& x) {
  ++be.counters().ltz;
  return bit_at(be.a2b(x), 63);
}

BinVec less_than(Backend& be, const ArithVec& x, const ArithVec& y) {
  return ltz(be, sub(x, y));
}

ArithVec mux_arith(Backend& be, const ArithVec& b, const ArithVec& x,
                   const ArithVec& y) {
  return add(x, be.mul(b, sub(y, x)));
}

ArithVec mux(Backend& be, const BinVec& b, const ArithVec& x, const ArithVec& y) {
  return mux_arith(be, be.bit2a(b), x, y);
}

ArithVec max(Backend& be, const ArithVec& x, const ArithVec& y) {
  return mux(be, ltz(be, sub(x, y)), x, y);
}

ArithVec fx_mul(Backend& be, const ArithVec& a, const ArithVec& b) {
  return be.trunc(be.mul(a, b), be.cfg().f);
}

ArithVec fx_mul_public(Backend& be, const ArithVec& a, double c) {
  return be.trunc(scale(a, fx_encode_raw(c, be.cfg().f)), be.cfg().f);
}

// bitlength(X - 1) is the smallest j with X <= 2^j.
BinVec np2(Backend& be, const ArithVec& x) {
  const int width = 2 * be.cfg().f + 1;
  BinVec bits = be.a2b(be.add_public(x, ~Ring{0}), width);
  BinVec s = suffix_or(be, bits, width);
  // z_j = s_{j-1} xor s_j with s_{-1} = 1.
  return be.xor_public(bxor(bshl(s, 1), s), 1);
}

ArithVec div(Backend& be, const ArithVec& a, const ArithVec& b) {
  if (a.size() != b.size()) throw ShapeError("div length mismatch");
  ++be.counters().div;
  const int f = be.cfg().f;
  const std::size_t n = a.size();
  // v = 2^-e from the one-hot index j = e + f, bit-reversed so bit 2f-j is set.
  BinVec z = np2(be, b);
  ArithVec v = be.b2a(reverse_bits(z, 2 * f + 1), 2 * f + 1);
  ArithVec vv = concat<ArithDomain>({&v, &v});
  ArithVec ab = concat<ArithDomain>({&b, &a});
  ArithVec norm = be.trunc(be.mul(ab, vv), f);
  ArithVec c = norm.slice(0, n);
  ArithVec y = norm.slice(n, n);
  ArithVec w = be.add_public(scale(c, ~Ring{0} - 1), fx_encode_raw(2.9142, f));
  ArithVec cy = concat<ArithDomain>({&c, &y});
  ArithVec ww = concat<ArithDomain>({&w, &w});
  ArithVec t = be.trunc(be.mul(cy, ww), f);
  ArithVec e = be.add_public(neg(t.slice(0, n)), Ring{1} << f);
  y = t.slice(n, n);
  for (int it = 0; it < kDivIterations; ++it) {
    ArithVec ye = concat<ArithDomain>({&y, &e});
    ArithVec one_e = be.add_public(e, Ring{1} << f);
    ArithVec rhs = concat<ArithDomain>({&one_e, &e});
    if (it + 1 == kDivIterations) {
      y = be.trunc(be.mul(y, one_e), f);
    } else {
      ArithVec r = be.trunc(be.mul(ye, rhs), f);
      y = r.slice(0, n);
      e = r.slice(n, n);
    }
  }
  return y;
}

ArithVec exp2(Backend& be, const ArithVec& x) {
  const FixedConfig& cfg = be.cfg();
  const int f = cfg.f, k = cfg.k;
  const int ell = ceil_log2(k - f);
  const int fp = f + kExpGuardBits;
  const std::size_t n = x.size();

  BinVec bits = be.a2b(x);
  // Underflow flag z = [x < -(k-f-1)], from the sign of x + (k-f-1) on k bits.
  BinVec shifted = add_bits(be, bits, be.bconstant(n, Ring(k - f - 1) << f), k);
  BinVec z = bit_at(shifted, k - 1);

  std::vector<const BinVec*> sel;
  std::vector<BinVec> int_bits;
  for (int j = 0; j < ell; ++j) int_bits.push_back(bit_at(bits, f + j));
  BinVec sign = bit_at(bits, k - 1);
  for (auto& b : int_bits) sel.push_back(&b);
  sel.push_back(&sign);
  sel.push_back(&z);
  ArithVec lifted = be.bit2a(concat(sel));

  // d = prod_j (1 + x_{f+j}(2^(2^j) - 1)), an integer.
  std::vector<ArithVec> factors;
  for (int j = 0; j < ell; ++j) {
    Ring m = (Ring{1} << (1 << j)) - 1;
    factors.push_back(be.add_public(scale(lifted.slice(j * n, n), m), 1));
  }
  while (factors.size() > 1) {
    std::size_t half = factors.size() / 2;
    std::vector<const ArithVec*> lhs, rhs;
    for (std::size_t i = 0; i < half; ++i) {
      lhs.push_back(&factors[2 * i]);
      rhs.push_back(&factors[2 * i + 1]);
    }
    ArithVec prod = be.mul(concat(lhs), concat(rhs));
    std::vector<ArithVec> next;
    for (std::size_t i = 0; i < half; ++i) next.push_back(prod.slice(i * n, n));
    if (factors.size() % 2) next.push_back(factors.back());
    factors = std::move(next);
  }
  const ArithVec& d = factors.front();

  // Fractional part r in [0, 1), then 2^r by Taylor series at precision fp.
  ArithVec r = scale(be.b2a(bits, f), Ring{1} << kExpGuardBits);
  const double ln2 = std::numbers::ln2;
  auto coeff = [&](int i) {
    return fx_encode_raw(std::pow(ln2, i) / std::tgamma(i + 1.0), fp);
  };
  const int prod_bits = 2 * fp + 2;
  ArithVec u = be.trunc(scale(r, coeff(kExpTaylorDegree)), prod_bits, fp, be.rounding());
  u = be.add_public(u, coeff(kExpTaylorDegree - 1));
  for (int i = kExpTaylorDegree - 2; i >= 0; --i)
    u = be.add_public(be.trunc(be.mul(u, r), prod_bits, fp, be.rounding()), coeff(i));

  ArithVec g = be.mul(u, d);
  const int g_bits = fp + (1 << ell) + 1;
  ArithVec pos = be.trunc(g, g_bits, fp - f, be.rounding());
  ArithVec negv = be.trunc(g, g_bits, fp - f + (1 << ell), be.rounding());
  ArithVec h = mux_arith(be, lifted.slice(ell * n, n), pos, negv);
  ArithVec zr = lifted.slice((ell + 1) * n, n);
  return sub(h, be.mul(zr, h));
}

ArithVec exp_e(Backend& be, const ArithVec& x) {
  return exp2(be, fx_mul_public(be, x, std::numbers::log2e));
}

ArithVec log2(Backend& be, const ArithVec& x) {
  const int f = be.cfg().f;
  const std::size_t n = x.size();
  BinVec z = np2(be, x);
  // a = x·2^-e in [0.5, 1], with 2^-e = 2^(2f-j) taken from the reversed one-hot.
  ArithVec v = be.b2a(reverse_bits(z, 2 * f + 1), 2 * f + 1);
  ArithVec j = be.b2a(one_hot_index(z, 7), 7);
  ArithVec a = be.trunc(be.mul(x, v), f);
  // log2(a) = (2/ln 2)·atanh(t), t = (a-1)/(a+1) in [-1/3, 0].
  const Ring one = Ring{1} << f;
  ArithVec num = be.add_public(a, ~Ring{0} - one + 1);
  ArithVec den = be.add_public(a, one);
  ArithVec t = div(be, num, den);
  ArithVec t2 = fx_mul(be, t, t);
  ArithVec poly = be.constant(n, fx_encode_raw(1.0 / (2 * kLogTerms - 1), f));
  for (int i = kLogTerms - 2; i >= 0; --i)
    poly = be.add_public(fx_mul(be, poly, t2), fx_encode_raw(1.0 / (2 * i + 1), f));
  ArithVec la = fx_mul_public(be, fx_mul(be, poly, t), 2.0 / std::numbers::ln2);
  // e = j - f as a fixed-point integer.
  ArithVec e = be.add_public(scale(j, one), Ring{0} - Ring(f) * one);
  (void)n;
  return add(la, e);
}

ArithVec invert_sqrt(Backend& be, const ArithVec& x) {
  const int f = be.cfg().f;
  const std::size_t n = x.size();
  // Sep: z one-hot at j = e+f; u = x·2^(-e-1) in [0.25, 0.5].
  BinVec z = np2(be, x);
  BinVec halves = reverse_bits(fold_pairs(z, f), f);  // bit f-1-floor(j/2)
  BinVec rev = reverse_bits(z, 2 * f);                // bit 2f-1-j
  BinVec b = parity(z, 0x5555555555555555ULL);        // j even
  BinVec both = concat<BinDomain>({&rev, &halves});
  ArithVec pw = be.b2a(both, 2 * f);
  ArithVec bsel = be.bit2a(b);
  ArithVec u = be.trunc(be.mul(x, pw.slice(0, n)), f);

  // c(u) = 3.14736 + u·(4.63887·u - 5.77789)
  ArithVec lin = be.add_public(fx_mul_public(be, u, 4.63887),
                               Ring{0} - fx_encode_raw(5.77789, f));
  ArithVec c = be.add_public(fx_mul(be, u, lin), fx_encode_raw(3.14736, f));

  // SqrtComp: constant chosen by the parity of j, times 2^(-floor(j/2)).
  const Ring c0 = fx_encode_raw(std::ldexp(1.0, f / 2 + 1), f);
  const Ring c1 = fx_encode_raw(std::pow(2.0, (f + 1) / 2.0 + 1), f);
  ArithVec cb = be.add_public(scale(bsel, c1 - c0), c0);
  ArithVec comp = be.trunc(be.mul(cb, pw.slice(n, n)), f + kSqrtCompShift);
  return fx_mul(be, c, comp);
}

ArithVec rand_fraction(Backend& be, std::size_t n, int e) {
  const int bits = be.cfg().f + e;
  if (bits > be.cfg().k) throw ConfigError("rand_fraction needs f + e <= k");
  if (bits <= 0) return be.zeros(n);
  return be.b2a(be.random_bits(n), bits);
}

ArithVec bernoulli(Backend& be, std::size_t n, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("probability outside [0, 1]");
  const int f = be.cfg().f;
  const Ring pr = fx_encode_raw(p, f);
  // floor(p + u) for u uniform on [0, 1): bit f of the (f+1)-bit sum.
  BinVec u = band_public(be.random_bits(n), mask_bits(f));
  BinVec s = add_bits(be, u, be.bconstant(n, pr), f + 1);
  return be.bit2a(bit_at(s, f));
}

}  // namespace deepmpc
