#include "deepmpc/shares.hpp"

#include <bit>

#include "deepmpc/linalg.hpp"

namespace deepmpc {
namespace {

void check_same(std::size_t a, int pa, std::size_t b, int pb) {
  if (a != b || pa != pb) throw ShapeError("share vectors differ in shape");
}

template <class D, class F>
ShareVec<D> zip(const ShareVec<D>& a, const ShareVec<D>& b, F f) {
  check_same(a.size(), a.parts(), b.size(), b.parts());
  ShareVec<D> out(a.size(), a.parts());
  for (int p = 0; p < a.parts(); ++p) {
    auto x = a.part(p), y = b.part(p);
    auto z = out.part(p);
    for (std::size_t i = 0; i < a.size(); ++i) z[i] = f(x[i], y[i]);
  }
  return out;
}

template <class D, class F>
ShareVec<D> map(const ShareVec<D>& a, F f) {
  ShareVec<D> out(a.size(), a.parts());
  for (int p = 0; p < a.parts(); ++p) {
    auto x = a.part(p);
    auto z = out.part(p);
    for (std::size_t i = 0; i < a.size(); ++i) z[i] = f(x[i]);
  }
  return out;
}

}  // namespace

ArithVec add(const ArithVec& a, const ArithVec& b) {
  return zip(a, b, [](Ring x, Ring y) { return x + y; });
}

ArithVec sub(const ArithVec& a, const ArithVec& b) {
  return zip(a, b, [](Ring x, Ring y) { return x - y; });
}

ArithVec neg(const ArithVec& a) {
  return map(a, [](Ring x) { return Ring{0} - x; });
}

ArithVec scale(const ArithVec& a, Ring c) {
  return map(a, [c](Ring x) { return x * c; });
}

ArithVec scale(const ArithVec& a, std::span<const Ring> c) {
  if (c.size() != a.size()) throw ShapeError("scale vector length mismatch");
  ArithVec out(a.size(), a.parts());
  for (int p = 0; p < a.parts(); ++p)
    for (std::size_t i = 0; i < a.size(); ++i) out.at(p, i) = a.at(p, i) * c[i];
  return out;
}

void add_inplace(ArithVec& a, const ArithVec& b) {
  check_same(a.size(), a.parts(), b.size(), b.parts());
  for (int p = 0; p < a.parts(); ++p) {
    auto x = a.part(p);
    auto y = b.part(p);
    for (std::size_t i = 0; i < a.size(); ++i) x[i] += y[i];
  }
}

void sub_inplace(ArithVec& a, const ArithVec& b) {
  check_same(a.size(), a.parts(), b.size(), b.parts());
  for (int p = 0; p < a.parts(); ++p) {
    auto x = a.part(p);
    auto y = b.part(p);
    for (std::size_t i = 0; i < a.size(); ++i) x[i] -= y[i];
  }
}

ArithVec sum_groups(const ArithVec& a, std::size_t group) {
  if (group == 0 || a.size() % group != 0)
    throw ShapeError("length is not a multiple of the group size");
  std::size_t n = a.size() / group;
  ArithVec out(n, a.parts());
  for (int p = 0; p < a.parts(); ++p)
    for (std::size_t i = 0; i < n; ++i) {
      Ring s = 0;
      for (std::size_t j = 0; j < group; ++j) s += a.at(p, i * group + j);
      out.at(p, i) = s;
    }
  return out;
}

ArithVec transpose(const ArithVec& a, std::size_t r, std::size_t c) {
  if (a.size() != r * c) throw ShapeError("transpose shape mismatch");
  ArithVec out(a.size(), a.parts());
  for (int p = 0; p < a.parts(); ++p)
    transpose(a.part(p).data(), out.part(p).data(), r, c);
  return out;
}

BinVec bxor(const BinVec& a, const BinVec& b) {
  return zip(a, b, [](Ring x, Ring y) { return x ^ y; });
}

BinVec band_public(const BinVec& a, Ring mask) {
  return map(a, [mask](Ring x) { return x & mask; });
}

BinVec bshl(const BinVec& a, int s) {
  return map(a, [s](Ring x) { return s >= 64 ? Ring{0} : x << s; });
}

BinVec bshr(const BinVec& a, int s) {
  return map(a, [s](Ring x) { return s >= 64 ? Ring{0} : x >> s; });
}

BinVec bsar(const BinVec& a, int s) {
  return map(a, [s](Ring x) { return sar(x, s >= 64 ? 63 : s); });
}

BinVec bit_at(const BinVec& a, int bit) {
  return map(a, [bit](Ring x) { return (x >> bit) & 1; });
}

BinVec parity(const BinVec& a, Ring mask) {
  return map(a, [mask](Ring x) { return static_cast<Ring>(std::popcount(x & mask) & 1); });
}

BinVec reverse_bits(const BinVec& a, int width) {
  return map(a, [width](Ring x) {
    Ring r = 0;
    for (int i = 0; i < width; ++i) r |= ((x >> i) & 1) << (width - 1 - i);
    return r;
  });
}

}  // namespace deepmpc
