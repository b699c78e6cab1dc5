#include "deepmpc/bincircuit.hpp"

namespace deepmpc {

std::vector<BinVec> and_batch(Backend& be, const std::vector<const BinVec*>& a,
                              const std::vector<const BinVec*>& b) {
  BinVec prod = be.and_bits(concat(a), concat(b));
  std::vector<BinVec> out;
  std::size_t off = 0;
  for (const BinVec* v : a) {
    out.push_back(prod.slice(off, v->size()));
    off += v->size();
  }
  return out;
}

BinVec bor(Backend& be, const BinVec& a, const BinVec& b) {
  return bxor(bxor(a, b), be.and_bits(a, b));
}

std::pair<BinVec, BinVec> carry_save(Backend& be, const BinVec& a,
                                     const BinVec& b, const BinVec& c) {
  BinVec ac = bxor(a, c);
  BinVec maj = bxor(be.and_bits(ac, bxor(b, c)), c);
  return {bxor(ac, b), bshl(maj, 1)};
}

BinVec add_bits(Backend& be, const BinVec& a, const BinVec& b, int width) {
  if (width < 1 || width > 64) throw ConfigError("adder width must be in [1, 64]");
  BinVec p = bxor(a, b);
  BinVec g = be.and_bits(a, b);
  BinVec prop = p;
  for (int d = 1; d < width; d *= 2) {
    BinVec gs = bshl(g, d);
    if (2 * d < width) {
      BinVec ps = bshl(prop, d);
      auto r = and_batch(be, {&prop, &prop}, {&gs, &ps});
      g = bxor(g, r[0]);
      prop = std::move(r[1]);
    } else {
      g = bxor(g, be.and_bits(prop, gs));
    }
  }
  BinVec sum = bxor(p, bshl(g, 1));
  return width == 64 ? sum : band_public(sum, (Ring{1} << width) - 1);
}

BinVec suffix_or(Backend& be, const BinVec& x, int width) {
  BinVec s = width == 64 ? x : band_public(x, (Ring{1} << width) - 1);
  for (int d = 1; d < width; d *= 2) s = bor(be, s, bshr(s, d));
  return s;
}

BinVec pack_bit0(const BinVec& x) {
  std::size_t words = (x.size() + 63) / 64;
  BinVec out(words, x.parts());
  for (int p = 0; p < x.parts(); ++p)
    for (std::size_t i = 0; i < x.size(); ++i)
      out.at(p, i / 64) |= (x.at(p, i) & 1) << (i % 64);
  return out;
}

std::vector<Ring> unpack_bits(std::span<const Ring> packed, std::size_t n) {
  std::vector<Ring> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = (packed[i / 64] >> (i % 64)) & 1;
  return out;
}

}  // namespace deepmpc
