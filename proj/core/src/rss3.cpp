#include "deepmpc/rss3.hpp"

#include "deepmpc/bincircuit.hpp"
#include "deepmpc/linalg.hpp"

namespace deepmpc {

Rss3Backend::Rss3Backend(Session& session, const FixedConfig& cfg,
                         Rounding rounding)
    : Backend(BackendMode::mpc3, cfg, rounding),
      session_(session),
      id_(session.id().id) {}

ArithVec Rss3Backend::input(int owner, std::span<const Ring> values,
                            std::size_t n) {
  if (owner < 0 || owner > 2) throw ConfigError("input owner out of range");
  if (owner == id_ && values.size() != n)
    throw ShapeError("owner must supply exactly n values");
  if (owner != id_ && !values.empty())
    throw ShapeError("only the owner supplies input values");
  ++counters_.input;
  ArithVec out(n, 2);
  PartyId me{id_};
  if (owner == id_) {
    // x_{o-1} from the key shared with o+1, x_{o+1} = x - x_{o-1} to o-1.
    session_.prg_next().fill(out.part(0));
    for (std::size_t i = 0; i < n; ++i) out.at(1, i) = values[i] - out.at(0, i);
    session_.exchange_words({}, out.part(1));
  } else if (me.prev().id == owner) {
    session_.prg_prev().fill(out.part(1));
    session_.exchange_words({}, {});
  } else {
    auto r = session_.exchange_words({}, {});
    if (r.from_next.size() != n) throw TransportError("input length mismatch");
    std::copy(r.from_next.begin(), r.from_next.end(), out.part(0).begin());
  }
  return out;
}

std::vector<Ring> Rss3Backend::open(const ArithVec& x) {
  ++counters_.open;
  auto r = session_.exchange_words({}, x.part(0));
  if (r.from_next.size() != x.size()) throw TransportError("open length mismatch");
  std::vector<Ring> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = x.at(0, i) + x.at(1, i) + r.from_next[i];
  return out;
}

ArithVec Rss3Backend::reshare(std::vector<Ring> t) {
  const std::size_t n = t.size();
  std::vector<Ring> a = session_.prg_next().draw(n);
  std::vector<Ring> b = session_.prg_prev().draw(n);
  for (std::size_t i = 0; i < n; ++i) t[i] += a[i] - b[i];
  auto r = session_.exchange_words(t, {});
  if (r.from_prev.size() != n) throw TransportError("reshare length mismatch");
  ArithVec out(n, 2);
  std::copy(t.begin(), t.end(), out.part(0).begin());
  std::copy(r.from_prev.begin(), r.from_prev.end(), out.part(1).begin());
  return out;
}

BinVec Rss3Backend::reshare_bin(std::vector<Ring> t) {
  const std::size_t n = t.size();
  std::vector<Ring> a = session_.prg_next().draw(n);
  std::vector<Ring> b = session_.prg_prev().draw(n);
  for (std::size_t i = 0; i < n; ++i) t[i] ^= a[i] ^ b[i];
  auto r = session_.exchange_words(t, {});
  if (r.from_prev.size() != n) throw TransportError("reshare length mismatch");
  BinVec out(n, 2);
  std::copy(t.begin(), t.end(), out.part(0).begin());
  std::copy(r.from_prev.begin(), r.from_prev.end(), out.part(1).begin());
  return out;
}

ArithVec Rss3Backend::mul(const ArithVec& a, const ArithVec& b) {
  if (a.size() != b.size()) throw ShapeError("mul length mismatch");
  ++counters_.mul;
  std::vector<Ring> t(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    t[i] = a.at(0, i) * (b.at(0, i) + b.at(1, i)) + a.at(1, i) * b.at(0, i);
  return reshare(std::move(t));
}

ArithVec Rss3Backend::matmul(const ArithVec& a, const ArithVec& b,
                             std::size_t m, std::size_t n, std::size_t p) {
  if (a.size() != m * n || b.size() != n * p) throw ShapeError("matmul shape mismatch");
  ++counters_.matmul;
  std::vector<Ring> bsum(n * p);
  for (std::size_t i = 0; i < n * p; ++i) bsum[i] = b.at(0, i) + b.at(1, i);
  std::vector<Ring> t(m * p, 0);
  matmul_acc(a.part(0).data(), bsum.data(), t.data(), m, n, p);
  matmul_acc(a.part(1).data(), b.part(0).data(), t.data(), m, n, p);
  return reshare(std::move(t));
}

ArithVec Rss3Backend::trunc(const ArithVec& x, int bit_length, int shift,
                            Rounding mode) {
  if (shift < 1 || shift >= bit_length || bit_length > 63)
    throw ConfigError("truncation needs 0 < shift < bit_length <= 63");
  ++counters_.trunc;
  return mode == Rounding::prob ? trunc_prob(x, bit_length, shift)
                                : trunc_nearest(x, shift);
}

// P1 and P2 share a uniform mask r and P0 opens c = x + 2^(l-1) + r. The
// wrap of that addition is msb(r)·(1-msb(c)); P2, who knows msb(r), picks
// the matching correction from two masked candidates prepared by P0.
ArithVec Rss3Backend::trunc_prob(const ArithVec& x, int bit_length, int shift) {
  const std::size_t n = x.size();
  const int m = shift;
  const Ring offset = Ring{1} << (bit_length - 1);
  const Ring offset_out = Ring{1} << (bit_length - 1 - m);
  const Ring wrap = Ring{1} << (64 - m);
  ArithVec xs = add_public(x, offset);
  ArithVec out(n, 2);

  if (id_ == 0) {
    std::vector<Ring> w0 = session_.prg_next().draw(n);
    std::vector<Ring> w1 = session_.prg_next().draw(n);
    std::vector<Ring> z = session_.prg_next().draw(n);
    auto r1 = session_.exchange_words({}, {});
    if (r1.from_next.size() != n) throw TransportError("trunc length mismatch");
    std::vector<Ring> cand(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      Ring c = xs.at(0, i) + xs.at(1, i) + r1.from_next[i];
      Ring d = c >> m;
      Ring e = 1 - (c >> 63);
      cand[i] = d + z[i] + w0[i];
      cand[n + i] = d + e * wrap + z[i] + w1[i];
    }
    session_.exchange_words({}, cand);
    auto r3 = session_.exchange_words({}, {});
    if (r3.from_prev.size() != n) throw TransportError("trunc length mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      out.at(0, i) = Ring{0} - z[i];
      out.at(1, i) = r3.from_prev[i];
    }
  } else if (id_ == 1) {
    std::vector<Ring> w0 = session_.prg_prev().draw(n);
    std::vector<Ring> w1 = session_.prg_prev().draw(n);
    std::vector<Ring> z = session_.prg_prev().draw(n);
    std::vector<Ring> r = session_.prg_next().draw(n);
    std::vector<Ring> zp = session_.prg_next().draw(n);
    std::vector<Ring> masked(n), chosen(n);
    for (std::size_t i = 0; i < n; ++i) {
      masked[i] = xs.at(0, i) + r[i];
      chosen[i] = (r[i] >> 63) ? w1[i] : w0[i];
    }
    session_.exchange_words(chosen, masked);
    session_.exchange_words({}, {});
    session_.exchange_words({}, {});
    for (std::size_t i = 0; i < n; ++i) {
      out.at(0, i) = Ring{0} - zp[i] - (r[i] >> m) - offset_out;
      out.at(1, i) = Ring{0} - z[i];
    }
  } else {
    std::vector<Ring> r = session_.prg_prev().draw(n);
    std::vector<Ring> zp = session_.prg_prev().draw(n);
    auto r1 = session_.exchange_words({}, {});
    auto r2 = session_.exchange_words({}, {});
    if (r1.from_prev.size() != n || r2.from_next.size() != 2 * n)
      throw TransportError("trunc length mismatch");
    std::vector<Ring> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t rho = r[i] >> 63;
      v[i] = r2.from_next[rho * n + i] - r1.from_prev[i] + zp[i];
    }
    session_.exchange_words(v, {});
    for (std::size_t i = 0; i < n; ++i) {
      out.at(0, i) = v[i];
      out.at(1, i) = Ring{0} - zp[i] - (r[i] >> m) - offset_out;
    }
  }
  return out;
}

ArithVec Rss3Backend::trunc_nearest(const ArithVec& x, int shift) {
  BinVec bits = a2b(add_public(x, Ring{1} << (shift - 1)));
  return b2a(bsar(bits, shift), 64);
}

BinVec Rss3Backend::and_bits(const BinVec& a, const BinVec& b) {
  if (a.size() != b.size()) throw ShapeError("and length mismatch");
  counters_.and_words += a.size();
  std::vector<Ring> t(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    t[i] = (a.at(0, i) & (b.at(0, i) ^ b.at(1, i))) ^ (a.at(1, i) & b.at(0, i));
  return reshare_bin(std::move(t));
}

std::vector<Ring> Rss3Backend::open_bin(const BinVec& x) {
  ++counters_.open;
  auto r = session_.exchange_words({}, x.part(0));
  if (r.from_next.size() != x.size()) throw TransportError("open length mismatch");
  std::vector<Ring> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = x.at(0, i) ^ x.at(1, i) ^ r.from_next[i];
  return out;
}

template <class D>
ShareVec<D> Rss3Backend::single_component(const ShareVec<D>& x, int j) const {
  PartyId me{id_};
  ShareVec<D> out(x.size(), 2);
  if (j == me.prev().id)
    std::copy(x.part(0).begin(), x.part(0).end(), out.part(0).begin());
  else if (j == me.next().id)
    std::copy(x.part(1).begin(), x.part(1).end(), out.part(1).begin());
  return out;
}

BinVec Rss3Backend::a2b(const ArithVec& x) {
  ++counters_.a2b;
  BinVec words(x.size(), 2);
  for (int p = 0; p < 2; ++p)
    std::copy(x.part(p).begin(), x.part(p).end(), words.part(p).begin());
  BinVec c0 = single_component(words, 0);
  BinVec c1 = single_component(words, 1);
  BinVec c2 = single_component(words, 2);
  auto [s, c] = carry_save(*this, c0, c1, c2);
  return add_bits(*this, s, c, 64);
}

ArithVec Rss3Backend::random_arith(std::size_t n) {
  ArithVec out(n, 2);
  session_.prg_next().fill(out.part(0));
  session_.prg_prev().fill(out.part(1));
  return out;
}

// Computes x - r in binary for a fresh random r, opens it and adds r back.
ArithVec Rss3Backend::b2a(const BinVec& x, int bits) {
  if (bits < 1 || bits > 64) throw ConfigError("b2a width must be in [1, 64]");
  ++counters_.b2a;
  const std::size_t n = x.size();
  BinVec xm = bits == 64 ? x : band_public(x, (Ring{1} << bits) - 1);
  ArithVec r = random_arith(n);
  BinVec negr(n, 2);
  for (int p = 0; p < 2; ++p)
    for (std::size_t i = 0; i < n; ++i) negr.at(p, i) = Ring{0} - r.at(p, i);
  BinVec n0 = single_component(negr, 0);
  BinVec n1 = single_component(negr, 1);
  BinVec n2 = single_component(negr, 2);
  auto [s1, c1] = carry_save(*this, xm, n0, n1);
  auto [s2, c2] = carry_save(*this, s1, c1, n2);
  BinVec y = add_bits(*this, s2, c2, 64);
  std::vector<Ring> opened = open_bin(y);
  return add_public(r, opened);
}

ArithVec Rss3Backend::bit2a(const BinVec& x) {
  ++counters_.bit2a;
  const std::size_t n = x.size();
  DaBits d = dabits(n);
  std::vector<Ring> c = unpack_bits(open_bin(pack_bit0(bxor(x, d.bin))), n);
  // b = c ^ r = c + r - 2cr
  std::vector<Ring> coeff(n);
  for (std::size_t i = 0; i < n; ++i) coeff[i] = c[i] ? ~Ring{0} : 1;
  return add_public(scale(d.arith, coeff), c);
}

DaBits Rss3Backend::dabits(std::size_t n) {
  const std::size_t words = (n + 63) / 64;
  BinVec packed = random_bits(words);
  DaBits d{ArithVec(n, 2), BinVec(n, 2)};
  for (int p = 0; p < 2; ++p)
    for (std::size_t i = 0; i < n; ++i)
      d.bin.at(p, i) = (packed.at(p, i / 64) >> (i % 64)) & 1;
  // The bit is the XOR of three component bits; lift each to Z_{2^64} and
  // combine with a ^ b = a + b - 2ab.
  ArithVec lifted(n, 2);
  for (int p = 0; p < 2; ++p)
    std::copy(d.bin.part(p).begin(), d.bin.part(p).end(), lifted.part(p).begin());
  ArithVec a0 = single_component(lifted, 0);
  ArithVec a1 = single_component(lifted, 1);
  ArithVec a2 = single_component(lifted, 2);
  ArithVec t = sub(add(a0, a1), scale(mul(a0, a1), 2));
  d.arith = sub(add(t, a2), scale(mul(t, a2), 2));
  return d;
}

BinVec Rss3Backend::random_bits(std::size_t n) {
  BinVec out(n, 2);
  session_.prg_next().fill(out.part(0));
  session_.prg_prev().fill(out.part(1));
  return out;
}

}  // namespace deepmpc
