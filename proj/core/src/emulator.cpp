#include "deepmpc/emulator.hpp"

#include "deepmpc/linalg.hpp"

namespace deepmpc {

EmulatorBackend::EmulatorBackend(const FixedConfig& cfg, Rounding rounding,
                                 std::uint64_t seed)
    : Backend(BackendMode::emulate, cfg, rounding), rng_(seed) {}

ArithVec EmulatorBackend::input(int owner, std::span<const Ring> values,
                                std::size_t n) {
  if (owner < 0 || owner > 2) throw ConfigError("input owner out of range");
  if (values.size() != n) throw ShapeError("owner must supply exactly n values");
  ++counters_.input;
  ArithVec out(n, 1);
  std::copy(values.begin(), values.end(), out.part(0).begin());
  return out;
}

std::vector<Ring> EmulatorBackend::open(const ArithVec& x) {
  ++counters_.open;
  return {x.part(0).begin(), x.part(0).end()};
}

ArithVec EmulatorBackend::mul(const ArithVec& a, const ArithVec& b) {
  if (a.size() != b.size()) throw ShapeError("mul length mismatch");
  ++counters_.mul;
  ArithVec out(a.size(), 1);
  for (std::size_t i = 0; i < a.size(); ++i) out.at(0, i) = a.at(0, i) * b.at(0, i);
  return out;
}

ArithVec EmulatorBackend::matmul(const ArithVec& a, const ArithVec& b,
                                 std::size_t m, std::size_t n, std::size_t p) {
  if (a.size() != m * n || b.size() != n * p) throw ShapeError("matmul shape mismatch");
  ++counters_.matmul;
  ArithVec out(m * p, 1);
  matmul_acc(a.part(0).data(), b.part(0).data(), out.part(0).data(), m, n, p);
  return out;
}

ArithVec EmulatorBackend::trunc(const ArithVec& x, int bit_length, int shift,
                                Rounding mode) {
  if (shift < 1 || shift >= bit_length || bit_length > 63)
    throw ConfigError("truncation needs 0 < shift < bit_length <= 63");
  ++counters_.trunc;
  ArithVec out(x.size(), 1);
  for (std::size_t i = 0; i < x.size(); ++i)
    out.at(0, i) = mode == Rounding::prob
                       ? round_prob_outcome(x.at(0, i), shift, rng_).result()
                       : round_nearest_shift(x.at(0, i), shift);
  return out;
}

BinVec EmulatorBackend::and_bits(const BinVec& a, const BinVec& b) {
  if (a.size() != b.size()) throw ShapeError("and length mismatch");
  counters_.and_words += a.size();
  BinVec out(a.size(), 1);
  for (std::size_t i = 0; i < a.size(); ++i) out.at(0, i) = a.at(0, i) & b.at(0, i);
  return out;
}

std::vector<Ring> EmulatorBackend::open_bin(const BinVec& x) {
  ++counters_.open;
  return {x.part(0).begin(), x.part(0).end()};
}

BinVec EmulatorBackend::a2b(const ArithVec& x) {
  ++counters_.a2b;
  BinVec out(x.size(), 1);
  std::copy(x.part(0).begin(), x.part(0).end(), out.part(0).begin());
  return out;
}

ArithVec EmulatorBackend::b2a(const BinVec& x, int bits) {
  if (bits < 1 || bits > 64) throw ConfigError("b2a width must be in [1, 64]");
  ++counters_.b2a;
  Ring mask = bits == 64 ? ~Ring{0} : (Ring{1} << bits) - 1;
  ArithVec out(x.size(), 1);
  for (std::size_t i = 0; i < x.size(); ++i) out.at(0, i) = x.at(0, i) & mask;
  return out;
}

ArithVec EmulatorBackend::bit2a(const BinVec& x) {
  ++counters_.bit2a;
  ArithVec out(x.size(), 1);
  for (std::size_t i = 0; i < x.size(); ++i) out.at(0, i) = x.at(0, i) & 1;
  return out;
}

DaBits EmulatorBackend::dabits(std::size_t n) {
  DaBits d{ArithVec(n, 1), BinVec(n, 1)};
  for (std::size_t i = 0; i < n; ++i) {
    Ring b = rng_() & 1;
    d.arith.at(0, i) = b;
    d.bin.at(0, i) = b;
  }
  return d;
}

BinVec EmulatorBackend::random_bits(std::size_t n) {
  BinVec out(n, 1);
  for (auto& v : out.part(0)) v = rng_();
  return out;
}

}  // namespace deepmpc
