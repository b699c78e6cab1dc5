#include "deepmpc/backend.hpp"

#include "deepmpc/emulator.hpp"
#include "deepmpc/rss3.hpp"

namespace deepmpc {

const char* to_string(BackendMode m) {
  return m == BackendMode::mpc3 ? "3pc" : "emulate";
}

Backend::Backend(BackendMode mode, const FixedConfig& cfg, Rounding rounding)
    : mode_(mode), cfg_(cfg), rounding_(rounding) {
  cfg_.validate();
}

Backend::~Backend() = default;

ArithVec Backend::constant(std::span<const Ring> c) const {
  ArithVec out(c.size(), parts());
  if (int cp = const_part(); cp >= 0)
    std::copy(c.begin(), c.end(), out.part(cp).begin());
  return out;
}

ArithVec Backend::constant(std::size_t n, Ring c) const {
  ArithVec out(n, parts());
  if (int cp = const_part(); cp >= 0)
    std::fill(out.part(cp).begin(), out.part(cp).end(), c);
  return out;
}

BinVec Backend::bconstant(std::size_t n, Ring c) const {
  BinVec out(n, parts());
  if (int cp = const_part(); cp >= 0)
    std::fill(out.part(cp).begin(), out.part(cp).end(), c);
  return out;
}

ArithVec Backend::add_public(const ArithVec& a, Ring c) const {
  ArithVec out = a;
  if (int cp = const_part(); cp >= 0)
    for (auto& v : out.part(cp)) v += c;
  return out;
}

ArithVec Backend::add_public(const ArithVec& a, std::span<const Ring> c) const {
  if (c.size() != a.size()) throw ShapeError("public vector length mismatch");
  ArithVec out = a;
  if (int cp = const_part(); cp >= 0) {
    auto dst = out.part(cp);
    for (std::size_t i = 0; i < c.size(); ++i) dst[i] += c[i];
  }
  return out;
}

BinVec Backend::xor_public(const BinVec& a, Ring c) const {
  BinVec out = a;
  if (int cp = const_part(); cp >= 0)
    for (auto& v : out.part(cp)) v ^= c;
  return out;
}

ArithVec Backend::share_linear(std::span<const LinearTerm> terms, Ring c) const {
  if (terms.empty()) throw ShapeError("share_linear needs at least one term");
  ArithVec out(terms.front().x->size(), parts());
  for (const auto& t : terms) add_inplace(out, scale(*t.x, t.coeff));
  return add_public(out, c);
}

ArithVec Backend::dot(const ArithVec& x, const ArithVec& y) {
  if (x.size() != y.size()) throw ShapeError("dot product length mismatch");
  if (x.empty()) return zeros(1);
  return matmul(x, y, 1, x.size(), 1);
}

BinVec Backend::a2b(const ArithVec& x, int bits) {
  if (bits < 1 || bits > 64) throw ConfigError("a2b width must be in [1, 64]");
  BinVec b = a2b(x);
  return bits == 64 ? b : band_public(b, (Ring{1} << bits) - 1);
}

std::unique_ptr<Backend> make_backend(BackendMode mode, const FixedConfig& cfg,
                                      Rounding rounding, std::uint64_t seed,
                                      Session* session) {
  if (mode == BackendMode::emulate)
    return std::make_unique<EmulatorBackend>(cfg, rounding, seed);
  if (session == nullptr)
    throw ConfigError("3pc mode requires an established session");
  return std::make_unique<Rss3Backend>(*session, cfg, rounding);
}

}  // namespace deepmpc
