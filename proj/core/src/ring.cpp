#include "deepmpc/ring.hpp"

#include <cmath>
#include <string>

#include "deepmpc/linalg.hpp"

namespace deepmpc {

void FixedConfig::validate() const {
  if (ring_bits != 64) throw ConfigError("only the 64-bit ring is supported");
  if (f <= 0) throw ConfigError("precision f must be positive");
  if (k >= ring_bits / 2)
    throw ConfigError("bit length k must be below half the ring size");
  if (k < 2 * f - 1) throw ConfigError("bit length k must be at least 2f-1");
}

double FixedConfig::epsilon() const { return std::ldexp(1.0, -f); }

double FixedConfig::max_abs() const { return std::ldexp(1.0, k - f - 1); }

const char* to_string(Rounding r) {
  return r == Rounding::prob ? "prob" : "nearest";
}

Rounding parse_rounding(const std::string& s) {
  if (s == "prob") return Rounding::prob;
  if (s == "nearest") return Rounding::nearest;
  throw ConfigError("unknown rounding mode: " + s);
}

Ring fx_encode_raw(double x, int f) {
  // std::nearbyint would use banker's rounding; the tie goes up instead.
  return from_signed(static_cast<std::int64_t>(std::floor(std::ldexp(x, f) + 0.5)));
}

ClearFixed fx_encode(double x, const FixedConfig& cfg) {
  if (!(std::fabs(x) < cfg.max_abs()))
    throw RangeError("value " + std::to_string(x) + " outside fixed-point range");
  return {fx_encode_raw(x, cfg.f), cfg};
}

double fx_decode(Ring raw, const FixedConfig& cfg) {
  return std::ldexp(static_cast<double>(to_signed(raw)), -cfg.f);
}

double fx_decode(const ClearFixed& v) { return fx_decode(v.raw, v.cfg); }

RoundingOutcome round_prob_outcome(Ring prod, int shift, Rng& rng) {
  RoundingOutcome out;
  out.mu_floor = sar(prod, shift);
  Ring mask = shift >= 64 ? ~Ring{0} : (Ring{1} << shift) - 1;
  out.frac = prod & mask;
  Ring u = rng() & mask;
  out.bit = u < out.frac ? 1 : 0;
  return out;
}

Ring round_prob_clear(Ring prod, const FixedConfig& cfg, Rng& rng) {
  return round_prob_outcome(prod, cfg.f, rng).result();
}

Ring round_nearest_shift(Ring prod, int shift) {
  return sar(prod + (Ring{1} << (shift - 1)), shift);
}

Ring round_nearest_clear(Ring prod, const FixedConfig& cfg) {
  return round_nearest_shift(prod, cfg.f);
}

ClearMatrix clear_matmul_quantized(const ClearMatrix& a, const ClearMatrix& b,
                                   Rounding mode, const FixedConfig& cfg,
                                   Rng& rng) {
  if (a.cols != b.rows || a.data.size() != a.rows * a.cols ||
      b.data.size() != b.rows * b.cols)
    throw ShapeError("matrix shapes do not conform");
  ClearMatrix c(a.rows, b.cols);
  matmul_acc(a.data.data(), b.data.data(), c.data.data(), a.rows, a.cols,
             b.cols);
  for (auto& v : c.data)
    v = mode == Rounding::prob ? round_prob_clear(v, cfg, rng)
                               : round_nearest_clear(v, cfg);
  return c;
}

}  // namespace deepmpc
