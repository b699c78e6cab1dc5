#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace deepmpc {

// Residue modulo 2^64. Unsigned arithmetic gives the wraparound for free.
using Ring = std::uint64_t;

using Rng = std::mt19937_64;

class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class RingOp { add, sub, mul, neg };

constexpr Ring ring_arith(RingOp op, Ring a, Ring b = 0) {
  switch (op) {
    case RingOp::add: return a + b;
    case RingOp::sub: return a - b;
    case RingOp::mul: return a * b;
    case RingOp::neg: return Ring{0} - a;
  }
  return 0;
}

constexpr std::int64_t to_signed(Ring v) { return static_cast<std::int64_t>(v); }
constexpr Ring from_signed(std::int64_t v) { return static_cast<Ring>(v); }

// Arithmetic shift right of the two's-complement value.
constexpr Ring sar(Ring v, int m) {
  return static_cast<Ring>(static_cast<std::int64_t>(v) >> m);
}

struct FixedConfig {
  int f = 16;
  int k = 31;
  int ring_bits = 64;

  void validate() const;
  double epsilon() const;
  // Largest magnitude accepted by fx_encode.
  double max_abs() const;
};

enum class Rounding { prob, nearest };

const char* to_string(Rounding r);
Rounding parse_rounding(const std::string& s);

struct ClearFixed {
  Ring raw = 0;
  FixedConfig cfg{};
};

ClearFixed fx_encode(double x, const FixedConfig& cfg);
double fx_decode(const ClearFixed& v);
double fx_decode(Ring raw, const FixedConfig& cfg);
// Encoding without the range check, for public constants at other precisions.
Ring fx_encode_raw(double x, int f);

struct RoundingOutcome {
  Ring mu_floor = 0;
  Ring frac = 0;  // numerator over 2^shift
  int bit = 0;
  Ring result() const { return mu_floor + static_cast<Ring>(bit); }
};

// Unbiased rounding of a product carrying `shift` extra fractional bits.
RoundingOutcome round_prob_outcome(Ring prod, int shift, Rng& rng);
Ring round_prob_clear(Ring prod, const FixedConfig& cfg, Rng& rng);
Ring round_nearest_clear(Ring prod, const FixedConfig& cfg);
Ring round_nearest_shift(Ring prod, int shift);

struct ClearMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Ring> data;

  ClearMatrix() = default;
  ClearMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}
  Ring& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  Ring at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

ClearMatrix clear_matmul_quantized(const ClearMatrix& a, const ClearMatrix& b,
                                   Rounding mode, const FixedConfig& cfg,
                                   Rng& rng);

}  // namespace deepmpc
