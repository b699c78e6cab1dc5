#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "deepmpc/ring.hpp"
#include "deepmpc/shares.hpp"
#include "deepmpc/transport.hpp"

namespace deepmpc {

enum class BackendMode { mpc3, emulate };

const char* to_string(BackendMode m);

// Call counts of the interactive primitives; tests use these to assert the
// structure of composed protocols.
struct OpCounters {
  std::uint64_t input = 0;
  std::uint64_t open = 0;
  std::uint64_t mul = 0;
  std::uint64_t matmul = 0;
  std::uint64_t trunc = 0;
  std::uint64_t and_words = 0;
  std::uint64_t a2b = 0;
  std::uint64_t b2a = 0;
  std::uint64_t bit2a = 0;
  std::uint64_t ltz = 0;
  std::uint64_t div = 0;
};

struct DaBits {
  ArithVec arith;
  BinVec bin;  // the bit sits in bit 0 of each word
};

struct LinearTerm {
  Ring coeff;
  const ArithVec* x;
};

class Backend {
 public:
  Backend(BackendMode mode, const FixedConfig& cfg, Rounding rounding);
  virtual ~Backend();

  Backend(const Backend&) = delete;
  Backend& operator=(const Backend&) = delete;

  BackendMode mode() const { return mode_; }
  const FixedConfig& cfg() const { return cfg_; }
  Rounding rounding() const { return rounding_; }
  void set_rounding(Rounding r) { rounding_ = r; }
  OpCounters& counters() { return counters_; }

  virtual int party() const = 0;
  // Whether this process supplies inputs on behalf of `owner`. The emulator
  // plays every role.
  virtual bool plays(int owner) const = 0;
  virtual int parts() const = 0;
  // Component slot that carries public constants for this party, or -1.
  virtual int const_part() const = 0;

  // Public values as (trivial) sharings.
  ArithVec zeros(std::size_t n) const { return ArithVec(n, parts()); }
  ArithVec constant(std::span<const Ring> c) const;
  ArithVec constant(std::size_t n, Ring c) const;
  BinVec bzeros(std::size_t n) const { return BinVec(n, parts()); }
  BinVec bconstant(std::size_t n, Ring c) const;
  ArithVec add_public(const ArithVec& a, Ring c) const;
  ArithVec add_public(const ArithVec& a, std::span<const Ring> c) const;
  BinVec xor_public(const BinVec& a, Ring c) const;
  BinVec not_bits(const BinVec& a, Ring mask) const { return xor_public(band_public(a, mask), mask); }
  ArithVec share_linear(std::span<const LinearTerm> terms, Ring c) const;

  // The owner passes exactly n values; everyone else passes none.
  virtual ArithVec input(int owner, std::span<const Ring> values, std::size_t n) = 0;
  virtual std::vector<Ring> open(const ArithVec& x) = 0;
  virtual ArithVec mul(const ArithVec& a, const ArithVec& b) = 0;
  // Raw product of row-major m×n and n×p matrices; no truncation.
  virtual ArithVec matmul(const ArithVec& a, const ArithVec& b, std::size_t m,
                          std::size_t n, std::size_t p) = 0;
  ArithVec dot(const ArithVec& x, const ArithVec& y);

  // Division by 2^shift of values below 2^(bit_length-1) in magnitude.
  virtual ArithVec trunc(const ArithVec& x, int bit_length, int shift,
                         Rounding mode) = 0;
  ArithVec trunc(const ArithVec& x, int shift) {
    return trunc(x, cfg_.k + shift, shift, rounding_);
  }

  virtual BinVec and_bits(const BinVec& a, const BinVec& b) = 0;
  virtual std::vector<Ring> open_bin(const BinVec& x) = 0;
  virtual BinVec a2b(const ArithVec& x) = 0;
  BinVec a2b(const ArithVec& x, int bits);
  // Arithmetic value of the low `bits` bits of each word.
  virtual ArithVec b2a(const BinVec& x, int bits) = 0;
  // Arithmetic value of bit 0 of each word.
  virtual ArithVec bit2a(const BinVec& x) = 0;
  virtual DaBits dabits(std::size_t n) = 0;
  // Uniformly random words unknown to every party.
  virtual BinVec random_bits(std::size_t n) = 0;

  virtual CommStats comm() const = 0;

 protected:
  BackendMode mode_;
  FixedConfig cfg_;
  Rounding rounding_;
  OpCounters counters_;
};

std::unique_ptr<Backend> make_backend(BackendMode mode, const FixedConfig& cfg,
                                      Rounding rounding, std::uint64_t seed,
                                      Session* session = nullptr);

}  // namespace deepmpc
