#pragma once

#include "deepmpc/backend.hpp"

namespace deepmpc {

// Runs the quantized computation in the clear. Randomness comes from one
// seeded stream, drawn in call order: one word per probabilistic rounding,
// one word per random binary word, one word per daBit.
class EmulatorBackend : public Backend {
 public:
  EmulatorBackend(const FixedConfig& cfg, Rounding rounding, std::uint64_t seed);

  int party() const override { return 0; }
  bool plays(int) const override { return true; }
  int parts() const override { return 1; }
  int const_part() const override { return 0; }

  ArithVec input(int owner, std::span<const Ring> values, std::size_t n) override;
  std::vector<Ring> open(const ArithVec& x) override;
  ArithVec mul(const ArithVec& a, const ArithVec& b) override;
  ArithVec matmul(const ArithVec& a, const ArithVec& b, std::size_t m,
                  std::size_t n, std::size_t p) override;
  ArithVec trunc(const ArithVec& x, int bit_length, int shift,
                 Rounding mode) override;
  using Backend::trunc;
  BinVec and_bits(const BinVec& a, const BinVec& b) override;
  std::vector<Ring> open_bin(const BinVec& x) override;
  BinVec a2b(const ArithVec& x) override;
  using Backend::a2b;
  ArithVec b2a(const BinVec& x, int bits) override;
  ArithVec bit2a(const BinVec& x) override;
  DaBits dabits(std::size_t n) override;
  BinVec random_bits(std::size_t n) override;
  CommStats comm() const override { return {}; }

 private:
  Rng rng_;
};

}  // namespace deepmpc
