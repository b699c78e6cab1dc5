#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "deepmpc/ring.hpp"

namespace deepmpc {

using PrgKey = std::array<std::uint8_t, 32>;

// ChaCha20 keystream in counter mode. Two parties holding the same key
// draw identical words as long as they draw in the same order.
class Prg {
 public:
  Prg();
  explicit Prg(const PrgKey& key);

  Ring next();
  void fill(std::span<Ring> out);
  std::vector<Ring> draw(std::size_t n);

 private:
  void refill();

  PrgKey key_{};
  std::uint64_t block_ = 0;
  std::vector<Ring> buf_;
  std::size_t pos_ = 0;
};

// Hash of (seed, label, a, b); used for test-mode key derivation only.
PrgKey derive_key(std::span<const std::uint8_t> seed, const char* label,
                  std::uint32_t a, std::uint32_t b);

PrgKey random_key();

}  // namespace deepmpc
