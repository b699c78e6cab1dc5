#pragma once

#include <utility>

#include "deepmpc/backend.hpp"

namespace deepmpc {

// Secure gates on bit-sliced words, written against Backend::and_bits so the
// same circuits run in both backends.

// Several independent ANDs in a single round.
std::vector<BinVec> and_batch(Backend& be, const std::vector<const BinVec*>& a,
                              const std::vector<const BinVec*>& b);

BinVec bor(Backend& be, const BinVec& a, const BinVec& b);

// Carry-save step: returns (a^b^c, maj(a,b,c) << 1), one AND round.
std::pair<BinVec, BinVec> carry_save(Backend& be, const BinVec& a,
                                     const BinVec& b, const BinVec& c);

// Kogge-Stone sum of a and b modulo 2^width.
BinVec add_bits(Backend& be, const BinVec& a, const BinVec& b, int width = 64);

// out bit i = OR of input bits i..width-1.
BinVec suffix_or(Backend& be, const BinVec& x, int width);

// Bit 0 of each word packed 64 to a word, and back.
BinVec pack_bit0(const BinVec& x);
std::vector<Ring> unpack_bits(std::span<const Ring> packed, std::size_t n);

}  // namespace deepmpc
