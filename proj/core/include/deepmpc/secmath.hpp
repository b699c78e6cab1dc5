#pragma once

#include "deepmpc/backend.hpp"

namespace deepmpc {

// Fixed-point functions over shares. Every operation takes a batch and runs
// its rounds once for the whole batch.

// [x < 0], in bit 0 of each word.
BinVec ltz(Backend& be, const ArithVec& x);
// [x < y]
BinVec less_than(Backend& be, const ArithVec& x, const ArithVec& y);

// x where b = 0, y where b = 1.
ArithVec mux(Backend& be, const BinVec& b, const ArithVec& x, const ArithVec& y);
// Same with the selector already in the arithmetic domain.
ArithVec mux_arith(Backend& be, const ArithVec& b, const ArithVec& x,
                   const ArithVec& y);
ArithVec max(Backend& be, const ArithVec& x, const ArithVec& y);

// Product of two fixed-point values, rounded back to precision f.
ArithVec fx_mul(Backend& be, const ArithVec& a, const ArithVec& b);
ArithVec fx_mul_public(Backend& be, const ArithVec& a, double c);

// One-hot word with bit e+f set, where 2^(e-1) <= x <= 2^e.
BinVec np2(Backend& be, const ArithVec& x);

ArithVec div(Backend& be, const ArithVec& a, const ArithVec& b);
ArithVec exp2(Backend& be, const ArithVec& x);
ArithVec exp_e(Backend& be, const ArithVec& x);
ArithVec log2(Backend& be, const ArithVec& x);
ArithVec invert_sqrt(Backend& be, const ArithVec& x);

// Uniform on [0, 2^e) at precision f.
ArithVec rand_fraction(Backend& be, std::size_t n, int e);
// {0,1} draws (as integers, not fixed point) with mean p.
ArithVec bernoulli(Backend& be, std::size_t n, double p);

namespace secmath_constants {
// Goldschmidt iterations after the linear initial approximation.
inline constexpr int kDivIterations = 2;
// Extra fractional bits used inside the exp2 Taylor evaluation.
inline constexpr int kExpGuardBits = 8;
inline constexpr int kExpTaylorDegree = 8;
// The square-root compensation carries one more power of two than the
// exponent bookkeeping accounts for; it is removed in the final rounding.
inline constexpr int kSqrtCompShift = 1;
// Odd terms of 2·atanh(t) used by log2.
inline constexpr int kLogTerms = 5;
}  // namespace secmath_constants

}  // namespace deepmpc
