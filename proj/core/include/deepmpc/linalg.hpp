#pragma once

#include <cstddef>

#include "deepmpc/ring.hpp"

namespace deepmpc {

// C (m×p) += A (m×n) · B (n×p), all row-major, modulo 2^64.
void matmul_acc(const Ring* a, const Ring* b, Ring* c, std::size_t m,
                std::size_t n, std::size_t p);

// Row-major transpose of an r×c matrix into out (c×r).
void transpose(const Ring* in, Ring* out, std::size_t r, std::size_t c);

}  // namespace deepmpc
