#include "deepmpc/linalg.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

namespace deepmpc {
namespace {

constexpr std::size_t kBlockK = 64;
constexpr std::size_t kBlockJ = 256;

bool fits_int32(const Ring* v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    std::int64_t s = to_signed(v[i]);
    if (s < INT32_MIN || s > INT32_MAX) return false;
  }
  return true;
}

// Products of sign-extended 32-bit values are exact in 64 bits, and the
// wrapping sum is the same residue as the generic kernel computes.
void matmul_small(const Ring* a, const Ring* b, Ring* c, std::size_t m,
                  std::size_t n, std::size_t p) {
  std::vector<std::int32_t> bs(n * p);
  for (std::size_t i = 0; i < n * p; ++i)
    bs[i] = static_cast<std::int32_t>(to_signed(b[i]));
  for (std::size_t j0 = 0; j0 < p; j0 += kBlockJ) {
    std::size_t j1 = std::min(p, j0 + kBlockJ);
    for (std::size_t k0 = 0; k0 < n; k0 += kBlockK) {
      std::size_t k1 = std::min(n, k0 + kBlockK);
      for (std::size_t i = 0; i < m; ++i) {
        Ring* ci = c + i * p;
        for (std::size_t k = k0; k < k1; ++k) {
          std::int64_t aik = to_signed(a[i * n + k]);
          if (aik == 0) continue;
          const std::int32_t* bk = bs.data() + k * p;
          for (std::size_t j = j0; j < j1; ++j)
            ci[j] += static_cast<Ring>(aik * static_cast<std::int64_t>(bk[j]));
        }
      }
    }
  }
}

void matmul_generic(const Ring* a, const Ring* b, Ring* c, std::size_t m,
                    std::size_t n, std::size_t p) {
  for (std::size_t j0 = 0; j0 < p; j0 += kBlockJ) {
    std::size_t j1 = std::min(p, j0 + kBlockJ);
    for (std::size_t k0 = 0; k0 < n; k0 += kBlockK) {
      std::size_t k1 = std::min(n, k0 + kBlockK);
      for (std::size_t i = 0; i < m; ++i) {
        Ring* ci = c + i * p;
        for (std::size_t k = k0; k < k1; ++k) {
          Ring aik = a[i * n + k];
          const Ring* bk = b + k * p;
          for (std::size_t j = j0; j < j1; ++j) ci[j] += aik * bk[j];
        }
      }
    }
  }
}

}  // namespace

void matmul_acc(const Ring* a, const Ring* b, Ring* c, std::size_t m,
                std::size_t n, std::size_t p) {
  if (m == 0 || n == 0 || p == 0) return;
  if (fits_int32(a, m * n) && fits_int32(b, n * p))
    matmul_small(a, b, c, m, n, p);
  else
    matmul_generic(a, b, c, m, n, p);
}

void transpose(const Ring* in, Ring* out, std::size_t r, std::size_t c) {
  constexpr std::size_t kTile = 32;
  for (std::size_t i0 = 0; i0 < r; i0 += kTile)
    for (std::size_t j0 = 0; j0 < c; j0 += kTile)
      for (std::size_t i = i0; i < std::min(r, i0 + kTile); ++i)
        for (std::size_t j = j0; j < std::min(c, j0 + kTile); ++j)
          out[j * r + i] = in[i * c + j];
}

}  // namespace deepmpc
