#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "deepmpc/ring.hpp"

namespace deepmpc {

struct ArithDomain {};
struct BinDomain {};

// A batch of secrets as seen by one party: `parts` component blocks of n
// ring words each (one block when emulating, two under replication).
template <class Domain>
class ShareVec {
 public:
  ShareVec() = default;
  ShareVec(std::size_t n, int parts) : n_(n), parts_(parts), data_(n * parts) {}

  std::size_t size() const { return n_; }
  int parts() const { return parts_; }
  bool empty() const { return n_ == 0; }

  std::span<Ring> part(int p) { return {data_.data() + p * n_, n_}; }
  std::span<const Ring> part(int p) const { return {data_.data() + p * n_, n_}; }

  Ring& at(int p, std::size_t i) { return data_[p * n_ + i]; }
  Ring at(int p, std::size_t i) const { return data_[p * n_ + i]; }

  ShareVec slice(std::size_t begin, std::size_t count) const {
    ShareVec out(count, parts_);
    for (int p = 0; p < parts_; ++p)
      for (std::size_t i = 0; i < count; ++i) out.at(p, i) = at(p, begin + i);
    return out;
  }

  void assign(std::size_t begin, const ShareVec& src) {
    for (int p = 0; p < parts_; ++p)
      for (std::size_t i = 0; i < src.size(); ++i) at(p, begin + i) = src.at(p, i);
  }

  // out[i] = this[idx[i]], or zero where idx[i] == kZero.
  static constexpr std::size_t kZero = static_cast<std::size_t>(-1);
  ShareVec gather(std::span<const std::size_t> idx) const {
    ShareVec out(idx.size(), parts_);
    for (int p = 0; p < parts_; ++p) {
      const Ring* src = data_.data() + p * n_;
      Ring* dst = out.data_.data() + p * idx.size();
      for (std::size_t i = 0; i < idx.size(); ++i)
        dst[i] = idx[i] == kZero ? 0 : src[idx[i]];
    }
    return out;
  }

 private:
  std::size_t n_ = 0;
  int parts_ = 0;
  std::vector<Ring> data_;
};

using ArithVec = ShareVec<ArithDomain>;
using BinVec = ShareVec<BinDomain>;

template <class D>
ShareVec<D> concat(const std::vector<const ShareVec<D>*>& vs) {
  std::size_t n = 0;
  int parts = vs.empty() ? 0 : vs.front()->parts();
  for (auto* v : vs) n += v->size();
  ShareVec<D> out(n, parts);
  std::size_t off = 0;
  for (auto* v : vs) {
    out.assign(off, *v);
    off += v->size();
  }
  return out;
}

// Local arithmetic operations. None of these communicate.
ArithVec add(const ArithVec& a, const ArithVec& b);
ArithVec sub(const ArithVec& a, const ArithVec& b);
ArithVec neg(const ArithVec& a);
ArithVec scale(const ArithVec& a, Ring c);
ArithVec scale(const ArithVec& a, std::span<const Ring> c);
void add_inplace(ArithVec& a, const ArithVec& b);
void sub_inplace(ArithVec& a, const ArithVec& b);

// Sums consecutive groups of `group` elements.
ArithVec sum_groups(const ArithVec& a, std::size_t group);

// Transpose of a row-major r×c matrix held as shares.
ArithVec transpose(const ArithVec& a, std::size_t r, std::size_t c);

// Local binary operations on 64-bit words.
BinVec bxor(const BinVec& a, const BinVec& b);
BinVec band_public(const BinVec& a, Ring mask);
BinVec bshl(const BinVec& a, int s);
BinVec bshr(const BinVec& a, int s);   // logical
BinVec bsar(const BinVec& a, int s);   // sign-extending
// Moves bit `bit` of each word to bit 0, clearing the rest.
BinVec bit_at(const BinVec& a, int bit);
// Parity of (word & mask), in bit 0.
BinVec parity(const BinVec& a, Ring mask);
// Reverses the low `width` bits of each word; higher bits are cleared.
BinVec reverse_bits(const BinVec& a, int width);

}  // namespace deepmpc
