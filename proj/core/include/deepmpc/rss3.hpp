#pragma once

#include "deepmpc/backend.hpp"

namespace deepmpc {

// Three-party replicated secret sharing over Z_{2^64} (and Z_2 bit-sliced
// into words). Party i holds the components (x_{i-1}, x_{i+1}) in parts 0
// and 1. Component j is known to parties j-1 and j+1, so the pairwise PRG
// shared by i and i+1 generates component i-1.
class Rss3Backend : public Backend {
 public:
  Rss3Backend(Session& session, const FixedConfig& cfg, Rounding rounding);

  Session& session() { return session_; }

  int party() const override { return id_; }
  bool plays(int owner) const override { return owner == id_; }
  int parts() const override { return 2; }
  // Public constants live in component 0.
  int const_part() const override { return id_ == 0 ? -1 : (id_ == 1 ? 0 : 1); }

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
  CommStats comm() const override { return session_.comm_snapshot(); }

  // Replicated random value; needs no communication.
  ArithVec random_arith(std::size_t n);

 private:
  // Reshares a local additive term z_i, returning the replicated result.
  ArithVec reshare(std::vector<Ring> t);
  BinVec reshare_bin(std::vector<Ring> t);
  ArithVec trunc_prob(const ArithVec& x, int bit_length, int shift);
  ArithVec trunc_nearest(const ArithVec& x, int shift);

  // The sharing of component j's value alone, for j = 0, 1, 2.
  template <class D>
  ShareVec<D> single_component(const ShareVec<D>& x, int j) const;

  Session& session_;
  int id_;
};

}  // namespace deepmpc
