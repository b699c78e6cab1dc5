#include "deepmpc/prg.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>

namespace deepmpc {
namespace {

constexpr std::size_t kBufWords = 1024;

void ensure_sodium() {
  static const int rc = sodium_init();
  if (rc < 0) throw std::runtime_error("libsodium initialization failed");
}

}  // namespace

Prg::Prg() : Prg(PrgKey{}) {}

Prg::Prg(const PrgKey& key) : key_(key), buf_(kBufWords), pos_(kBufWords) {
  ensure_sodium();
}

void Prg::refill() {
  static const std::uint8_t kNonce[crypto_stream_chacha20_NONCEBYTES] = {};
  auto* bytes = reinterpret_cast<unsigned char*>(buf_.data());
  const std::size_t len = buf_.size() * sizeof(Ring);
  std::memset(bytes, 0, len);
  crypto_stream_chacha20_xor_ic(bytes, bytes, len, kNonce, block_, key_.data());
  block_ += len / 64;
  pos_ = 0;
}

Ring Prg::next() {
  if (pos_ == buf_.size()) refill();
  return buf_[pos_++];
}

void Prg::fill(std::span<Ring> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    if (pos_ == buf_.size()) refill();
    std::size_t take = std::min(out.size() - done, buf_.size() - pos_);
    std::memcpy(out.data() + done, buf_.data() + pos_, take * sizeof(Ring));
    pos_ += take;
    done += take;
  }
}

std::vector<Ring> Prg::draw(std::size_t n) {
  std::vector<Ring> v(n);
  fill(v);
  return v;
}

PrgKey derive_key(std::span<const std::uint8_t> seed, const char* label,
                  std::uint32_t a, std::uint32_t b) {
  ensure_sodium();
  PrgKey out{};
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, out.size());
  crypto_generichash_update(&st, seed.data(), seed.size());
  crypto_generichash_update(&st, reinterpret_cast<const unsigned char*>(label),
                            std::strlen(label));
  std::uint8_t idx[8];
  for (int i = 0; i < 4; ++i) {
    idx[i] = static_cast<std::uint8_t>(a >> (8 * i));
    idx[4 + i] = static_cast<std::uint8_t>(b >> (8 * i));
  }
  crypto_generichash_update(&st, idx, sizeof(idx));
  crypto_generichash_final(&st, out.data(), out.size());
  return out;
}

PrgKey random_key() {
  ensure_sodium();
  PrgKey k;
  randombytes_buf(k.data(), k.size());
  return k;
}

}  // namespace deepmpc
