#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "deepmpc/prg.hpp"
#include "deepmpc/ring.hpp"

namespace deepmpc {

using Bytes = std::vector<std::uint8_t>;

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SetupError : public TransportError {
 public:
  using TransportError::TransportError;
};

struct PartyId {
  int id = 0;
  PartyId next() const { return {(id + 1) % 3}; }
  PartyId prev() const { return {(id + 2) % 3}; }
  bool operator==(const PartyId&) const = default;
};

struct CommStats {
  std::uint64_t bits_sent = 0;
  std::uint64_t rounds = 0;

  CommStats& operator+=(const CommStats& o) {
    bits_sent += o.bits_sent;
    rounds += o.rounds;
    return *this;
  }
  friend CommStats operator-(CommStats a, const CommStats& b) {
    a.bits_sent -= b.bits_sent;
    a.rounds -= b.rounds;
    return a;
  }
  bool operator==(const CommStats&) const = default;
};

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;
};

using SessionSeed = std::array<std::uint8_t, 32>;

SessionSeed seed_from_u64(std::uint64_t v);

struct SessionConfig {
  int my_id = 0;
  std::array<Endpoint, 3> endpoints;
  // Test mode derives every pairwise key from this shared seed. That is
  // insecure by construction: anyone holding the seed knows all keys.
  bool test_mode = true;
  SessionSeed session_seed{};
  int connect_timeout_ms = 30000;
};

// One direction-pair to a single peer. Frames are delivered in send order.
class Channel {
 public:
  virtual ~Channel() = default;
  virtual void send(Bytes frame) = 0;
  virtual Bytes recv() = 0;
};

struct PrgSeedPair {
  PrgKey key_next{};  // shared with P_{i+1}
  PrgKey key_prev{};  // shared with P_{i-1}
};

class Session {
 public:
  Session(PartyId id, std::unique_ptr<Channel> to_next,
          std::unique_ptr<Channel> to_prev, const PrgSeedPair& keys);
  ~Session();

  PartyId id() const { return id_; }

  struct Received {
    Bytes from_prev;
    Bytes from_next;
  };

  // One round: a frame (possibly empty) goes to each neighbor and one frame
  // is received from each.
  Received exchange(const Bytes& to_next, const Bytes& to_prev);
  Bytes exchange_next(const Bytes& to_next, std::size_t expect_from_prev);

  struct ReceivedWords {
    std::vector<Ring> from_prev;
    std::vector<Ring> from_next;
  };
  ReceivedWords exchange_words(std::span<const Ring> to_next,
                               std::span<const Ring> to_prev);

  CommStats comm_snapshot() const;

  Prg& prg_next() { return prg_next_; }
  Prg& prg_prev() { return prg_prev_; }

  // Records every received frame; used by transcript tests.
  void set_tracing(bool on) { tracing_ = on; }
  const std::vector<Bytes>& transcript() const { return transcript_; }

 private:
  PartyId id_;
  std::unique_ptr<Channel> next_;
  std::unique_ptr<Channel> prev_;
  Prg prg_next_;
  Prg prg_prev_;
  std::atomic<std::uint64_t> bits_{0};
  std::atomic<std::uint64_t> rounds_{0};
  bool tracing_ = false;
  std::vector<Bytes> transcript_;
};

Bytes to_bytes(std::span<const Ring> words);
std::vector<Ring> from_bytes(const Bytes& b);

PrgSeedPair test_mode_keys(const SessionSeed& seed, PartyId id);

// In-process network; each party joins once from its own thread.
class LoopbackNetwork {
 public:
  explicit LoopbackNetwork(const SessionSeed& seed);
  ~LoopbackNetwork();

  std::unique_ptr<Session> join(int id);
  // Wakes all blocked receivers with an error; used when a party fails.
  void abort();

  struct Impl;

 private:
  std::shared_ptr<Impl> impl_;
  SessionSeed seed_;
  std::array<bool, 3> joined_{};
};

std::unique_ptr<Session> setup_session(const SessionConfig& cfg);

std::array<Endpoint, 3> parse_hosts_file(const std::string& path);

}  // namespace deepmpc
