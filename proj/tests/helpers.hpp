#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <mutex>
#include <vector>

#include "deepmpc/backend.hpp"
#include "deepmpc/emulator.hpp"
#include "deepmpc/parties.hpp"

namespace deepmpc::testing {

inline ArithVec share(Backend& be, const std::vector<Ring>& v, int owner = 0) {
  return be.input(owner, be.plays(owner) ? std::span<const Ring>(v) : std::span<const Ring>(),
                  v.size());
}

inline std::vector<Ring> concat_open(Backend& be, const ArithVec& a, const ArithVec& b) {
  return be.open(concat<ArithDomain>({&a, &b}));
}

inline std::vector<Ring> encode(const std::vector<double>& xs, int f = 16) {
  std::vector<Ring> out;
  for (double x : xs) out.push_back(fx_encode_raw(x, f));
  return out;
}

inline std::vector<double> decode(const std::vector<Ring>& raw, int f = 16) {
  std::vector<double> out;
  for (Ring r : raw) out.push_back(std::ldexp(static_cast<double>(to_signed(r)), -f));
  return out;
}

// Runs fn on three loopback parties; returns party 0's result after checking
// that all parties agree.
inline std::vector<Ring> three_party(const std::function<std::vector<Ring>(Backend&)>& fn,
                                     Rounding rounding = Rounding::prob,
                                     const FixedConfig& cfg = {}, std::uint64_t seed = 7,
                                     PartyComm* comm = nullptr) {
  std::array<std::vector<Ring>, 3> out;
  std::mutex mu;
  run_three_backends(seed_from_u64(seed), cfg, rounding, [&](Backend& be) {
    auto r = fn(be);
    std::lock_guard lock(mu);
    out[static_cast<std::size_t>(be.party())] = std::move(r);
    if (comm) comm->per_party[static_cast<std::size_t>(be.party())] = be.comm();
  });
  if (out[0] != out[1] || out[0] != out[2]) throw std::runtime_error("parties disagree");
  return out[0];
}

inline std::vector<Ring> emulated(const std::function<std::vector<Ring>(Backend&)>& fn,
                                  Rounding rounding = Rounding::prob,
                                  const FixedConfig& cfg = {}, std::uint64_t seed = 7) {
  EmulatorBackend be(cfg, rounding, seed);
  return fn(be);
}

}  // namespace deepmpc::testing
