#pragma once

#include <array>
#include <functional>

#include "deepmpc/backend.hpp"
#include "deepmpc/transport.hpp"

namespace deepmpc {

// Runs fn for parties 0, 1 and 2 on threads over a loopback network and
// rethrows the first failure after all threads have stopped.
void run_three_parties(const SessionSeed& seed,
                       const std::function<void(Session&)>& fn);

// Same, with an Rss3Backend built for each party.
void run_three_backends(const SessionSeed& seed, const FixedConfig& cfg,
                        Rounding rounding,
                        const std::function<void(Backend&)>& fn);

// Sum of the per-party counters of a finished run.
struct PartyComm {
  std::array<CommStats, 3> per_party{};
  CommStats total() const {
    CommStats t;
    for (const auto& c : per_party) t.bits_sent += c.bits_sent;
    t.rounds = per_party[0].rounds;
    return t;
  }
};

}  // namespace deepmpc
