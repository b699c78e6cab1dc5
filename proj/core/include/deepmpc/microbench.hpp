#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "deepmpc/backend.hpp"

namespace deepmpc {

struct MicrobenchResult {
  std::string op;
  std::size_t size = 0;       // vector length (dot: vector length of one product)
  std::size_t instances = 0;  // independent results produced
  Rounding rounding = Rounding::prob;
  std::uint64_t bits = 0;     // payload bits, all parties together
  std::uint64_t rounds = 0;
  double seconds = 0;
  double bits_per_instance() const {
    return instances ? static_cast<double>(bits) / static_cast<double>(instances) : 0.0;
  }
};

std::vector<std::string> microbench_ops();

// Runs op on `size` random inputs with three parties on a loopback network.
// Only the operation itself is counted, not the input sharing.
MicrobenchResult run_microbench(const std::string& op, std::size_t size, BackendMode mode,
                                Rounding rounding = Rounding::prob,
                                const FixedConfig& cfg = {}, std::uint64_t seed = 1);

void write_microbench_csv(std::ostream& out, const std::vector<MicrobenchResult>& rows);

}  // namespace deepmpc
