#pragma once

#include <cstdint>
#include <ostream>
#include <string>

#include "deepmpc/ring.hpp"

namespace deepmpc {

enum class RoundingClaim { prop1, prop2, prop3 };

const char* to_string(RoundingClaim c);
RoundingClaim parse_claim(const std::string& s);

struct RoundingExperiment {
  std::size_t m = 8, n = 8, p = 8;
  int k_bound = 4;       // entries satisfy |x| < 2^k_bound
  double iota = 1.0;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  int f = 16;
  // Round once per output entry instead of once per scalar product.
  bool deferred = false;

  void validate() const;
};

struct RoundingReport {
  RoundingClaim claim = RoundingClaim::prop1;
  std::size_t trials = 0;
  // prop1: largest |z| over entries; prop2: largest norm/bound ratio;
  // prop3: fraction of trials over ι·sqrt(mnp).
  double statistic = 0;
  double threshold = 0;
  std::size_t violations = 0;
  double max_norm = 0;
  double bound = 0;
  bool pass = false;
};

// R(AB) with every scalar product rounded separately:
// R_ij = Σ_l round(Q(A_il)·Q(B_lj) / 2^f).
ClearMatrix rounded_product(const ClearMatrix& a, const ClearMatrix& b, int f,
                            Rounding mode, Rng& rng, bool deferred = false);

std::vector<double> random_reals(std::size_t count, int k_bound, Rng& rng);
ClearMatrix quantize(const std::vector<double>& reals, std::size_t rows, std::size_t cols,
                     int f);
// Matrix of Q^f values with |x| < 2^k_bound.
ClearMatrix random_quantized(std::size_t rows, std::size_t cols, int k_bound, int f, Rng& rng);

// Writes one CSV row per trial (claim,trial,norm,bound) and a summary row
// when csv is non-null.
RoundingReport run_rounding_experiment(const RoundingExperiment& spec, RoundingClaim which,
                                       std::ostream* csv = nullptr);

// Products whose exact value has fractional part 1/4: nearest rounding is
// off by the same amount every time, probabilistic rounding is not.
struct BiasWitness {
  double nearest_bias = 0;  // mean of R - E, nearest rounding
  double prob_bias = 0;     // same, probabilistic rounding
  double prob_stderr = 0;   // standard error of the probabilistic mean
  double nearest_z() const { return prob_stderr > 0 ? nearest_bias / prob_stderr : 0; }
  double prob_z() const { return prob_stderr > 0 ? prob_bias / prob_stderr : 0; }
};

BiasWitness nearest_bias_witness(std::size_t m, std::size_t n, std::size_t p,
                                 std::size_t trials, int f, std::uint64_t seed);

}  // namespace deepmpc
