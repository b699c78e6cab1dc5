#include "deepmpc/roundlab.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

namespace deepmpc {

namespace {

Rng trial_rng(std::uint64_t seed, std::size_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return Rng(seq);
}

// Exact 2^-f·Q(A)Q(B) as doubles (the integer product is exact in 64 bits).
std::vector<double> expected_product(const ClearMatrix& a, const ClearMatrix& b, int f) {
  std::vector<double> e(a.rows * b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j) {
      long double s = 0;
      for (std::size_t l = 0; l < a.cols; ++l)
        s += static_cast<long double>(to_signed(a.at(i, l) * b.at(l, j)));
      e[i * b.cols + j] = static_cast<double>(std::ldexp(s, -f));
    }
  return e;
}

double deviation_norm(const ClearMatrix& r, const std::vector<double>& ref) {
  long double s = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    long double d = static_cast<long double>(to_signed(r.data[i])) - ref[i];
    s += d * d;
  }
  return static_cast<double>(std::sqrt(s));
}

}  // namespace

const char* to_string(RoundingClaim c) {
  switch (c) {
    case RoundingClaim::prop1: return "prop1";
    case RoundingClaim::prop2: return "prop2";
    case RoundingClaim::prop3: return "prop3";
  }
  return "?";
}

RoundingClaim parse_claim(const std::string& s) {
  if (s == "prop1") return RoundingClaim::prop1;
  if (s == "prop2") return RoundingClaim::prop2;
  if (s == "prop3") return RoundingClaim::prop3;
  throw ConfigError("unknown experiment '" + s + "' (expected prop1, prop2 or prop3)");
}

void RoundingExperiment::validate() const {
  if (m == 0 || n == 0 || p == 0) throw ConfigError("matrix dimensions must be at least 1");
  if (trials == 0) throw ConfigError("trials must be at least 1");
  if (k_bound < 0 || f <= 0 || 2 * (k_bound + f) + 1 + std::bit_width(n) > 62)
    throw ConfigError("k_bound and f leave no headroom in the 64-bit ring");
  if (!(iota > 0)) throw ConfigError("iota must be positive");
}

ClearMatrix rounded_product(const ClearMatrix& a, const ClearMatrix& b, int f,
                            Rounding mode, Rng& rng, bool deferred) {
  if (a.cols != b.rows) throw ShapeError("inner dimensions differ");
  if (deferred) {
    FixedConfig cfg;
    cfg.f = f;
    return clear_matmul_quantized(a, b, mode, cfg, rng);
  }
  ClearMatrix r(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j) {
      Ring s = 0;
      for (std::size_t l = 0; l < a.cols; ++l) {
        Ring prod = a.at(i, l) * b.at(l, j);
        s += mode == Rounding::prob ? round_prob_outcome(prod, f, rng).result()
                                    : round_nearest_shift(prod, f);
      }
      r.at(i, j) = s;
    }
  return r;
}

std::vector<double> random_reals(std::size_t count, int k_bound, Rng& rng) {
  const double lim = std::ldexp(1.0, k_bound);
  std::uniform_real_distribution<double> u(-lim, lim);
  std::vector<double> out(count);
  for (auto& x : out) {
    do x = u(rng);
    while (std::abs(x) >= lim);
  }
  return out;
}

ClearMatrix quantize(const std::vector<double>& reals, std::size_t rows, std::size_t cols,
                     int f) {
  ClearMatrix out(rows, cols);
  for (std::size_t i = 0; i < reals.size(); ++i) out.data[i] = fx_encode_raw(reals[i], f);
  return out;
}

ClearMatrix random_quantized(std::size_t rows, std::size_t cols, int k_bound, int f, Rng& rng) {
  return quantize(random_reals(rows * cols, k_bound, rng), rows, cols, f);
}

RoundingReport run_rounding_experiment(const RoundingExperiment& spec, RoundingClaim which,
                                       std::ostream* csv) {
  spec.validate();
  RoundingReport rep;
  rep.claim = which;
  rep.trials = spec.trials;
  const double mp = static_cast<double>(spec.m * spec.p);
  const double n = static_cast<double>(spec.n);
  const double eps = std::ldexp(1.0, -spec.f);
  if (csv) *csv << "claim,trial,norm,bound\n";

  if (which == RoundingClaim::prop1) {
    // Fixed matrices, fresh rounding each trial.
    Rng setup = trial_rng(spec.seed, ~std::size_t{0});
    ClearMatrix a = random_quantized(spec.m, spec.n, spec.k_bound, spec.f, setup);
    ClearMatrix b = random_quantized(spec.n, spec.p, spec.k_bound, spec.f, setup);
    auto e = expected_product(a, b, spec.f);
    std::vector<double> sum(e.size()), sq(e.size());
    for (std::size_t t = 0; t < spec.trials; ++t) {
      Rng rng = trial_rng(spec.seed, t);
      ClearMatrix r = rounded_product(a, b, spec.f, Rounding::prob, rng, spec.deferred);
      for (std::size_t i = 0; i < e.size(); ++i) {
        double d = static_cast<double>(to_signed(r.data[i])) - e[i];
        sum[i] += d;
        sq[i] += d * d;
      }
      double norm = deviation_norm(r, e);
      rep.max_norm = std::max(rep.max_norm, norm);
      if (csv) *csv << "prop1," << t << ',' << norm << ",\n";
    }
    const double trials = static_cast<double>(spec.trials);
    for (std::size_t i = 0; i < e.size(); ++i) {
      double mean = sum[i] / trials;
      double var = trials > 1 ? (sq[i] - trials * mean * mean) / (trials - 1) : 0.0;
      double se = std::sqrt(std::max(var, 0.0) / trials);
      double z = se > 0 ? std::abs(mean) / se : (mean == 0 ? 0.0 : INFINITY);
      rep.statistic = std::max(rep.statistic, z);
      if (z > 4) ++rep.violations;
    }
    rep.threshold = 4;
    rep.pass = rep.violations == 0;
  } else if (which == RoundingClaim::prop2) {
    rep.bound = std::sqrt(mp) * n * (std::ldexp(1.0, spec.k_bound) + 1 + eps / 4);
    for (std::size_t t = 0; t < spec.trials; ++t) {
      Rng rng = trial_rng(spec.seed, t);
      auto ra = random_reals(spec.m * spec.n, spec.k_bound, rng);
      auto rb = random_reals(spec.n * spec.p, spec.k_bound, rng);
      ClearMatrix a = quantize(ra, spec.m, spec.n, spec.f);
      ClearMatrix b = quantize(rb, spec.n, spec.p, spec.f);
      // Reference is 2^f·AB over the real entries, not their codes.
      std::vector<double> exact(spec.m * spec.p);
      for (std::size_t i = 0; i < spec.m; ++i)
        for (std::size_t j = 0; j < spec.p; ++j) {
          long double s = 0;
          for (std::size_t l = 0; l < spec.n; ++l)
            s += static_cast<long double>(ra[i * spec.n + l]) * rb[l * spec.p + j];
          exact[i * spec.p + j] = static_cast<double>(std::ldexp(s, spec.f));
        }
      ClearMatrix r = rounded_product(a, b, spec.f, Rounding::prob, rng, spec.deferred);
      double norm = deviation_norm(r, exact);
      rep.max_norm = std::max(rep.max_norm, norm);
      if (!(norm < rep.bound)) ++rep.violations;
      if (csv) *csv << "prop2," << t << ',' << norm << ',' << rep.bound << '\n';
    }
    rep.statistic = rep.max_norm / rep.bound;
    rep.threshold = 1;
    rep.pass = rep.violations == 0;
  } else {
    rep.bound = spec.iota * std::sqrt(mp * n);
    for (std::size_t t = 0; t < spec.trials; ++t) {
      Rng rng = trial_rng(spec.seed, t);
      ClearMatrix a = random_quantized(spec.m, spec.n, spec.k_bound, spec.f, rng);
      ClearMatrix b = random_quantized(spec.n, spec.p, spec.k_bound, spec.f, rng);
      auto e = expected_product(a, b, spec.f);
      ClearMatrix r = rounded_product(a, b, spec.f, Rounding::prob, rng, spec.deferred);
      double norm = deviation_norm(r, e);
      rep.max_norm = std::max(rep.max_norm, norm);
      if (norm > rep.bound) ++rep.violations;
      if (csv) *csv << "prop3," << t << ',' << norm << ',' << rep.bound << '\n';
    }
    const double ceiling = 1.0 / (4 * spec.iota * spec.iota);
    const double trials = static_cast<double>(spec.trials);
    rep.statistic = static_cast<double>(rep.violations) / trials;
    rep.threshold =
        std::min(1.0, ceiling) + 3 * std::sqrt(std::min(1.0, ceiling) * (1 - std::min(1.0, ceiling)) / trials);
    rep.pass = rep.statistic <= rep.threshold;
  }
  if (csv)
    *csv << "# summary claim=" << to_string(which) << " trials=" << rep.trials
         << " statistic=" << rep.statistic << " threshold=" << rep.threshold
         << " violations=" << rep.violations << " max_norm=" << rep.max_norm
         << " result=" << (rep.pass ? "pass" : "fail") << '\n';
  return rep;
}

BiasWitness nearest_bias_witness(std::size_t m, std::size_t n, std::size_t p,
                                 std::size_t trials, int f, std::uint64_t seed) {
  // Q(x) = 1 and Q(y) = 2^(f-2): each product is exactly a quarter step.
  ClearMatrix a(m, n), b(n, p);
  std::fill(a.data.begin(), a.data.end(), Ring{1});
  std::fill(b.data.begin(), b.data.end(), Ring{1} << (f - 2));
  auto e = expected_product(a, b, f);
  Rng rng(seed);
  double near_sum = 0, prob_sum = 0, prob_sq = 0;
  const double cells = static_cast<double>(e.size());
  for (std::size_t t = 0; t < trials; ++t) {
    ClearMatrix rn = rounded_product(a, b, f, Rounding::nearest, rng);
    ClearMatrix rp = rounded_product(a, b, f, Rounding::prob, rng);
    double dn = 0, dp = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      dn += static_cast<double>(to_signed(rn.data[i])) - e[i];
      dp += static_cast<double>(to_signed(rp.data[i])) - e[i];
    }
    near_sum += dn / cells;
    prob_sum += dp / cells;
    prob_sq += (dp / cells) * (dp / cells);
  }
  const double tr = static_cast<double>(trials);
  BiasWitness w;
  w.nearest_bias = near_sum / tr;
  w.prob_bias = prob_sum / tr;
  double var = tr > 1 ? (prob_sq - tr * w.prob_bias * w.prob_bias) / (tr - 1) : 0.0;
  w.prob_stderr = std::sqrt(std::max(var, 0.0) / tr);
  return w;
}

}  // namespace deepmpc
