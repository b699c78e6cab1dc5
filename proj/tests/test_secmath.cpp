#include <gtest/gtest.h>

#include <cmath>
#include <bit>
#include <numbers>
#include <random>

#include "deepmpc/bincircuit.hpp"
#include "deepmpc/secmath.hpp"
#include "helpers.hpp"

using namespace deepmpc;
using deepmpc::testing::decode;
using deepmpc::testing::emulated;
using deepmpc::testing::encode;
using deepmpc::testing::share;
using deepmpc::testing::three_party;

namespace {

constexpr double kStep = 1.0 / 65536;
// Goldschmidt residual (about 5.4e-5) plus intermediate rounding.
constexpr double kDivRel = 1.0 / 8192;

double quantized(double x) { return std::ldexp(static_cast<double>(to_signed(fx_encode_raw(x, 16))), -16); }

std::vector<double> grid(double lo, double hi, int n, bool log_scale = false) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    double t = lo + (hi - lo) * i / (n - 1);
    out.push_back(log_scale ? std::exp2(t) : t);
  }
  return out;
}

using Fn = std::function<ArithVec(Backend&, const ArithVec&)>;

std::vector<double> eval(const Fn& fn, const std::vector<double>& xs, bool mpc = false,
                         Rounding r = Rounding::nearest) {
  auto body = [&](Backend& be) { return be.open(fn(be, share(be, encode(xs)))); };
  return decode(mpc ? three_party(body, r) : emulated(body, r));
}

}  // namespace

TEST(Ltz, SmallValues) {
  auto r = three_party([](Backend& be) {
    return be.open_bin(ltz(be, share(be, {~Ring{0}, 0, 1})));
  });
  EXPECT_EQ(r, (std::vector<Ring>{1, 0, 0}));
}

TEST(Ltz, ExhaustiveSixteenBitRangeAndRandomWords) {
  std::vector<Ring> v;
  for (std::int64_t x = -32768; x < 32768; ++x) v.push_back(from_signed(x));
  Rng rng(6);
  for (int i = 0; i < 100000; ++i) v.push_back(rng());
  auto r = three_party([&](Backend& be) { return be.open_bin(ltz(be, share(be, v))); });
  for (std::size_t i = 0; i < v.size(); ++i) ASSERT_EQ(r[i], to_signed(v[i]) < 0 ? 1u : 0u) << i;
}

TEST(Mux, SelectsAndDegenerates) {
  auto r = three_party([](Backend& be) {
    auto x = share(be, encode({2.0, 2.0, 4.5, 4.5}));
    auto y = share(be, encode({7.0, 7.0, 4.5, 4.5}));
    auto b = be.a2b(share(be, {0, 1, 0, 1}), 1);
    return be.open(mux(be, b, x, y));
  });
  EXPECT_EQ(decode(r), (std::vector<double>{2.0, 7.0, 4.5, 4.5}));
}

TEST(Max, Elementwise) {
  auto r = decode(three_party([](Backend& be) {
    return be.open(max(be, share(be, encode({1, -3, 2.5})), share(be, encode({-1, -2, 2.5}))));
  }));
  EXPECT_EQ(r, (std::vector<double>{1, -2, 2.5}));
}

TEST(Np2, OneHotIndex) {
  auto r = three_party([](Backend& be) { return be.open_bin(np2(be, share(be, encode({5.0, 0.5, 1.0, 4.0, 4.0001})))); });
  EXPECT_EQ(r[0], Ring{1} << 19);
  EXPECT_EQ(r[1], Ring{1} << 15);
  EXPECT_EQ(r[2], Ring{1} << 16);  // inclusive at powers of two
  EXPECT_EQ(r[3], Ring{1} << 18);
  EXPECT_EQ(r[4], Ring{1} << 19);
}

TEST(Np2, ExactlyOneBitSet) {
  Rng rng(4);
  std::uniform_real_distribution<double> u(-15, 15);
  std::vector<double> xs;
  for (int i = 0; i < 1000; ++i) xs.push_back(std::exp2(u(rng)));
  auto r = three_party([&](Backend& be) { return be.open_bin(np2(be, share(be, encode(xs)))); });
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ASSERT_EQ(std::popcount(r[i]), 1);
    double x = quantized(xs[i]);
    int e = std::countr_zero(r[i]) - 16;
    ASSERT_LE(std::ldexp(1.0, e - 1), x);
    ASSERT_LE(x, std::ldexp(1.0, e));
  }
}

// Double-precision run of the same Goldschmidt schedule: the initial
// approximation 2.9142 - 2c on c in [0.5, 1], then `iters` refinements.
static double goldschmidt_rel_error(int iters) {
  double worst = 0;
  for (int i = 0; i <= 100000; ++i) {
    double c = 0.5 + 0.5 * i / 100000.0;
    double e = 1 - c * (2.9142 - 2 * c);
    double y = 1 - e;  // y = c·w normalised by c, i.e. the relative quotient
    for (int t = 0; t < iters; ++t) {
      y *= 1 + e;
      e *= e;
    }
    worst = std::max(worst, std::abs(y - 1));
  }
  return worst;
}

TEST(Div, IterationCountFromOracle) {
  const double target = std::ldexp(1.0, -16 + 2);
  int needed = 0;
  while (goldschmidt_rel_error(needed) >= target) ++needed;
  EXPECT_EQ(needed, secmath_constants::kDivIterations);
}

TEST(Div, Values) {
  auto r = eval([](Backend& be, const ArithVec& x) {
    return div(be, x.slice(0, 3), x.slice(3, 3));
  }, {1, 3, -6, 2, 4, 1.5}, true);
  EXPECT_NEAR(r[0], 0.5, 4 * kStep);
  EXPECT_NEAR(r[1], 0.75, 4 * kStep);
  EXPECT_NEAR(r[2], -4.0, 8 * kStep);
}

TEST(Div, SelfQuotientSweep) {
  auto xs = grid(-8, 8, 400, true);
  std::vector<double> both = xs;
  both.insert(both.end(), xs.begin(), xs.end());
  for (Rounding mode : {Rounding::nearest, Rounding::prob}) {
    auto r = eval([&](Backend& be, const ArithVec& v) {
      return div(be, v.slice(0, xs.size()), v.slice(xs.size(), xs.size()));
    }, both, true, mode);
    for (double q : r) ASSERT_NEAR(q, 1.0, 8 * kStep);
  }
}

TEST(Div, ReciprocalRelativeError) {
  auto xs = grid(-13, 13, 800, true);
  std::vector<double> in(xs.size(), 1.0);
  in.insert(in.end(), xs.begin(), xs.end());
  auto r = eval([&](Backend& be, const ArithVec& v) {
    return div(be, v.slice(0, xs.size()), v.slice(xs.size(), xs.size()));
  }, in);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double t = 1 / quantized(xs[i]);
    ASSERT_LE(std::abs(r[i] - t), kDivRel * t + 2 * kStep) << xs[i];
  }
}

TEST(Div, PowerOfTwoMatchesShift) {
  std::vector<double> a{37.25, -3.5, 100.0, 0.75};
  for (int j = 0; j < 6; ++j) {
    std::vector<double> in = a;
    for (std::size_t i = 0; i < a.size(); ++i) in.push_back(std::ldexp(1.0, j));
    auto r = eval([&](Backend& be, const ArithVec& v) {
      return div(be, v.slice(0, a.size()), v.slice(a.size(), a.size()));
    }, in, true);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(r[i], std::ldexp(a[i], -j), kDivRel * std::ldexp(std::abs(a[i]), -j) + 2 * kStep);
  }
}

TEST(Exp2, SpecialValues) {
  auto r = eval([](Backend& be, const ArithVec& x) { return exp2(be, x); }, {0, 3, -20, 0.5, -14.5, 13.9}, true);
  EXPECT_NEAR(r[0], 1.0, kStep);
  EXPECT_NEAR(r[1], 8.0, kStep);
  EXPECT_EQ(r[2], 0.0);
  EXPECT_NEAR(r[3], std::numbers::sqrt2, 2 * kStep);
  EXPECT_EQ(r[4], 0.0);
  EXPECT_NEAR(r[5], std::exp2(quantized(13.9)), std::exp2(13.9) * 1e-4);
}

TEST(Exp2, NoDivisionInCircuit) {
  EmulatorBackend be({}, Rounding::prob, 1);
  exp2(be, share(be, encode({-3.3, 2.1})));
  EXPECT_EQ(be.counters().div, 0u);
}

TEST(Exp2, Multiplicativity) {
  Rng rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  std::vector<double> a, b, s;
  for (int i = 0; i < 500; ++i) {
    a.push_back(quantized(u(rng)));
    b.push_back(quantized(u(rng)));
    s.push_back(a.back() + b.back());
  }
  std::vector<double> in = a;
  in.insert(in.end(), b.begin(), b.end());
  in.insert(in.end(), s.begin(), s.end());
  auto r = eval([](Backend& be, const ArithVec& x) { return exp2(be, x); }, in);
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    double prod = quantized(r[i] * r[n + i]);
    ASSERT_LE(std::abs(r[2 * n + i] - prod), 4 * kStep + 4e-4 * std::abs(prod))
        << a[i] << " + " << b[i];
  }
}

TEST(Exp2, RelativeErrorWhereRepresentable) {
  // Below 2^-7 the output has fewer than 2^9 representation steps, so a
  // relative bound of 1e-3 cannot hold for any rounding of the result.
  auto xs = grid(-7, 13, 4000);
  auto r = eval([](Backend& be, const ArithVec& x) { return exp2(be, x); }, xs);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double t = std::exp2(quantized(xs[i]));
    ASSERT_LE(std::abs(r[i] - t) / t, 1e-3) << xs[i];
  }
}

TEST(ExpE, Values) {
  auto r = eval([](Backend& be, const ArithVec& x) { return exp_e(be, x); }, {0, -4, 1});
  EXPECT_NEAR(r[0], 1.0, kStep);
  EXPECT_GE(r[1], 0.018310);
  EXPECT_LE(r[1], 0.018325);
  EXPECT_NEAR(r[2], std::numbers::e, 2 * std::ldexp(1.0, -15));
}

TEST(ExpE, BaseChangeBound) {
  auto xs = grid(-9, 9, 300);
  auto r = eval([](Backend& be, const ArithVec& x) { return exp_e(be, x); }, xs);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double t = std::exp(quantized(xs[i]));
    // factor bound of the base change plus output rounding
    ASSERT_LE(std::abs(r[i] - t), t * (std::pow(1 + kStep, 2) - 1) + t * 1e-3 + 2 * kStep) << xs[i];
  }
}

TEST(Log2, Values) {
  auto r = eval([](Backend& be, const ArithVec& x) { return log2(be, x); }, {8, 1, 0.5, 10, 0.001}, true);
  EXPECT_NEAR(r[0], 3.0, 2e-4);
  EXPECT_NEAR(r[1], 0.0, 2e-4);
  EXPECT_NEAR(r[2], -1.0, 2e-4);
  EXPECT_NEAR(r[3], std::log2(10.0), 2e-4);
  EXPECT_NEAR(r[4], std::log2(quantized(0.001)), 2e-4);
}

TEST(Log2, Sweep) {
  auto xs = grid(-10, 10, 1000, true);
  auto r = eval([](Backend& be, const ArithVec& x) { return log2(be, x); }, xs);
  for (std::size_t i = 0; i < xs.size(); ++i)
    ASSERT_NEAR(r[i], std::log2(quantized(xs[i])), 2e-4) << xs[i];
}

TEST(InvertSqrt, Values) {
  auto r = eval([](Backend& be, const ArithVec& x) { return invert_sqrt(be, x); }, {4, 0.25, 2, 1}, true);
  EXPECT_NEAR(r[0], 0.5, 0.005);
  EXPECT_NEAR(r[1], 2.0, 0.02);
  EXPECT_NEAR(r[2], 1 / std::numbers::sqrt2, 0.0071);
  // calibration regression
  EXPECT_GE(r[3], 0.99);
  EXPECT_LE(r[3], 1.01);
}

TEST(InvertSqrt, PowerOfFourScaling) {
  std::vector<double> xs;
  for (int j = -3; j <= 3; ++j) xs.push_back(std::ldexp(1.0, 2 * j));
  auto r = eval([](Backend& be, const ArithVec& x) { return invert_sqrt(be, x); }, xs, true);
  for (int j = -3; j <= 3; ++j) EXPECT_NEAR(r[static_cast<std::size_t>(j + 3)] * std::ldexp(1.0, j), 1.0, 0.01);
}

TEST(InvertSqrt, SweepWithinOnePercent) {
  auto xs = grid(-10, 10, 1000, true);
  for (Rounding mode : {Rounding::nearest, Rounding::prob}) {
    auto r = eval([](Backend& be, const ArithVec& x) { return invert_sqrt(be, x); }, xs, false, mode);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double t = 1 / std::sqrt(quantized(xs[i]));
      ASSERT_LE(std::abs(r[i] - t) / t, 0.01) << xs[i];
    }
  }
}

TEST(RandFraction, RangeAndMean) {
  const std::size_t n = 10000;
  auto r = three_party([&](Backend& be) { return be.open(rand_fraction(be, n, 0)); });
  double sum = 0;
  for (Ring v : r) {
    ASSERT_LT(v, Ring{1} << 16);
    sum += std::ldexp(static_cast<double>(v), -16);
  }
  EXPECT_NEAR(sum / n, 0.5, 4 * std::sqrt(1.0 / 12 / n));
  auto wide = three_party([&](Backend& be) { return be.open(rand_fraction(be, n, 3)); });
  double s3 = 0;
  for (Ring v : wide) {
    ASSERT_LT(v, Ring{1} << 19);
    s3 += std::ldexp(static_cast<double>(v), -16);
  }
  EXPECT_NEAR(s3 / n, 4.0, 4 * 8 * std::sqrt(1.0 / 12 / n));
  auto degenerate = three_party([&](Backend& be) { return be.open(rand_fraction(be, 16, -16)); });
  for (Ring v : degenerate) EXPECT_EQ(v, 0u);
}

TEST(Bernoulli, ExtremesAndMean) {
  const std::size_t n = 10000;
  auto r = three_party([&](Backend& be) {
    auto a = bernoulli(be, 64, 0.0);
    auto b = bernoulli(be, 64, 1.0);
    auto c = bernoulli(be, n, 0.5);
    auto d = bernoulli(be, n, 0.25);
    return be.open(concat<ArithDomain>({&a, &b, &c, &d}));
  });
  for (std::size_t i = 0; i < 64; ++i) {
    EXPECT_EQ(r[i], 0u);
    EXPECT_EQ(r[64 + i], 1u);
  }
  double half = 0, quarter = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ASSERT_LE(r[128 + i], 1u);
    half += static_cast<double>(r[128 + i]);
    quarter += static_cast<double>(r[128 + n + i]);
  }
  EXPECT_NEAR(half / n, 0.5, 4 * std::sqrt(0.25 / n));
  EXPECT_NEAR(quarter / n, 0.25, 4 * std::sqrt(0.25 * 0.75 / n));
}

TEST(FxMul, PublicAndPrivate) {
  auto r = decode(three_party([](Backend& be) {
    auto x = share(be, encode({1.5, -2.25}));
    auto y = share(be, encode({2.0, 4.0}));
    auto a = fx_mul(be, x, y);
    auto b = fx_mul_public(be, x, 0.5);
    return be.open(concat<ArithDomain>({&a, &b}));
  }, Rounding::nearest));
  EXPECT_EQ(r, (std::vector<double>{3.0, -9.0, 0.75, -1.125}));
}
