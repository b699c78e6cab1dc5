#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "deepmpc/ring.hpp"

using namespace deepmpc;

TEST(RingArith, Wraparound) {
  EXPECT_EQ(ring_arith(RingOp::add, ~Ring{0}, 1), 0u);
  EXPECT_EQ(ring_arith(RingOp::mul, 3, 5), 15u);
  EXPECT_EQ(ring_arith(RingOp::sub, 0, 1), ~Ring{0});
  EXPECT_EQ(ring_arith(RingOp::neg, 1, 0), ~Ring{0});
}

TEST(RingArith, AlgebraicLaws) {
  Rng rng(11);
  for (int i = 0; i < 10000; ++i) {
    Ring a = rng(), b = rng(), c = rng();
    auto add = [](Ring x, Ring y) { return ring_arith(RingOp::add, x, y); };
    auto mul = [](Ring x, Ring y) { return ring_arith(RingOp::mul, x, y); };
    ASSERT_EQ(ring_arith(RingOp::sub, add(a, b), b), a);
    ASSERT_EQ(add(add(a, b), c), add(a, add(b, c)));
    ASSERT_EQ(mul(mul(a, b), c), mul(a, mul(b, c)));
    ASSERT_EQ(mul(a, b), mul(b, a));
    ASSERT_EQ(mul(a, add(b, c)), add(mul(a, b), mul(a, c)));
  }
}

TEST(RingArith, SignedView) {
  EXPECT_EQ(to_signed(Ring{1} << 63), INT64_MIN);
  EXPECT_EQ(to_signed(~Ring{0}), -1);
  EXPECT_EQ(from_signed(-5), Ring{0} - 5);
}

TEST(FixedConfig, Validation) {
  FixedConfig ok;
  EXPECT_NO_THROW(ok.validate());
  FixedConfig wide{16, 32, 64};
  EXPECT_THROW(wide.validate(), ConfigError);  // k must stay below half the ring
  FixedConfig narrow{16, 30, 64};
  EXPECT_THROW(narrow.validate(), ConfigError);  // k >= 2f - 1
  FixedConfig f8{8, 31, 64};
  EXPECT_NO_THROW(f8.validate());
}

TEST(FixedPoint, Encode) {
  FixedConfig cfg;
  EXPECT_EQ(fx_encode(0.5, cfg).raw, 32768u);
  EXPECT_EQ(fx_encode(-1.0, cfg).raw, Ring{0} - 65536);
  EXPECT_EQ(fx_encode(std::numbers::pi, cfg).raw, 205887u);
  EXPECT_THROW(fx_encode(16384.0, cfg), RangeError);
  EXPECT_THROW(fx_encode(-16384.5, cfg), RangeError);
  EXPECT_NO_THROW(fx_encode(16383.9, cfg));
}

TEST(FixedPoint, Decode) {
  FixedConfig cfg;
  EXPECT_DOUBLE_EQ(fx_decode(32768, cfg), 0.5);
  EXPECT_DOUBLE_EQ(fx_decode(Ring{0} - 65536, cfg), -1.0);
  EXPECT_NEAR(fx_decode(205887, cfg), std::numbers::pi, std::ldexp(1.0, -17));
}

TEST(FixedPoint, RoundTripWithinHalfStep) {
  FixedConfig cfg;
  Rng rng(3);
  std::uniform_real_distribution<double> u(-16000, 16000);
  for (int i = 0; i < 10000; ++i) {
    double x = u(rng);
    ASSERT_LE(std::abs(fx_decode(fx_encode(x, cfg)) - x), std::ldexp(1.0, -17));
  }
}

TEST(ProbRounding, Deterministic) {
  FixedConfig cfg;
  Rng rng(1);
  EXPECT_EQ(round_prob_clear(Ring{2} << 16, cfg, rng), 2u);
  EXPECT_EQ(round_prob_clear(Ring{32768} * 32768, cfg, rng), 16384u);
  // negative exact products stay exact
  EXPECT_EQ(round_prob_clear(Ring{0} - (Ring{3} << 16), cfg, rng), Ring{0} - 3);
}

TEST(ProbRounding, HalfwayIsFairCoin) {
  FixedConfig cfg;
  Rng rng(2);
  const int n = 100000;
  double sum = 0;
  for (int i = 0; i < n; ++i) {
    Ring r = round_prob_clear(Ring{3} << 15, cfg, rng);  // 1.5
    ASSERT_TRUE(r == 1 || r == 2);
    sum += static_cast<double>(r);
  }
  EXPECT_NEAR(sum / n, 1.5, 4 * 0.5 / std::sqrt(n));
}

TEST(ProbRounding, UnbiasedForRandomProducts) {
  FixedConfig cfg;
  Rng rng(5);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int rep = 0; rep < 5; ++rep) {
    Ring x = fx_encode(u(rng), cfg).raw, y = fx_encode(u(rng), cfg).raw;
    const double mu = std::ldexp(static_cast<double>(to_signed(x * y)), -16);
    const int n = 100000;
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
      double d = static_cast<double>(to_signed(round_prob_clear(x * y, cfg, rng))) - mu;
      sum += d;
      sq += d * d;
    }
    double mean = sum / n, sd = std::sqrt(sq / n - mean * mean);
    EXPECT_LE(std::abs(mean), 4 * sd / std::sqrt(n) + 1e-12);
  }
}

TEST(ProbRounding, OutcomeFields) {
  Rng rng(9);
  auto o = round_prob_outcome((Ring{5} << 16) + (Ring{1} << 14), 16, rng);
  EXPECT_EQ(o.mu_floor, 5u);
  EXPECT_EQ(o.frac, Ring{1} << 14);
  EXPECT_EQ(o.result(), 5u + static_cast<Ring>(o.bit));
}

TEST(NearestRounding, TiesRoundUp) {
  FixedConfig cfg;
  EXPECT_EQ(round_nearest_clear(98304, cfg), 2u);
  EXPECT_EQ(round_nearest_clear(98303, cfg), 1u);
  EXPECT_EQ(round_nearest_clear(Ring{7} << 16, cfg), 7u);
  EXPECT_EQ(round_nearest_clear(Ring{0} - (Ring{7} << 16), cfg), Ring{0} - 7);
  // -1.5 rounds up to -1
  EXPECT_EQ(round_nearest_clear(Ring{0} - 98304, cfg), Ring{0} - 1);
}

TEST(NearestRounding, IgnoresRng) {
  FixedConfig cfg;
  Rng r1(1), r2(2);
  std::vector<Ring> prods{12345, 98304, Ring{0} - 777777};
  ClearMatrix a(1, 3), b(3, 1);
  a.data = prods;
  b.data = {1, 1, 1};
  auto x = clear_matmul_quantized(a, b, Rounding::nearest, cfg, r1);
  auto y = clear_matmul_quantized(a, b, Rounding::nearest, cfg, r2);
  EXPECT_EQ(x.data, y.data);
}

TEST(ClearMatmul, IdentityIsExact) {
  FixedConfig cfg;
  Rng rng(4);
  ClearMatrix id(3, 3), b(3, 2);
  for (int i = 0; i < 3; ++i) id.at(i, i) = Ring{1} << 16;
  for (auto& v : b.data) v = fx_encode(std::uniform_real_distribution<double>(-5, 5)(rng), cfg).raw;
  EXPECT_EQ(clear_matmul_quantized(id, b, Rounding::prob, cfg, rng).data, b.data);
}

TEST(ClearMatmul, MatchesBruteForce) {
  FixedConfig cfg;
  Rng data_rng(8);
  std::uniform_real_distribution<double> u(-8, 8);
  ClearMatrix a(8, 8), b(8, 8);
  for (auto& v : a.data) v = fx_encode(u(data_rng), cfg).raw;
  for (auto& v : b.data) v = fx_encode(u(data_rng), cfg).raw;
  Rng r1(99), r2(99);
  auto c = clear_matmul_quantized(a, b, Rounding::prob, cfg, r1);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) {
      Ring s = 0;
      for (std::size_t l = 0; l < 8; ++l) s += a.at(i, l) * b.at(l, j);
      ASSERT_EQ(c.at(i, j), round_prob_clear(s, cfg, r2));
    }
}

TEST(ClearMatmul, ShapeMismatch) {
  FixedConfig cfg;
  Rng rng(1);
  EXPECT_THROW(clear_matmul_quantized(ClearMatrix(2, 3), ClearMatrix(2, 3), Rounding::prob, cfg, rng),
               ShapeError);
}

TEST(ClearMatmul, OneByOneIsScalarRounding) {
  FixedConfig cfg;
  Rng r1(5), r2(5);
  ClearMatrix a(1, 1), b(1, 1);
  a.data = {fx_encode(1.3, cfg).raw};
  b.data = {fx_encode(-2.7, cfg).raw};
  EXPECT_EQ(clear_matmul_quantized(a, b, Rounding::prob, cfg, r1).data[0],
            round_prob_clear(a.data[0] * b.data[0], cfg, r2));
}
