#include <benchmark/benchmark.h>

#include <random>

#include "deepmpc/emulator.hpp"
#include "deepmpc/models.hpp"
#include "deepmpc/parties.hpp"
#include "deepmpc/roundlab.hpp"
#include "deepmpc/secmath.hpp"

using namespace deepmpc;

namespace {

std::vector<Ring> random_fixed(std::size_t n, double lo, double hi) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Ring> out(n);
  for (auto& v : out) v = fx_encode_raw(u(rng), 16);
  return out;
}

ArithVec input(Backend& be, const std::vector<Ring>& v) {
  return be.input(0, be.plays(0) ? std::span<const Ring>(v) : std::span<const Ring>(), v.size());
}

// Runs body on three loopback parties once per iteration and reports the
// payload bits party 0 sent per element.
template <class Body>
void three_party_bench(benchmark::State& state, Body body) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto xs = random_fixed(n, 0.5, 4);
  std::uint64_t bits = 0;
  for (auto _ : state) {
    run_three_backends(seed_from_u64(1), {}, Rounding::prob, [&](Backend& be) {
      auto x = input(be, xs);
      auto c0 = be.comm();
      benchmark::DoNotOptimize(body(be, x));
      if (be.party() == 0) bits = (be.comm() - c0).bits_sent;
    });
  }
  state.counters["bits_per_elem_p0"] = static_cast<double>(bits) / static_cast<double>(n);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

}  // namespace

static void BM_ClearQuantizedMatmul(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  auto a = random_quantized(d, d, 4, 16, rng);
  auto b = random_quantized(d, d, 4, 16, rng);
  for (auto _ : state) benchmark::DoNotOptimize(clear_matmul_quantized(a, b, Rounding::prob, {}, rng));
}
BENCHMARK(BM_ClearQuantizedMatmul)->Arg(32)->Arg(128);

static void BM_MpcMulTrunc(benchmark::State& state) {
  three_party_bench(state, [](Backend& be, const ArithVec& x) { return be.trunc(be.mul(x, x), 16); });
}
BENCHMARK(BM_MpcMulTrunc)->Arg(1 << 14)->Unit(benchmark::kMillisecond)->UseRealTime();

static void BM_MpcLtz(benchmark::State& state) {
  three_party_bench(state, [](Backend& be, const ArithVec& x) { return ltz(be, x); });
}
BENCHMARK(BM_MpcLtz)->Arg(1 << 12)->Unit(benchmark::kMillisecond)->UseRealTime();

static void BM_MpcExp2(benchmark::State& state) {
  three_party_bench(state, [](Backend& be, const ArithVec& x) { return exp2(be, x); });
}
BENCHMARK(BM_MpcExp2)->Arg(1 << 10)->Unit(benchmark::kMillisecond)->UseRealTime();

static void BM_MpcDiv(benchmark::State& state) {
  three_party_bench(state, [](Backend& be, const ArithVec& x) { return div(be, x, x); });
}
BENCHMARK(BM_MpcDiv)->Arg(1 << 10)->Unit(benchmark::kMillisecond)->UseRealTime();

static void BM_MpcInvertSqrt(benchmark::State& state) {
  three_party_bench(state, [](Backend& be, const ArithVec& x) { return invert_sqrt(be, x); });
}
BENCHMARK(BM_MpcInvertSqrt)->Arg(1 << 10)->Unit(benchmark::kMillisecond)->UseRealTime();

static void BM_EmulatorNetworkAStep(benchmark::State& state) {
  const std::size_t batch = 128;
  EmulatorBackend be({}, Rounding::prob, 1);
  Model m = build_model("A");
  Rng rng(1);
  m.init(be, InitMode::secure, rng);
  auto xs = random_fixed(batch * 784, 0, 1);
  std::vector<Ring> y(batch * 10, 0);
  for (std::size_t i = 0; i < batch; ++i) y[i * 10 + i % 10] = Ring{1} << 16;
  for (auto _ : state) {
    Tensor x{{batch, 1, 28, 28}, input(be, xs)};
    auto logits = m.forward(be, x, true);
    auto sm = softmax_xent_grad(be, logits, input(be, y), false);
    m.backward(be, sm.grad);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_EmulatorNetworkAStep)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
