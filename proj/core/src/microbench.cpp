#include "deepmpc/microbench.hpp"

#include <algorithm>
#include <chrono>
#include <mutex>

#include "deepmpc/parties.hpp"
#include "deepmpc/secmath.hpp"

namespace deepmpc {

std::vector<std::string> microbench_ops() {
  return {"mul", "dot", "trunc", "ltz", "exp2", "invsqrt", "div"};
}

MicrobenchResult run_microbench(const std::string& op, std::size_t size, BackendMode mode,
                                Rounding rounding, const FixedConfig& cfg, std::uint64_t seed) {
  if (mode != BackendMode::mpc3)
    throw ConfigError("microbench needs 3pc mode; the emulator does not communicate");
  const auto ops = microbench_ops();
  if (std::find(ops.begin(), ops.end(), op) == ops.end())
    throw ConfigError("unknown microbench op '" + op + "'");
  if (size == 0) throw ConfigError("size must be positive");
  cfg.validate();

  MicrobenchResult res;
  res.op = op;
  res.size = size;
  res.instances = op == "dot" ? 1 : size;
  res.rounding = rounding;
  PartyComm comm;
  std::mutex mu;
  double seconds = 0;

  run_three_backends(seed_from_u64(seed), cfg, rounding, [&](Backend& be) {
    Rng rng(seed);
    const int f = cfg.f;
    // Inputs in the domain each op is meant for, all owned by party 0.
    auto draw = [&](double lo, double hi) {
      std::uniform_real_distribution<double> u(lo, hi);
      std::vector<Ring> v(size);
      for (auto& x : v) x = fx_encode_raw(u(rng), f);
      return be.input(0, be.plays(0) ? std::span<const Ring>(v) : std::span<const Ring>(), size);
    };
    ArithVec x, y;
    if (op == "exp2") {
      x = draw(-8, 8);
    } else if (op == "invsqrt" || op == "div") {
      x = draw(0.5, 100);
      y = draw(0.5, 100);
    } else {
      x = draw(-4, 4);
      y = draw(-4, 4);
    }
    const CommStats before = be.comm();
    const auto t0 = std::chrono::steady_clock::now();
    if (op == "mul") be.mul(x, y);
    else if (op == "dot") be.dot(x, y);
    else if (op == "trunc") be.trunc(be.mul(x, y), f);
    else if (op == "ltz") ltz(be, x);
    else if (op == "exp2") exp2(be, x);
    else if (op == "invsqrt") invert_sqrt(be, x);
    else div(be, x, y);
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CommStats used = be.comm() - before;
    if (op == "trunc") {
      // Subtract the multiplication that produced the operand.
      used.bits_sent -= 64 * size;
      used.rounds -= 1;
    }
    std::lock_guard lock(mu);
    comm.per_party[static_cast<std::size_t>(be.party())] = used;
    seconds = std::max(seconds, dt);
  });
  CommStats total = comm.total();
  res.bits = total.bits_sent;
  res.rounds = total.rounds;
  res.seconds = seconds;
  return res;
}

void write_microbench_csv(std::ostream& out, const std::vector<MicrobenchResult>& rows) {
  out << "op,size,rounding,bits,rounds,bits_per_instance,seconds\n";
  for (const auto& r : rows)
    out << r.op << ',' << r.size << ',' << to_string(r.rounding) << ',' << r.bits << ','
        << r.rounds << ',' << r.bits_per_instance() << ',' << r.seconds << '\n';
}

}  // namespace deepmpc
