#include "deepmpc/parties.hpp"

#include <exception>
#include <mutex>
#include <thread>

#include "deepmpc/rss3.hpp"

namespace deepmpc {

void run_three_parties(const SessionSeed& seed,
                       const std::function<void(Session&)>& fn) {
  LoopbackNetwork net(seed);
  std::exception_ptr first;
  std::mutex mu;
  std::array<std::thread, 3> threads;
  for (int i = 0; i < 3; ++i) {
    threads[i] = std::thread([&, i] {
      try {
        auto session = net.join(i);
        fn(*session);
      } catch (...) {
        {
          std::lock_guard<std::mutex> lock(mu);
          if (!first) first = std::current_exception();
        }
        net.abort();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (first) std::rethrow_exception(first);
}

void run_three_backends(const SessionSeed& seed, const FixedConfig& cfg,
                        Rounding rounding,
                        const std::function<void(Backend&)>& fn) {
  run_three_parties(seed, [&](Session& s) {
    Rss3Backend be(s, cfg, rounding);
    fn(be);
  });
}

}  // namespace deepmpc
