#include <gtest/gtest.h>

#include <fstream>
#include <mutex>
#include <thread>

#include "deepmpc/parties.hpp"
#include "deepmpc/transport.hpp"

using namespace deepmpc;

TEST(PartyIdTest, NeighboursWrap) {
  EXPECT_EQ(PartyId{0}.prev().id, 2);
  EXPECT_EQ(PartyId{2}.next().id, 0);
  EXPECT_EQ(PartyId{1}.next().id, 2);
}

TEST(Loopback, FreshSessionHasNoTraffic) {
  run_three_parties(seed_from_u64(1), [](Session& s) {
    EXPECT_EQ(s.comm_snapshot(), CommStats{});
    EXPECT_EQ(s.comm_snapshot(), s.comm_snapshot());
  });
}

TEST(Loopback, OneWordToNextCounts64BitsAndOneRound) {
  std::mutex mu;
  std::uint64_t total = 0;
  run_three_parties(seed_from_u64(1), [&](Session& s) {
    std::vector<Ring> w{static_cast<Ring>(s.id().id)};
    auto got = s.exchange_words(w, {});
    EXPECT_EQ(got.from_prev.size(), 1u);
    EXPECT_EQ(got.from_prev[0], static_cast<Ring>(s.id().prev().id));
    EXPECT_TRUE(got.from_next.empty());
    auto c = s.comm_snapshot();
    EXPECT_EQ(c.bits_sent, 64u);
    EXPECT_EQ(c.rounds, 1u);
    std::lock_guard lock(mu);
    total += c.bits_sent;
  });
  EXPECT_EQ(total, 192u);
}

TEST(Loopback, EmptyPayloadAddsNoBits) {
  run_three_parties(seed_from_u64(1), [](Session& s) {
    s.exchange({}, {});
    EXPECT_EQ(s.comm_snapshot().bits_sent, 0u);
    EXPECT_EQ(s.comm_snapshot().rounds, 1u);
  });
}

TEST(Loopback, BatchedWordsAreOneRound) {
  run_three_parties(seed_from_u64(1), [](Session& s) {
    std::vector<Ring> w{1, 2};
    s.exchange_words(w, w);
    EXPECT_EQ(s.comm_snapshot().rounds, 1u);
    EXPECT_EQ(s.comm_snapshot().bits_sent, 256u);
  });
}

TEST(Loopback, ReceiveOrderEqualsSendOrder) {
  run_three_parties(seed_from_u64(2), [](Session& s) {
    for (Ring tag = 0; tag < 200; ++tag) {
      std::vector<Ring> to_next{tag * 3 + static_cast<Ring>(s.id().id)};
      std::vector<Ring> to_prev{tag * 7 + static_cast<Ring>(s.id().id)};
      auto got = s.exchange_words(to_next, to_prev);
      ASSERT_EQ(got.from_prev[0], tag * 3 + static_cast<Ring>(s.id().prev().id));
      ASSERT_EQ(got.from_next[0], tag * 7 + static_cast<Ring>(s.id().next().id));
    }
  });
}

TEST(Loopback, LengthMismatchIsAnError) {
  EXPECT_THROW(run_three_parties(seed_from_u64(1),
                                 [](Session& s) {
                                   Bytes b(8, 1);
                                   s.exchange_next(b, 16);
                                 }),
               TransportError);
}

TEST(Loopback, DuplicateJoinIsSetupError) {
  LoopbackNetwork net(seed_from_u64(1));
  auto a = net.join(0);
  EXPECT_THROW(net.join(0), SetupError);
  EXPECT_THROW(net.join(3), SetupError);
}

TEST(Prg, PairHoldersDrawIdenticalStreams) {
  std::array<std::vector<Ring>, 3> next_draws, prev_draws;
  std::mutex mu;
  run_three_parties(seed_from_u64(5), [&](Session& s) {
    auto n = s.prg_next().draw(1000);
    auto p = s.prg_prev().draw(1000);
    std::lock_guard lock(mu);
    next_draws[static_cast<std::size_t>(s.id().id)] = n;
    prev_draws[static_cast<std::size_t>(s.id().id)] = p;
  });
  // P_i's next key is P_{i+1}'s prev key.
  for (int i = 0; i < 3; ++i) EXPECT_EQ(next_draws[i], prev_draws[(i + 1) % 3]);
  EXPECT_NE(next_draws[0], next_draws[1]);
}

TEST(Prg, DeterministicPerKey) {
  PrgKey k{};
  k[0] = 42;
  Prg a(k), b(k);
  EXPECT_EQ(a.draw(3000), b.draw(3000));
  PrgKey k2 = k;
  k2[1] = 1;
  Prg c(k2);
  EXPECT_NE(Prg(k).draw(8), c.draw(8));
}

TEST(Prg, TestKeysDependOnSeed) {
  auto a = test_mode_keys(seed_from_u64(1), PartyId{0});
  auto b = test_mode_keys(seed_from_u64(2), PartyId{0});
  EXPECT_NE(a.key_next, b.key_next);
  EXPECT_EQ(a.key_next, test_mode_keys(seed_from_u64(1), PartyId{1}).key_prev);
}

TEST(Bytes, WordRoundTrip) {
  std::vector<Ring> w{0, 1, ~Ring{0}, 0x0123456789abcdefULL};
  Bytes b = to_bytes(w);
  EXPECT_EQ(b.size(), 32u);
  EXPECT_EQ(b[24], 0xef);  // little endian
  EXPECT_EQ(from_bytes(b), w);
  EXPECT_THROW(from_bytes(Bytes(5)), TransportError);
}

namespace {

std::uint16_t base_port() {
  return static_cast<std::uint16_t>(20000 + (::getpid() % 20000));
}

std::array<Endpoint, 3> local_endpoints(std::uint16_t base) {
  return {Endpoint{"127.0.0.1", base}, Endpoint{"127.0.0.1", static_cast<std::uint16_t>(base + 1)},
          Endpoint{"127.0.0.1", static_cast<std::uint16_t>(base + 2)}};
}

}  // namespace

TEST(Tcp, ThreePartiesExchangeAndAgreeOnKeys) {
  const auto eps = local_endpoints(base_port());
  std::array<std::vector<Ring>, 3> draws;
  std::array<std::vector<Ring>, 3> recv;
  std::array<std::exception_ptr, 3> errs;
  std::vector<std::thread> th;
  for (int id = 0; id < 3; ++id)
    th.emplace_back([&, id] {
      try {
        SessionConfig cfg;
        cfg.my_id = id;
        cfg.endpoints = eps;
        cfg.session_seed = seed_from_u64(9);
        cfg.connect_timeout_ms = 10000;
        auto s = setup_session(cfg);
        std::vector<Ring> w{static_cast<Ring>(100 + id), 7};
        auto got = s->exchange_words(w, {});
        recv[id] = got.from_prev;
        draws[id] = s->prg_next().draw(4);
        draws[id].push_back(s->prg_prev().next());
        EXPECT_EQ(s->comm_snapshot().bits_sent, 128u);
      } catch (...) {
        errs[id] = std::current_exception();
      }
    });
  for (auto& t : th) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  for (int id = 0; id < 3; ++id)
    EXPECT_EQ(recv[id], (std::vector<Ring>{static_cast<Ring>(100 + (id + 2) % 3), 7}));
}

TEST(Tcp, RandomKeysAgreeBetweenNeighbours) {
  const auto eps = local_endpoints(static_cast<std::uint16_t>(base_port() + 10));
  std::array<Ring, 3> nexts{}, prevs{};
  std::vector<std::thread> th;
  std::array<std::exception_ptr, 3> errs;
  for (int id = 0; id < 3; ++id)
    th.emplace_back([&, id] {
      try {
        SessionConfig cfg;
        cfg.my_id = id;
        cfg.endpoints = eps;
        cfg.test_mode = false;
        cfg.connect_timeout_ms = 10000;
        auto s = setup_session(cfg);
        nexts[id] = s->prg_next().next();
        prevs[id] = s->prg_prev().next();
      } catch (...) {
        errs[id] = std::current_exception();
      }
    });
  for (auto& t : th) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(nexts[i], prevs[(i + 1) % 3]);
}

TEST(Tcp, DuplicateIdIsSetupError) {
  const auto eps = local_endpoints(static_cast<std::uint16_t>(base_port() + 20));
  std::exception_ptr err0;
  std::thread p0([&] {
    try {
      SessionConfig cfg;
      cfg.my_id = 0;
      cfg.endpoints = eps;
      cfg.connect_timeout_ms = 5000;
      setup_session(cfg);
    } catch (...) {
      err0 = std::current_exception();
    }
  });
  // Two processes both claiming id 1 connect to party 0.
  std::vector<std::thread> dup;
  for (int i = 0; i < 2; ++i)
    dup.emplace_back([&] {
      try {
        SessionConfig cfg;
        cfg.my_id = 1;
        cfg.endpoints = eps;
        cfg.connect_timeout_ms = 2000;
        setup_session(cfg);
      } catch (...) {
      }
    });
  for (auto& t : dup) t.join();
  p0.join();
  ASSERT_TRUE(err0);
  EXPECT_THROW(std::rethrow_exception(err0), SetupError);
}

TEST(Tcp, EndpointsMustBeDistinct) {
  SessionConfig cfg;
  cfg.endpoints = {Endpoint{"127.0.0.1", 1}, Endpoint{"127.0.0.1", 1}, Endpoint{"127.0.0.1", 2}};
  EXPECT_THROW(setup_session(cfg), SetupError);
}

TEST(HostsFile, ParsesAndValidates) {
  const std::string path = ::testing::TempDir() + "hosts.txt";
  {
    std::ofstream f(path);
    f << "# parties\n0 127.0.0.1:9000\n2 host-c:9002\n1 host-b:9001\n";
  }
  auto eps = parse_hosts_file(path);
  EXPECT_EQ(eps[1].host, "host-b");
  EXPECT_EQ(eps[2].port, 9002);
  {
    std::ofstream f(path);
    f << "0 a:1\n1 b:2\n";
  }
  EXPECT_THROW(parse_hosts_file(path), SetupError);
  {
    std::ofstream f(path);
    f << "0 a:1\n0 b:2\n2 c:3\n";
  }
  EXPECT_THROW(parse_hosts_file(path), SetupError);
}
