#include "deepmpc/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <bit>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace deepmpc {

static_assert(std::endian::native == std::endian::little,
              "ring elements are serialized by memcpy");

SessionSeed seed_from_u64(std::uint64_t v) {
  SessionSeed s{};
  for (int i = 0; i < 8; ++i) s[i] = static_cast<std::uint8_t>(v >> (8 * i));
  return s;
}

Bytes to_bytes(std::span<const Ring> words) {
  Bytes b(words.size() * sizeof(Ring));
  if (!b.empty()) std::memcpy(b.data(), words.data(), b.size());
  return b;
}

std::vector<Ring> from_bytes(const Bytes& b) {
  if (b.size() % sizeof(Ring) != 0)
    throw TransportError("frame is not a whole number of ring elements");
  std::vector<Ring> w(b.size() / sizeof(Ring));
  if (!w.empty()) std::memcpy(w.data(), b.data(), b.size());
  return w;
}

PrgSeedPair test_mode_keys(const SessionSeed& seed, PartyId id) {
  // Pair p is {p, p+1}.
  return {derive_key(seed, "pair", id.id, id.next().id),
          derive_key(seed, "pair", id.prev().id, id.id)};
}

Session::Session(PartyId id, std::unique_ptr<Channel> to_next,
                 std::unique_ptr<Channel> to_prev, const PrgSeedPair& keys)
    : id_(id),
      next_(std::move(to_next)),
      prev_(std::move(to_prev)),
      prg_next_(keys.key_next),
      prg_prev_(keys.key_prev) {}

Session::~Session() = default;

Session::Received Session::exchange(const Bytes& to_next, const Bytes& to_prev) {
  bits_ += 8 * static_cast<std::uint64_t>(to_next.size() + to_prev.size());
  next_->send(to_next);
  prev_->send(to_prev);
  Received r;
  r.from_prev = prev_->recv();
  r.from_next = next_->recv();
  rounds_ += 1;
  if (tracing_) {
    transcript_.push_back(r.from_prev);
    transcript_.push_back(r.from_next);
  }
  return r;
}

Bytes Session::exchange_next(const Bytes& to_next, std::size_t expect_from_prev) {
  Received r = exchange(to_next, {});
  if (r.from_prev.size() != expect_from_prev)
    throw TransportError("length mismatch: expected " +
                         std::to_string(expect_from_prev) + " bytes, got " +
                         std::to_string(r.from_prev.size()));
  return std::move(r.from_prev);
}

Session::ReceivedWords Session::exchange_words(std::span<const Ring> to_next,
                                               std::span<const Ring> to_prev) {
  Received r = exchange(to_bytes(to_next), to_bytes(to_prev));
  return {from_bytes(r.from_prev), from_bytes(r.from_next)};
}

CommStats Session::comm_snapshot() const { return {bits_.load(), rounds_.load()}; }

// ---------------------------------------------------------------------------
// Loopback

struct LoopbackNetwork::Impl {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Bytes> queue[3][3];  // queue[from][to]
  bool aborted = false;

  void push(int from, int to, Bytes b) {
    {
      std::lock_guard<std::mutex> lock(mu);
      queue[from][to].push_back(std::move(b));
    }
    cv.notify_all();
  }

  Bytes pop(int from, int to) {
    std::unique_lock<std::mutex> lock(mu);
    cv.wait(lock, [&] { return aborted || !queue[from][to].empty(); });
    if (queue[from][to].empty()) throw TransportError("peer disconnected");
    Bytes b = std::move(queue[from][to].front());
    queue[from][to].pop_front();
    return b;
  }
};

namespace {

class LoopbackChannel : public Channel {
 public:
  LoopbackChannel(std::shared_ptr<LoopbackNetwork::Impl> net, int me, int peer)
      : net_(std::move(net)), me_(me), peer_(peer) {}
  void send(Bytes frame) override { net_->push(me_, peer_, std::move(frame)); }
  Bytes recv() override { return net_->pop(peer_, me_); }

 private:
  std::shared_ptr<LoopbackNetwork::Impl> net_;
  int me_;
  int peer_;
};

}  // namespace

LoopbackNetwork::LoopbackNetwork(const SessionSeed& seed)
    : impl_(std::make_shared<Impl>()), seed_(seed) {}

LoopbackNetwork::~LoopbackNetwork() = default;

std::unique_ptr<Session> LoopbackNetwork::join(int id) {
  if (id < 0 || id > 2) throw SetupError("party id out of range");
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    if (joined_[id]) throw SetupError("party id collision: " + std::to_string(id));
    joined_[id] = true;
  }
  PartyId me{id};
  return std::make_unique<Session>(
      me, std::make_unique<LoopbackChannel>(impl_, id, me.next().id),
      std::make_unique<LoopbackChannel>(impl_, id, me.prev().id),
      test_mode_keys(seed_, me));
}

void LoopbackNetwork::abort() {
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    impl_->aborted = true;
  }
  impl_->cv.notify_all();
}

// ---------------------------------------------------------------------------
// TCP

namespace {

void write_all(int fd, const std::uint8_t* p, std::size_t n) {
  while (n > 0) {
    ssize_t w = ::send(fd, p, n, MSG_NOSIGNAL);
    if (w <= 0) throw TransportError("peer disconnected during send");
    p += w;
    n -= static_cast<std::size_t>(w);
  }
}

void read_all(int fd, std::uint8_t* p, std::size_t n) {
  while (n > 0) {
    ssize_t r = ::recv(fd, p, n, 0);
    if (r <= 0) throw TransportError("peer disconnected during receive");
    p += r;
    n -= static_cast<std::size_t>(r);
  }
}

void write_frame(int fd, const Bytes& b) {
  std::uint8_t len[4];
  auto n = static_cast<std::uint32_t>(b.size());
  for (int i = 0; i < 4; ++i) len[i] = static_cast<std::uint8_t>(n >> (8 * i));
  write_all(fd, len, 4);
  if (!b.empty()) write_all(fd, b.data(), b.size());
}

Bytes read_frame(int fd) {
  std::uint8_t len[4];
  read_all(fd, len, 4);
  std::uint32_t n = 0;
  for (int i = 0; i < 4; ++i) n |= static_cast<std::uint32_t>(len[i]) << (8 * i);
  Bytes b(n);
  if (n) read_all(fd, b.data(), n);
  return b;
}

// Sends go through a writer thread so two peers pushing large frames at
// each other cannot deadlock on full socket buffers.
class TcpChannel : public Channel {
 public:
  explicit TcpChannel(int fd) : fd_(fd), writer_([this] { run(); }) {}

  ~TcpChannel() override {
    {
      std::lock_guard<std::mutex> lock(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    writer_.join();
    ::close(fd_);
  }

  void send(Bytes frame) override {
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (failed_) throw TransportError("peer disconnected");
      pending_.push_back(std::move(frame));
    }
    cv_.notify_all();
  }

  Bytes recv() override { return read_frame(fd_); }

 private:
  void run() {
    for (;;) {
      Bytes b;
      {
        std::unique_lock<std::mutex> lock(mu_);
        cv_.wait(lock, [&] { return stop_ || !pending_.empty(); });
        if (pending_.empty()) return;
        b = std::move(pending_.front());
        pending_.pop_front();
      }
      try {
        write_frame(fd_, b);
      } catch (const TransportError&) {
        std::lock_guard<std::mutex> lock(mu_);
        failed_ = true;
        pending_.clear();
        return;
      }
    }
  }

  int fd_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Bytes> pending_;
  bool stop_ = false;
  bool failed_ = false;
  std::thread writer_;
};

int listen_on(std::uint16_t port) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw SetupError("socket() failed");
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_ANY);
  addr.sin_port = htons(port);
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
    ::close(fd);
    throw SetupError("cannot bind port " + std::to_string(port));
  }
  if (::listen(fd, 8) < 0) {
    ::close(fd);
    throw SetupError("listen() failed");
  }
  return fd;
}

void set_timeouts(int fd, int ms) {
  timeval tv{ms / 1000, (ms % 1000) * 1000};
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
}

void clear_timeouts(int fd) {
  timeval tv{0, 0};
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

int connect_to(const Endpoint& ep, int timeout_ms) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::milliseconds(timeout_ms);
  for (;;) {
    addrinfo* res = nullptr;
    if (::getaddrinfo(ep.host.c_str(), std::to_string(ep.port).c_str(), &hints,
                      &res) == 0) {
      int fd = ::socket(AF_INET, SOCK_STREAM, 0);
      bool ok = fd >= 0 && ::connect(fd, res->ai_addr, res->ai_addrlen) == 0;
      ::freeaddrinfo(res);
      if (ok) return fd;
      if (fd >= 0) ::close(fd);
    }
    if (std::chrono::steady_clock::now() > deadline)
      throw SetupError("connect timeout to " + ep.host + ":" +
                       std::to_string(ep.port));
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

}  // namespace

std::unique_ptr<Session> setup_session(const SessionConfig& cfg) {
  if (cfg.my_id < 0 || cfg.my_id > 2) throw SetupError("party id out of range");
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      if (cfg.endpoints[a].host == cfg.endpoints[b].host &&
          cfg.endpoints[a].port == cfg.endpoints[b].port)
        throw SetupError("endpoints must be distinct");

  const int me = cfg.my_id;
  std::array<int, 3> fds{-1, -1, -1};
  auto cleanup = [&] {
    for (int& fd : fds)
      if (fd >= 0) ::close(fd), fd = -1;
  };

  try {
    // Lower ids accept, higher ids connect; the connector announces itself.
    int expected_accepts = 2 - me;
    if (expected_accepts > 0) {
      int lfd = listen_on(cfg.endpoints[me].port);
      set_timeouts(lfd, cfg.connect_timeout_ms);
      try {
        for (int n = 0; n < expected_accepts; ++n) {
          int fd = ::accept(lfd, nullptr, nullptr);
          if (fd < 0) throw SetupError("accept timeout");
          set_timeouts(fd, cfg.connect_timeout_ms);
          std::uint8_t hello[4];
          try {
            read_all(fd, hello, 4);
          } catch (const TransportError&) {
            ::close(fd);
            throw SetupError("peer closed during handshake");
          }
          int peer = hello[0];
          if (peer == me || peer <= me || peer > 2 || fds[peer] >= 0) {
            ::close(fd);
            throw SetupError("party id collision: " + std::to_string(peer));
          }
          fds[peer] = fd;
        }
      } catch (...) {
        ::close(lfd);
        throw;
      }
      ::close(lfd);
    }
    for (int peer = 0; peer < me; ++peer) {
      int fd = connect_to(cfg.endpoints[peer], cfg.connect_timeout_ms);
      std::uint8_t hello[4] = {static_cast<std::uint8_t>(me), 0, 0, 0};
      write_all(fd, hello, 4);
      fds[peer] = fd;
    }
    for (int peer = 0; peer < 3; ++peer)
      if (peer != me) clear_timeouts(fds[peer]);
  } catch (...) {
    cleanup();
    throw;
  }

  PartyId id{me};
  auto next = std::make_unique<TcpChannel>(fds[id.next().id]);
  auto prev = std::make_unique<TcpChannel>(fds[id.prev().id]);
  fds = {-1, -1, -1};

  PrgSeedPair keys;
  if (cfg.test_mode) {
    keys = test_mode_keys(cfg.session_seed, id);
  } else {
    // Each party picks the key for the pair it shares with its successor.
    keys.key_next = random_key();
    next->send(Bytes(keys.key_next.begin(), keys.key_next.end()));
    Bytes k = prev->recv();
    if (k.size() != keys.key_prev.size()) throw SetupError("bad key frame");
    std::copy(k.begin(), k.end(), keys.key_prev.begin());
  }
  return std::make_unique<Session>(id, std::move(next), std::move(prev), keys);
}

std::array<Endpoint, 3> parse_hosts_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SetupError("cannot open hosts file " + path);
  std::array<Endpoint, 3> eps;
  std::array<bool, 3> seen{};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    int id;
    std::string hp;
    if (!(ss >> id >> hp)) throw SetupError("malformed hosts line: " + line);
    auto colon = hp.rfind(':');
    if (id < 0 || id > 2 || colon == std::string::npos)
      throw SetupError("malformed hosts line: " + line);
    if (seen[id]) throw SetupError("party listed twice in hosts file");
    seen[id] = true;
    eps[id].host = hp.substr(0, colon);
    eps[id].port = static_cast<std::uint16_t>(std::stoi(hp.substr(colon + 1)));
  }
  for (bool s : seen)
    if (!s) throw SetupError("hosts file must list parties 0, 1 and 2");
  return eps;
}

}  // namespace deepmpc
