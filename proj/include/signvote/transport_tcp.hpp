#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "signvote/frame.hpp"
#include "signvote/round.hpp"
#include "signvote/vote.hpp"

namespace signvote {

struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace net {

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket() { reset(); }
  Socket(Socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
  Socket& operator=(Socket&& other) noexcept {
    if (this != &other) {
      reset();
      fd_ = other.fd_;
      other.fd_ = -1;
    }
    return *this;
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

using Clock = std::chrono::steady_clock;

inline int remaining_ms(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
  return left.count() <= 0 ? 0 : static_cast<int>(left.count());
}

inline void poll_readable(int fd, Clock::time_point deadline, const char* what) {
  pollfd p{fd, POLLIN, 0};
  for (;;) {
    const int ms = remaining_ms(deadline);
    const int rc = ::poll(&p, 1, ms);
    if (rc > 0) return;
    if (rc == 0) throw TransportError(std::string(what) + ": timed out");
    if (errno != EINTR) throw TransportError(std::string(what) + ": poll: " + std::strerror(errno));
  }
}

inline void read_exact(int fd, std::uint8_t* buf, std::size_t len, Clock::time_point deadline,
                       const char* what) {
  std::size_t got = 0;
  while (got < len) {
    poll_readable(fd, deadline, what);
    const ssize_t n = ::recv(fd, buf + got, len - got, 0);
    if (n == 0) throw TransportError(std::string(what) + ": connection closed");
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw TransportError(std::string(what) + ": recv: " + std::strerror(errno));
    }
    got += static_cast<std::size_t>(n);
  }
}

inline void write_all(int fd, const std::uint8_t* buf, std::size_t len, const char* what) {
  std::size_t sent = 0;
  while (sent < len) {
    const ssize_t n = ::send(fd, buf + sent, len - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(std::string(what) + ": send: " + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
}

inline Frame read_frame(int fd, Clock::time_point deadline, const char* what) {
  std::vector<std::uint8_t> bytes(kFrameHeaderSize);
  read_exact(fd, bytes.data(), kFrameHeaderSize, deadline, what);
  const FrameHeader header = decode_header(bytes);
  bytes.resize(kFrameHeaderSize + header.payload_len);
  if (header.payload_len > 0)
    read_exact(fd, bytes.data() + kFrameHeaderSize, header.payload_len, deadline, what);
  return decode_frame(bytes);
}

inline void write_frame(int fd, const Frame& frame, const char* what) {
  const std::vector<std::uint8_t> bytes = encode_frame(frame);
  write_all(fd, bytes.data(), bytes.size(), what);
}

inline sockaddr_in make_addr(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
    throw TransportError("bad IPv4 address: " + host);
  return addr;
}

inline void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

}  // namespace net

struct TcpServerConfig {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  // 0 picks an ephemeral port; see TcpServer::port()
  std::uint32_t workers = 1;
  std::uint32_t dim = 1;
  std::uint32_t rounds = 1;
  int round_timeout_ms = 30000;
  int accept_timeout_ms = 30000;
};

struct TcpServerStats {
  std::uint32_t rounds_completed = 0;
  std::uint64_t vote_messages = 0;
  std::uint64_t broadcast_messages = 0;
  std::uint64_t vote_payload_bytes = 0;
  std::uint64_t broadcast_payload_bytes = 0;
  bool aborted = false;
  std::string abort_reason;

  int status() const { return aborted ? 1 : 0; }
};

// Parameter-server endpoint. Bulk synchronous: each round it waits for one
// VOTE from every worker (in arrival order), then writes the identical
// BROADCAST to each connection. Any protocol violation, disconnect or round
// timeout sends ABORT to all workers and ends the run with nonzero status.
// The server is model-agnostic; it only ever sees packed sign payloads.
class TcpServer {
 public:
  explicit TcpServer(const TcpServerConfig& config) : config_(config) {
    listener_ = net::Socket(::socket(AF_INET, SOCK_STREAM, 0));
    if (!listener_.valid()) throw TransportError("socket: " + std::string(std::strerror(errno)));
    int one = 1;
    ::setsockopt(listener_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr = net::make_addr(config.host, config.port);
    if (::bind(listener_.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
      throw TransportError("bind: " + std::string(std::strerror(errno)));
    if (::listen(listener_.fd(), static_cast<int>(config.workers)) != 0)
      throw TransportError("listen: " + std::string(std::strerror(errno)));
    socklen_t len = sizeof(addr);
    if (::getsockname(listener_.fd(), reinterpret_cast<sockaddr*>(&addr), &len) != 0)
      throw TransportError("getsockname: " + std::string(std::strerror(errno)));
    port_ = ntohs(addr.sin_port);
  }

  std::uint16_t port() const { return port_; }

  // Blocks until the run completes or aborts. on_round fires once per
  // completed round with the broadcast decision, before workers have
  // necessarily applied it.
  TcpServerStats run(const std::function<void(std::uint32_t, const SignVector&)>& on_round = {}) {
    TcpServerStats stats;
    std::vector<net::Socket> conns(config_.workers);
    std::vector<int> fd_of_worker(config_.workers, -1);
    try {
      accept_workers(conns, fd_of_worker);
      VoteCollector collector(config_.workers, config_.dim);
      for (std::uint32_t r = 0; r < config_.rounds; ++r) {
        const SignVector broadcast = collect_round(collector, conns, fd_of_worker, r, stats);
        const Frame out = Frame::broadcast(r, broadcast);
        for (std::uint32_t w = 0; w < config_.workers; ++w) {
          net::write_frame(fd_of_worker[w], out, "server broadcast");
          ++stats.broadcast_messages;
          stats.broadcast_payload_bytes += out.payload.size();
        }
        ++stats.rounds_completed;
        if (on_round) on_round(r, broadcast);
      }
    } catch (const std::exception& e) {
      stats.aborted = true;
      stats.abort_reason = e.what();
      const Frame abort = Frame::abort_frame(stats.rounds_completed);
      for (std::uint32_t w = 0; w < config_.workers; ++w)
        if (fd_of_worker[w] >= 0) {
          try {
            net::write_frame(fd_of_worker[w], abort, "server abort");
          } catch (const std::exception&) {
            // connection already gone; nothing further to do
          }
        }
    }
    return stats;
  }

 private:
  void accept_workers(std::vector<net::Socket>& conns, std::vector<int>& fd_of_worker) {
    const auto deadline =
        net::Clock::now() + std::chrono::milliseconds(config_.accept_timeout_ms);
    for (std::uint32_t i = 0; i < config_.workers; ++i) {
      net::poll_readable(listener_.fd(), deadline, "server accept");
      net::Socket conn(::accept(listener_.fd(), nullptr, nullptr));
      if (!conn.valid()) throw TransportError("accept: " + std::string(std::strerror(errno)));
      net::set_nodelay(conn.fd());
      const Frame hello = net::read_frame(conn.fd(), deadline, "server hello");
      if (hello.type != MsgType::Hello)
        throw ProtocolError("expected HELLO, got msg_type " +
                            std::to_string(static_cast<int>(hello.type)));
      if (hello.worker_id >= config_.workers)
        throw ProtocolError("HELLO from unknown worker id " + std::to_string(hello.worker_id));
      if (hello.dim != config_.dim)
        throw ProtocolError("HELLO dim " + std::to_string(hello.dim) + " != server dim " +
                            std::to_string(config_.dim));
      if (fd_of_worker[hello.worker_id] >= 0)
        throw ProtocolError("duplicate HELLO from worker " + std::to_string(hello.worker_id));
      fd_of_worker[hello.worker_id] = conn.fd();
      conns[i] = std::move(conn);
    }
  }

  SignVector collect_round(VoteCollector& collector, std::vector<net::Socket>& conns,
                           const std::vector<int>& fd_of_worker, std::uint32_t round,
                           TcpServerStats& stats) {
    (void)conns;
    const auto deadline = net::Clock::now() + std::chrono::milliseconds(config_.round_timeout_ms);
    std::vector<std::uint8_t> voted(config_.workers, 0);
    std::uint32_t pending = config_.workers;
    std::vector<pollfd> fds(config_.workers);
    SignVector broadcast;
    bool ready = false;
    while (pending > 0) {
      std::size_t n = 0;
      for (std::uint32_t w = 0; w < config_.workers; ++w)
        if (!voted[w]) fds[n++] = pollfd{fd_of_worker[w], POLLIN, 0};
      const int rc = ::poll(fds.data(), n, net::remaining_ms(deadline));
      if (rc == 0)
        throw TransportError("round " + std::to_string(round) + ": timed out waiting for " +
                             std::to_string(pending) + " vote(s)");
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw TransportError("round poll: " + std::string(std::strerror(errno)));
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
        const Frame frame = net::read_frame(fds[i].fd, deadline, "server vote");
        if (frame.type != MsgType::Vote)
          throw ProtocolError("round " + std::to_string(round) + ": expected VOTE, got type " +
                              std::to_string(static_cast<int>(frame.type)));
        if (fd_of_worker[frame.worker_id] != fds[i].fd)
          throw ProtocolError("VOTE worker id " + std::to_string(frame.worker_id) +
                              " does not match its connection");
        ++stats.vote_messages;
        stats.vote_payload_bytes += frame.payload.size();
        if (auto b = collector.submit(frame.worker_id, frame.round, frame.sign_vector())) {
          broadcast = std::move(*b);
          ready = true;
        }
        voted[frame.worker_id] = 1;
        --pending;
      }
    }
    if (!ready) throw ProtocolError("round " + std::to_string(round) + ": no broadcast decision");
    return broadcast;
  }

  TcpServerConfig config_;
  net::Socket listener_;
  std::uint16_t port_ = 0;
};

struct TcpWorkerResult {
  std::uint32_t rounds_completed = 0;
  std::uint64_t vote_payload_bytes = 0;
  std::uint64_t broadcast_payload_bytes = 0;
  bool aborted = false;
  std::string abort_reason;

  int status() const { return aborted ? 1 : 0; }
};

// Worker-side loop: HELLO, then per round push the sign vote and apply the
// broadcast. The worker computes exactly what it would under the simulator;
// only the message passing differs.
inline TcpWorkerResult run_tcp_worker(const std::string& host, std::uint16_t port, Worker& worker,
                                      std::uint32_t rounds, int io_timeout_ms = 30000,
                                      int connect_wait_ms = 5000) {
  TcpWorkerResult result;
  try {
    net::Socket sock;
    const auto give_up = net::Clock::now() + std::chrono::milliseconds(connect_wait_ms);
    for (;;) {
      sock = net::Socket(::socket(AF_INET, SOCK_STREAM, 0));
      if (!sock.valid()) throw TransportError("socket: " + std::string(std::strerror(errno)));
      sockaddr_in addr = net::make_addr(host, port);
      if (::connect(sock.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0) break;
      if (net::Clock::now() >= give_up)
        throw TransportError("connect to " + host + ":" + std::to_string(port) + ": " +
                             std::strerror(errno));
      sock.reset();
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    net::set_nodelay(sock.fd());
    net::write_frame(sock.fd(),
                     Frame::hello(static_cast<std::uint16_t>(worker.id()),
                                  static_cast<std::uint32_t>(worker.x().size())),
                     "worker hello");
    for (std::uint32_t r = 0; r < rounds; ++r) {
      const SignVector sv = worker.compute_vote(r);
      const Frame vote = Frame::vote(static_cast<std::uint16_t>(worker.id()), r, sv);
      net::write_frame(sock.fd(), vote, "worker vote");
      result.vote_payload_bytes += vote.payload.size();
      const auto deadline = net::Clock::now() + std::chrono::milliseconds(io_timeout_ms);
      const Frame reply = net::read_frame(sock.fd(), deadline, "worker broadcast");
      if (reply.type == MsgType::Abort)
        throw TransportError("server aborted at round " + std::to_string(reply.round));
      if (reply.type != MsgType::Broadcast || reply.round != r)
        throw ProtocolError("unexpected reply at round " + std::to_string(r));
      result.broadcast_payload_bytes += reply.payload.size();
      worker.apply_broadcast(reply.sign_vector());
      ++result.rounds_completed;
    }
  } catch (const std::exception& e) {
    result.aborted = true;
    result.abort_reason = e.what();
  }
  return result;
}

}  // namespace signvote
