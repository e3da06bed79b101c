#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>
#include <string>

#include "chicle/errors.hpp"
#include "chicle/transport.hpp"

namespace chicle {
namespace {

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

}  // namespace

HostPort parse_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos) throw std::invalid_argument("address must be host:port, got '" + address + "'");
  HostPort hp;
  hp.host = address.substr(0, colon);
  if (hp.host.size() >= 2 && hp.host.front() == '[' && hp.host.back() == ']')
    hp.host = hp.host.substr(1, hp.host.size() - 2);
  const std::string port = address.substr(colon + 1);
  std::size_t used = 0;
  unsigned long p = 0;
  try {
    p = std::stoul(port, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != port.size() || port.empty() || p > 65535)
    throw std::invalid_argument("bad port in address '" + address + "'");
  hp.port = static_cast<std::uint16_t>(p);
  if (hp.host.empty()) hp.host = "0.0.0.0";
  return hp;
}

// --- Connection ----------------------------------------------------------------

Connection::Connection(int fd, std::uint64_t max_payload) : fd_(fd), max_payload_(max_payload) {}

Connection::Connection(Connection&& other) noexcept : fd_(other.fd_), max_payload_(other.max_payload_) {
  other.fd_ = -1;
}

Connection& Connection::operator=(Connection&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    max_payload_ = other.max_payload_;
    other.fd_ = -1;
  }
  return *this;
}

Connection::~Connection() { close(); }

void Connection::close() noexcept {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void Connection::write_all(std::span<const std::byte> b) {
  std::size_t done = 0;
  while (done < b.size()) {
    const ssize_t n = ::send(fd_, b.data() + done, b.size() - done, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ConnectionLost(errno_text("send"));
    }
    done += static_cast<std::size_t>(n);
  }
}

void Connection::read_exact(std::span<std::byte> b) {
  std::size_t done = 0;
  while (done < b.size()) {
    const ssize_t n = ::recv(fd_, b.data() + done, b.size() - done, 0);
    if (n == 0) throw ConnectionLost("peer closed the connection");
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ConnectionLost(errno_text("recv"));
    }
    done += static_cast<std::size_t>(n);
  }
}

void Connection::send(const Message& m) {
  if (fd_ < 0) throw ConnectionLost("connection is closed");
  if (m.payload.size() > max_payload_)
    throw FrameError("payload of " + std::to_string(m.payload.size()) + " bytes exceeds frame limit");
  const Message header_only{m.kind, {}};
  auto header = encode_frame(header_only, max_payload_);
  const std::uint64_t len = m.payload.size();
  std::memcpy(header.data() + 6, &len, sizeof(len));
  write_all(header);
  write_all(m.payload);
}

Message Connection::receive() {
  if (fd_ < 0) throw ConnectionLost("connection is closed");
  std::byte header[frame::kHeaderBytes];
  read_exact(header);
  Message m;
  const auto len = parse_frame_header(header, m.kind, max_payload_);
  m.payload.resize(len);
  read_exact(m.payload);
  return m;
}

std::string Connection::peer_host() const {
  sockaddr_storage addr{};
  socklen_t len = sizeof(addr);
  if (::getpeername(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) return "127.0.0.1";
  char buf[INET6_ADDRSTRLEN] = {};
  if (addr.ss_family == AF_INET) {
    ::inet_ntop(AF_INET, &reinterpret_cast<sockaddr_in*>(&addr)->sin_addr, buf, sizeof(buf));
  } else if (addr.ss_family == AF_INET6) {
    ::inet_ntop(AF_INET6, &reinterpret_cast<sockaddr_in6*>(&addr)->sin6_addr, buf, sizeof(buf));
  } else {
    return "127.0.0.1";  // socketpair
  }
  return buf;
}

// --- Listener ------------------------------------------------------------------

Listener::Listener(const std::string& address) {
  const HostPort hp = parse_address(address);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(hp.port);
  if (const int rc = ::getaddrinfo(hp.host.c_str(), port.c_str(), &hints, &res); rc != 0)
    throw ConnectionLost("cannot resolve " + address + ": " + ::gai_strerror(rc));

  std::string last_error = "no addresses";
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 128) == 0) {
      fd_ = fd;
      break;
    }
    last_error = errno_text("bind/listen");
    ::close(fd);
  }
  ::freeaddrinfo(res);
  if (fd_ < 0) throw ConnectionLost("cannot listen on " + address + ": " + last_error);

  sockaddr_storage bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = bound.ss_family == AF_INET6 ? ntohs(reinterpret_cast<sockaddr_in6*>(&bound)->sin6_port)
                                      : ntohs(reinterpret_cast<sockaddr_in*>(&bound)->sin_port);
}

Listener::Listener(Listener&& other) noexcept : fd_(other.fd_), port_(other.port_) { other.fd_ = -1; }

Listener& Listener::operator=(Listener&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = other.fd_;
    port_ = other.port_;
    other.fd_ = -1;
  }
  return *this;
}

Listener::~Listener() {
  if (fd_ >= 0) ::close(fd_);
}

Connection Listener::accept() {
  for (;;) {
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) {
      set_nodelay(fd);
      return Connection(fd);
    }
    if (errno != EINTR) throw ConnectionLost(errno_text("accept"));
  }
}

Connection connect_to(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  const std::string target = host == "0.0.0.0" ? "127.0.0.1" : host;
  if (const int rc = ::getaddrinfo(target.c_str(), service.c_str(), &hints, &res); rc != 0)
    throw ConnectionLost("cannot resolve " + target + ": " + ::gai_strerror(rc));
  std::string last_error = "no addresses";
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      ::freeaddrinfo(res);
      set_nodelay(fd);
      return Connection(fd);
    }
    last_error = errno_text("connect");
    ::close(fd);
  }
  ::freeaddrinfo(res);
  throw ConnectionLost("cannot connect to " + target + ":" + service + ": " + last_error);
}

Connection connect_to(const std::string& address) {
  const HostPort hp = parse_address(address);
  return connect_to(hp.host, hp.port);
}

std::pair<Connection, Connection> connection_pair() {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) throw ConnectionLost(errno_text("socketpair"));
  return {Connection(fds[0]), Connection(fds[1])};
}

}  // namespace chicle
