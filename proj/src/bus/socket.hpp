#pragma once

#include <cstdint>
#include <string>

namespace arthur::bus::net {

/// Owning file descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket() { close(); }
  Socket(Socket&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
  Socket& operator=(Socket&& o) noexcept {
    if (this != &o) {
      close();
      fd_ = o.fd_;
      o.fd_ = -1;
    }
    return *this;
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  [[nodiscard]] int fd() const noexcept { return fd_; }
  [[nodiscard]] bool valid() const noexcept { return fd_ >= 0; }
  void close();
  void shutdown();

 private:
  int fd_ = -1;
};

Socket connect_tcp(const std::string& host, std::uint16_t port, int timeout_ms);
Socket listen_tcp(const std::string& bind_address, std::uint16_t port, std::uint16_t& bound_port);

/// Writes all bytes; returns false if the peer is gone.
bool send_all(int fd, const std::string& data);
/// Non-blocking read into `buffer`; returns false on EOF or error.
bool read_available(int fd, std::string& buffer);

}  // namespace arthur::bus::net
