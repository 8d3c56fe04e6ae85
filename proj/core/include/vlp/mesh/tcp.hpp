#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "vlp/mesh/wire.hpp"

namespace vlp::mesh {

// Blocking full-duplex connection carrying wire frames. Safe for one reader
// thread and concurrent writers (sends are serialized).
class TcpConnection {
public:
    explicit TcpConnection(int fd);
    ~TcpConnection();
    TcpConnection(const TcpConnection&) = delete;
    TcpConnection& operator=(const TcpConnection&) = delete;

    void send_frame(const WireFrame& f);
    // nullopt on clean EOF; throws TransportError on a broken stream,
    // TimeoutError when timeout_ms >= 0 elapses.
    std::optional<WireFrame> recv_frame(int timeout_ms = -1);

    void close();
    bool closed() const { return fd_ < 0; }

    static std::unique_ptr<TcpConnection> connect(const std::string& host, std::uint16_t port,
                                                  int timeout_ms = 5000);

private:
    int fd_ = -1;
    std::mutex send_mu_;
};

// Listens on VLP_BIND (default 127.0.0.1); port 0 picks an ephemeral port.
class TcpListener {
public:
    explicit TcpListener(std::uint16_t port);
    ~TcpListener();

    std::uint16_t port() const { return port_; }
    std::unique_ptr<TcpConnection> accept(int timeout_ms = -1);

    static std::string bind_address();

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

} // namespace vlp::mesh
