#include "mandala/osc.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

namespace mandala::osc {

namespace {

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

sockaddr_in resolve(const std::string& host, std::uint16_t port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1) return addr;

    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_DGRAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
        throw NetworkError("cannot resolve host: " + host);
    }
    addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
    ::freeaddrinfo(res);
    return addr;
}

}  // namespace

Endpoint Endpoint::parse(const std::string& text) {
    const auto colon = text.rfind(':');
    if (colon == std::string::npos) throw std::invalid_argument("endpoint needs host:port: " + text);
    Endpoint e;
    e.host = colon == 0 ? "127.0.0.1" : text.substr(0, colon);
    const std::string port = text.substr(colon + 1);
    unsigned value = 0;
    const auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
    if (ec != std::errc{} || ptr != port.data() + port.size() || value == 0 || value > 65535) {
        throw std::invalid_argument("invalid port in endpoint: " + text);
    }
    e.port = static_cast<std::uint16_t>(value);
    return e;
}

std::string Endpoint::to_string() const { return host + ":" + std::to_string(port); }

Sender::Sender(const Endpoint& destination) : destination_(destination) {
    const sockaddr_in addr = resolve(destination.host, destination.port);
    address_.resize(sizeof addr);
    std::memcpy(address_.data(), &addr, sizeof addr);
    fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd_ < 0) throw NetworkError(errno_text("socket"));
}

Sender::~Sender() {
    if (fd_ >= 0) ::close(fd_);
}

void Sender::send_bytes(std::span<const std::uint8_t> datagram) {
    if (datagram.size() > kMaxDatagram) {
        throw NetworkError("OSC datagram of " + std::to_string(datagram.size()) +
                           " bytes exceeds UDP limit");
    }
    const ssize_t n = ::sendto(fd_, datagram.data(), datagram.size(), 0,
                               reinterpret_cast<const sockaddr*>(address_.data()),
                               static_cast<socklen_t>(address_.size()));
    if (n < 0) throw NetworkError(errno_text("sendto") + " (" + destination_.to_string() + ")");
}

void Sender::send(const Message& msg) { send_bytes(encode(msg)); }

Server::Server(std::uint16_t port, Handler handler, const std::string& bind_host)
    : handler_(std::move(handler)) {
    fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd_ < 0) throw NetworkError(errno_text("socket"));
    int rcvbuf = 4 << 20;
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVBUF, &rcvbuf, sizeof rcvbuf);

    sockaddr_in addr = resolve(bind_host, port);
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        const std::string msg = errno_text(("bind UDP port " + std::to_string(port)).c_str());
        ::close(fd_);
        fd_ = -1;
        throw NetworkError(msg);
    }
    socklen_t len = sizeof addr;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

Server::~Server() {
    stop();
    if (fd_ >= 0) ::close(fd_);
}

void Server::start() {
    if (running_.exchange(true)) return;
    thread_ = std::thread([this] { loop(); });
}

void Server::stop() {
    running_.store(false);
    if (thread_.joinable()) thread_.join();
}

void Server::loop() {
    std::vector<std::uint8_t> buffer(kMaxDatagram + 1);
    while (running_.load()) {
        pollfd pfd{fd_, POLLIN, 0};
        const int ready = ::poll(&pfd, 1, 50);
        if (ready <= 0) continue;

        sockaddr_in from{};
        socklen_t from_len = sizeof from;
        const ssize_t n = ::recvfrom(fd_, buffer.data(), buffer.size(), 0,
                                     reinterpret_cast<sockaddr*>(&from), &from_len);
        if (n < 0) {
            if (errno != EINTR && errno != EAGAIN) errors_.fetch_add(1);
            continue;
        }
        received_.fetch_add(1);
        auto result = try_decode(std::span(buffer.data(), static_cast<std::size_t>(n)));
        if (!result) {
            errors_.fetch_add(1);
            continue;
        }
        char host[INET_ADDRSTRLEN] = {};
        ::inet_ntop(AF_INET, &from.sin_addr, host, sizeof host);
        handler_(*result.message, Endpoint{host, ntohs(from.sin_port)});
    }
}

}  // namespace mandala::osc
