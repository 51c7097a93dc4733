#pragma once

// Shared helpers for the test binaries.

#include "mandala/audio.hpp"
#include "mandala/websocket.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace test {

inline std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() /
               ("mandala_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir;
}

/// Stereo sine with distinct frequencies per channel, amplitude 0.5.
inline mandala::AudioTrack sine_track(double seconds, double freq, int rate = 48000, std::size_t channels = 2) {
    auto frames = static_cast<std::size_t>(seconds * rate);
    auto t = mandala::AudioTrack::silent(rate, channels, frames);
    for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t i = 0; i < frames; ++i) {
            t.channels[c][i] = static_cast<float>(
                0.5 * std::sin(2.0 * std::numbers::pi * freq * (1.0 + 0.5 * static_cast<double>(c)) *
                               static_cast<double>(i) / rate));
        }
    }
    return t;
}

/// Uniform noise in [-0.5, 0.5].
inline mandala::AudioTrack noise_track(double seconds, std::uint64_t seed, int rate = 48000) {
    auto frames = static_cast<std::size_t>(seconds * rate);
    auto t = mandala::AudioTrack::silent(rate, 2, frames);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> d(-0.5f, 0.5f);
    for (auto& ch : t.channels) {
        for (auto& v : ch) v = d(rng);
    }
    return t;
}

/// A port that was free a moment ago (bind to 0, read it back, close).
inline std::uint16_t free_port(int type = SOCK_STREAM) {
    const int fd = ::socket(AF_INET, type, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
    socklen_t len = sizeof addr;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    ::close(fd);
    return ntohs(addr.sin_port);
}

inline bool wait_until(const std::function<bool()>& pred, double seconds) {
    const auto end = std::chrono::steady_clock::now() + std::chrono::duration<double>(seconds);
    while (std::chrono::steady_clock::now() < end) {
        if (pred()) return true;
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    return pred();
}

/// Blocking WebSocket client for loopback tests.
class WsClient {
public:
    explicit WsClient(std::uint16_t port) {
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
        connected_ = ::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0;
    }
    ~WsClient() {
        if (fd_ >= 0) ::close(fd_);
    }

    bool handshake(const std::string& key = "dGhlIHNhbXBsZSBub25jZQ==") {
        if (!connected_) return false;
        const std::string req = "GET /ws HTTP/1.1\r\nHost: localhost\r\nUpgrade: websocket\r\n"
                                "Connection: Upgrade\r\nSec-WebSocket-Key: " + key +
                                "\r\nSec-WebSocket-Version: 13\r\n\r\n";
        send_raw(req);
        while (buffer_.find("\r\n\r\n") == std::string::npos) {
            if (!fill(2.0)) return false;
        }
        const auto end = buffer_.find("\r\n\r\n");
        response_ = buffer_.substr(0, end);
        buffer_.erase(0, end + 4);
        return response_.rfind("HTTP/1.1 101", 0) == 0;
    }

    /// Raw HTTP GET; returns the full response (server closes the connection).
    std::string http_get(const std::string& path) {
        send_raw("GET " + path + " HTTP/1.1\r\nHost: localhost\r\n\r\n");
        while (fill(2.0)) {
        }
        return buffer_;
    }

    void send_text(const std::string& text) {
        const std::uint8_t mask[4] = {0x12, 0x34, 0x56, 0x78};
        const auto frame = mandala::websocket_frame(0x1, text, mask);
        send_raw(std::string(frame.begin(), frame.end()));
    }

    std::optional<mandala::WebSocketFrame> next_frame(double timeout = 2.0) {
        while (true) {
            mandala::WebSocketFrame f;
            const auto used = mandala::parse_websocket_frame(
                reinterpret_cast<const std::uint8_t*>(buffer_.data()), buffer_.size(), f, 64 << 20);
            if (used > 0) {
                buffer_.erase(0, used);
                return f;
            }
            if (!fill(timeout)) return std::nullopt;
        }
    }

    /// Next text message whose JSON contains `needle`.
    std::optional<std::string> next_text_containing(const std::string& needle, double timeout = 3.0) {
        const auto end = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout);
        while (std::chrono::steady_clock::now() < end) {
            auto f = next_frame(timeout);
            if (!f) return std::nullopt;
            if (f->opcode == 0x1 && f->payload.find(needle) != std::string::npos) return f->payload;
        }
        return std::nullopt;
    }

    [[nodiscard]] const std::string& response() const { return response_; }

private:
    void send_raw(const std::string& s) { [[maybe_unused]] auto n = ::send(fd_, s.data(), s.size(), MSG_NOSIGNAL); }

    bool fill(double timeout) {
        pollfd p{fd_, POLLIN, 0};
        if (::poll(&p, 1, static_cast<int>(timeout * 1000)) <= 0) return false;
        char buf[65536];
        const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
        if (n <= 0) return false;
        buffer_.append(buf, static_cast<std::size_t>(n));
        return true;
    }

    int fd_ = -1;
    bool connected_ = false;
    std::string buffer_;
    std::string response_;
};

}  // namespace test
