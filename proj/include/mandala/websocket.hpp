#pragma once

// Small RFC 6455 text-message server for the UI channel. One I/O thread;
// broadcasts go through a bounded queue that drops the oldest entry on
// overflow. Plain GET requests are answered from an optional static dir.

#include <atomic>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace mandala {

/// Sec-WebSocket-Accept value for a client key.
std::string websocket_accept_key(const std::string& client_key);

/// Encodes a single unfragmented frame (server frames are unmasked).
std::vector<std::uint8_t> websocket_frame(std::uint8_t opcode, const std::string& payload,
                                          const std::uint8_t* mask = nullptr);

struct WebSocketFrame {
    bool fin = true;
    std::uint8_t opcode = 0;
    std::string payload;
};

/// Parses one frame from the front of `buffer`. Returns the bytes consumed,
/// 0 if incomplete, or throws std::runtime_error on a protocol violation.
std::size_t parse_websocket_frame(const std::uint8_t* data, std::size_t size, WebSocketFrame& out,
                                  std::size_t max_payload = 1 << 20);

class WebSocketServer {
public:
    using MessageHandler = std::function<void(const std::string& text)>;
    using ConnectHandler = std::function<void()>;

    /// Binds immediately; port 0 picks an ephemeral port. Throws std::runtime_error.
    WebSocketServer(std::uint16_t port, MessageHandler on_message, std::string static_dir = "",
                    const std::string& host = "127.0.0.1", std::size_t queue_capacity = 8);
    ~WebSocketServer();
    WebSocketServer(const WebSocketServer&) = delete;
    WebSocketServer& operator=(const WebSocketServer&) = delete;

    void on_connect(ConnectHandler handler) { on_connect_ = std::move(handler); }

    void start();
    /// Sends close frames, flushes what it can and closes every socket.
    void stop();

    /// Queues a text message for every open client.
    void broadcast(std::string text);

    [[nodiscard]] std::uint16_t port() const { return port_; }
    [[nodiscard]] std::size_t client_count() const { return clients_open_.load(); }
    [[nodiscard]] std::uint64_t dropped() const { return dropped_.load(); }
    [[nodiscard]] std::uint64_t sent() const { return sent_.load(); }

private:
    struct Client {
        int fd = -1;
        bool upgraded = false;
        bool closing = false;  // close after flushing outbuf
        std::string inbuf;
        std::string outbuf;
        std::string fragments;
    };

    void loop();
    void accept_clients();
    void read_client(Client& c);
    void handle_http(Client& c);
    void handle_frames(Client& c);
    void flush(Client& c);
    void wake();

    int listen_fd_ = -1;
    int wake_fd_ = -1;
    std::uint16_t port_ = 0;
    MessageHandler on_message_;
    ConnectHandler on_connect_;
    std::string static_dir_;
    std::size_t queue_capacity_;

    std::mutex queue_mutex_;
    std::deque<std::string> queue_;

    std::vector<Client> clients_;
    std::atomic<bool> running_{false};
    std::atomic<std::size_t> clients_open_{0};
    std::atomic<std::uint64_t> dropped_{0};
    std::atomic<std::uint64_t> sent_{0};
    std::thread thread_;
};

}  // namespace mandala
