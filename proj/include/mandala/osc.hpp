#pragma once

// OSC 1.0 messages (no bundles) and one-message-per-datagram UDP transport.

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

namespace mandala::osc {

using Blob = std::vector<std::uint8_t>;
using Arg = std::variant<std::int32_t, float, std::string, Blob>;

struct Message {
    std::string address;
    std::vector<Arg> args;

    Message() = default;
    Message(std::string addr, std::vector<Arg> a = {}) : address(std::move(addr)), args(std::move(a)) {}

    bool operator==(const Message&) const = default;
};

/// Type-tag character for an argument ('i', 'f', 's', 'b').
char type_tag(const Arg& arg);

class EncodeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Throws EncodeError for an invalid address or string argument.
std::vector<std::uint8_t> encode(const Message& msg);

enum class DecodeErrc {
    kEmpty,
    kMisaligned,
    kBadAddress,
    kUnterminatedString,
    kBadPadding,
    kMissingTypeTags,
    kUnknownTypeTag,
    kTruncatedArgument,
    kTrailingBytes,
};

const char* to_string(DecodeErrc errc);

struct DecodeError {
    DecodeErrc code;
    std::size_t offset;  // byte offset where decoding failed
};

struct DecodeResult {
    std::optional<Message> message;
    DecodeError error{DecodeErrc::kEmpty, 0};

    explicit operator bool() const { return message.has_value(); }
};

/// Total: never throws, never reads out of bounds.
DecodeResult try_decode(std::span<const std::uint8_t> bytes);

class DecodeException : public std::runtime_error {
public:
    explicit DecodeException(DecodeError e);
    DecodeError error;
};

/// Throws DecodeException on malformed input.
Message decode(std::span<const std::uint8_t> bytes);

// ---------------------------------------------------------------------------
// UDP

inline constexpr std::size_t kMaxDatagram = 65507;
inline constexpr std::uint16_t kDefaultOutPort = 9000;
inline constexpr std::uint16_t kDefaultInPort = 9001;

struct Endpoint {
    std::string host = "127.0.0.1";
    std::uint16_t port = kDefaultOutPort;

    /// "host:port" or ":port"; throws std::invalid_argument.
    static Endpoint parse(const std::string& text);
    [[nodiscard]] std::string to_string() const;
    bool operator==(const Endpoint&) const = default;
};

class NetworkError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thread-safe UDP sender bound to one destination.
class Sender {
public:
    explicit Sender(const Endpoint& destination);
    ~Sender();
    Sender(const Sender&) = delete;
    Sender& operator=(const Sender&) = delete;

    /// Throws NetworkError (including for datagrams over 65507 bytes).
    void send(const Message& msg);
    void send_bytes(std::span<const std::uint8_t> datagram);

    [[nodiscard]] const Endpoint& destination() const { return destination_; }

private:
    Endpoint destination_;
    int fd_ = -1;
    std::vector<std::uint8_t> address_;  // sockaddr storage
};

/// Receive loop on a UDP port. Handler calls are serialized on the loop thread.
class Server {
public:
    using Handler = std::function<void(const Message&, const Endpoint& source)>;

    /// Binds immediately (port 0 picks an ephemeral port); throws NetworkError.
    Server(std::uint16_t port, Handler handler, const std::string& bind_host = "127.0.0.1");
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    void start();
    void stop();

    [[nodiscard]] std::uint16_t port() const { return port_; }
    [[nodiscard]] std::uint64_t received() const { return received_.load(); }
    [[nodiscard]] std::uint64_t errors() const { return errors_.load(); }

private:
    void loop();

    int fd_ = -1;
    std::uint16_t port_ = 0;
    Handler handler_;
    std::atomic<bool> running_{false};
    std::atomic<std::uint64_t> received_{0};
    std::atomic<std::uint64_t> errors_{0};
    std::thread thread_;
};

}  // namespace mandala::osc
