#include "mandala/websocket.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <openssl/evp.h>
#include <openssl/sha.h>
#include <poll.h>
#include <sys/eventfd.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mandala {

namespace {

constexpr const char* kWebSocketGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
constexpr std::size_t kMaxOutbuf = 4 << 20;
constexpr std::size_t kMaxRequest = 16 << 10;

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL, 0) | O_NONBLOCK); }

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::string content_type(const std::filesystem::path& p) {
    const auto ext = p.extension().string();
    if (ext == ".html") return "text/html; charset=utf-8";
    if (ext == ".js" || ext == ".mjs") return "text/javascript";
    if (ext == ".css") return "text/css";
    if (ext == ".json") return "application/json";
    if (ext == ".svg") return "image/svg+xml";
    if (ext == ".png") return "image/png";
    return "application/octet-stream";
}

std::string http_response(int status, const char* reason, const std::string& type, const std::string& body) {
    std::ostringstream r;
    r << "HTTP/1.1 " << status << ' ' << reason << "\r\n"
      << "Content-Type: " << type << "\r\n"
      << "Content-Length: " << body.size() << "\r\n"
      << "Connection: close\r\n\r\n"
      << body;
    return r.str();
}

}  // namespace

std::string websocket_accept_key(const std::string& client_key) {
    const std::string joined = client_key + kWebSocketGuid;
    unsigned char digest[SHA_DIGEST_LENGTH];
    ::SHA1(reinterpret_cast<const unsigned char*>(joined.data()), joined.size(), digest);
    unsigned char encoded[4 * ((SHA_DIGEST_LENGTH + 2) / 3) + 1];
    const int n = ::EVP_EncodeBlock(encoded, digest, SHA_DIGEST_LENGTH);
    return {reinterpret_cast<const char*>(encoded), static_cast<std::size_t>(n)};
}

std::vector<std::uint8_t> websocket_frame(std::uint8_t opcode, const std::string& payload,
                                          const std::uint8_t* mask) {
    std::vector<std::uint8_t> out;
    out.reserve(payload.size() + 14);
    out.push_back(static_cast<std::uint8_t>(0x80 | (opcode & 0x0F)));
    const std::uint8_t mask_bit = mask ? 0x80 : 0x00;
    const std::uint64_t n = payload.size();
    if (n < 126) {
        out.push_back(static_cast<std::uint8_t>(mask_bit | n));
    } else if (n <= 0xFFFF) {
        out.push_back(mask_bit | 126);
        out.push_back(static_cast<std::uint8_t>(n >> 8));
        out.push_back(static_cast<std::uint8_t>(n));
    } else {
        out.push_back(mask_bit | 127);
        for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(n >> s));
    }
    if (mask) out.insert(out.end(), mask, mask + 4);
    for (std::size_t i = 0; i < payload.size(); ++i) {
        const auto b = static_cast<std::uint8_t>(payload[i]);
        out.push_back(mask ? static_cast<std::uint8_t>(b ^ mask[i % 4]) : b);
    }
    return out;
}

std::size_t parse_websocket_frame(const std::uint8_t* data, std::size_t size, WebSocketFrame& out,
                                  std::size_t max_payload) {
    if (size < 2) return 0;
    if (data[0] & 0x70) throw std::runtime_error("websocket: reserved bits set");
    out.fin = (data[0] & 0x80) != 0;
    out.opcode = data[0] & 0x0F;
    const bool masked = (data[1] & 0x80) != 0;
    std::uint64_t len = data[1] & 0x7F;
    std::size_t at = 2;
    if (len == 126) {
        if (size < 4) return 0;
        len = (static_cast<std::uint64_t>(data[2]) << 8) | data[3];
        at = 4;
    } else if (len == 127) {
        if (size < 10) return 0;
        len = 0;
        for (int i = 0; i < 8; ++i) len = (len << 8) | data[2 + i];
        at = 10;
    }
    if (len > max_payload) throw std::runtime_error("websocket: frame too large");
    std::uint8_t mask[4] = {0, 0, 0, 0};
    if (masked) {
        if (size < at + 4) return 0;
        std::memcpy(mask, data + at, 4);
        at += 4;
    }
    if (size - at < len) return 0;
    out.payload.resize(static_cast<std::size_t>(len));
    for (std::size_t i = 0; i < len; ++i) {
        out.payload[i] = static_cast<char>(data[at + i] ^ mask[i % 4]);
    }
    return at + static_cast<std::size_t>(len);
}

// ---------------------------------------------------------------------------

WebSocketServer::WebSocketServer(std::uint16_t port, MessageHandler on_message, std::string static_dir,
                                 const std::string& host, std::size_t queue_capacity)
    : on_message_(std::move(on_message)),
      static_dir_(std::move(static_dir)),
      queue_capacity_(std::max<std::size_t>(1, queue_capacity)) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
    int yes = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(listen_fd_);
        throw std::runtime_error("websocket: invalid bind address " + host);
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
        ::listen(listen_fd_, 16) != 0) {
        const std::string err = std::strerror(errno);
        ::close(listen_fd_);
        throw std::runtime_error("websocket: cannot listen on " + host + ":" + std::to_string(port) + ": " + err);
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    set_nonblocking(listen_fd_);
    wake_fd_ = ::eventfd(0, EFD_NONBLOCK);
}

WebSocketServer::~WebSocketServer() {
    stop();
    if (listen_fd_ >= 0) ::close(listen_fd_);
    if (wake_fd_ >= 0) ::close(wake_fd_);
}

void WebSocketServer::start() {
    if (running_.exchange(true)) return;
    thread_ = std::thread([this] { loop(); });
}

void WebSocketServer::stop() {
    if (!running_.exchange(false)) return;
    wake();
    if (thread_.joinable()) thread_.join();
}

void WebSocketServer::wake() {
    const std::uint64_t one = 1;
    [[maybe_unused]] auto n = ::write(wake_fd_, &one, sizeof one);
}

void WebSocketServer::broadcast(std::string text) {
    {
        std::lock_guard lock(queue_mutex_);
        if (queue_.size() >= queue_capacity_) {
            queue_.pop_front();
            dropped_.fetch_add(1);
        }
        queue_.push_back(std::move(text));
    }
    wake();
}

void WebSocketServer::loop() {
    std::vector<pollfd> fds;
    while (running_.load()) {
        fds.clear();
        fds.push_back({listen_fd_, POLLIN, 0});
        fds.push_back({wake_fd_, POLLIN, 0});
        for (const auto& c : clients_) {
            short ev = POLLIN;
            if (!c.outbuf.empty()) ev |= POLLOUT;
            fds.push_back({c.fd, ev, 0});
        }
        ::poll(fds.data(), fds.size(), 100);

        if (fds[1].revents & POLLIN) {
            std::uint64_t v;
            [[maybe_unused]] auto n = ::read(wake_fd_, &v, sizeof v);
        }
        if (fds[0].revents & POLLIN) accept_clients();

        const std::size_t polled = fds.size() - 2;
        for (std::size_t i = 0; i < polled && i < clients_.size(); ++i) {
            const short re = fds[i + 2].revents;
            if (re & (POLLIN | POLLHUP | POLLERR)) read_client(clients_[i]);
        }

        std::deque<std::string> pending;
        {
            std::lock_guard lock(queue_mutex_);
            pending.swap(queue_);
        }
        for (const auto& text : pending) {
            const auto frame = websocket_frame(0x1, text);
            for (auto& c : clients_) {
                if (!c.upgraded || c.closing || c.fd < 0) continue;
                if (c.outbuf.size() > kMaxOutbuf) {
                    dropped_.fetch_add(1);
                    continue;
                }
                c.outbuf.append(frame.begin(), frame.end());
                sent_.fetch_add(1);
            }
        }

        for (auto& c : clients_) {
            if (c.fd >= 0 && !c.outbuf.empty()) flush(c);
            if (c.fd >= 0 && c.closing && c.outbuf.empty()) {
                ::close(c.fd);
                c.fd = -1;
            }
        }
        std::erase_if(clients_, [](const Client& c) { return c.fd < 0; });
        clients_open_.store(static_cast<std::size_t>(
            std::count_if(clients_.begin(), clients_.end(), [](const Client& c) { return c.upgraded; })));
    }

    const auto close_frame = websocket_frame(0x8, "");
    for (auto& c : clients_) {
        if (c.upgraded) c.outbuf.append(close_frame.begin(), close_frame.end());
        flush(c);
        if (c.fd >= 0) ::close(c.fd);
    }
    clients_.clear();
    clients_open_.store(0);
}

void WebSocketServer::accept_clients() {
    while (true) {
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) return;
        set_nonblocking(fd);
        int yes = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &yes, sizeof yes);
        Client c;
        c.fd = fd;
        clients_.push_back(std::move(c));
    }
}

void WebSocketServer::read_client(Client& c) {
    char buf[4096];
    while (c.fd >= 0) {
        const ssize_t n = ::recv(c.fd, buf, sizeof buf, 0);
        if (n > 0) {
            c.inbuf.append(buf, static_cast<std::size_t>(n));
            continue;
        }
        if (n == 0 || (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR)) {
            ::close(c.fd);
            c.fd = -1;
            return;
        }
        break;
    }
    if (c.closing) return;
    if (!c.upgraded) {
        handle_http(c);
    }
    if (c.upgraded) handle_frames(c);
}

void WebSocketServer::handle_http(Client& c) {
    const auto end = c.inbuf.find("\r\n\r\n");
    if (end == std::string::npos) {
        if (c.inbuf.size() > kMaxRequest) c.closing = true;
        return;
    }
    std::istringstream req(c.inbuf.substr(0, end));
    c.inbuf.erase(0, end + 4);

    std::string method, target, version;
    std::string line;
    std::getline(req, line);
    std::istringstream(line) >> method >> target >> version;

    std::string key, upgrade;
    while (std::getline(req, line)) {
        const auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        const std::string name = lower(trim(line.substr(0, colon)));
        const std::string value = trim(line.substr(colon + 1));
        if (name == "sec-websocket-key") key = value;
        if (name == "upgrade") upgrade = lower(value);
    }

    if (method == "GET" && upgrade == "websocket" && !key.empty()) {
        c.outbuf += "HTTP/1.1 101 Switching Protocols\r\n"
                    "Upgrade: websocket\r\n"
                    "Connection: Upgrade\r\n"
                    "Sec-WebSocket-Accept: " +
                    websocket_accept_key(key) + "\r\n\r\n";
        c.upgraded = true;
        if (on_connect_) on_connect_();
        return;
    }

    c.closing = true;
    if (method != "GET" || static_dir_.empty()) {
        c.outbuf += http_response(404, "Not Found", "text/plain", "not found\n");
        return;
    }
    std::string path = target.substr(0, target.find('?'));
    if (path.empty() || path == "/") path = "/index.html";
    if (path.find("..") != std::string::npos) {
        c.outbuf += http_response(403, "Forbidden", "text/plain", "forbidden\n");
        return;
    }
    const std::filesystem::path file = std::filesystem::path(static_dir_) / path.substr(1);
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        c.outbuf += http_response(404, "Not Found", "text/plain", "not found\n");
        return;
    }
    std::ostringstream body;
    body << in.rdbuf();
    c.outbuf += http_response(200, "OK", content_type(file), body.str());
}

void WebSocketServer::handle_frames(Client& c) {
    while (!c.inbuf.empty() && !c.closing) {
        WebSocketFrame frame;
        std::size_t used = 0;
        try {
            used = parse_websocket_frame(reinterpret_cast<const std::uint8_t*>(c.inbuf.data()),
                                         c.inbuf.size(), frame);
        } catch (const std::runtime_error&) {
            const auto close = websocket_frame(0x8, "");
            c.outbuf.append(close.begin(), close.end());
            c.closing = true;
            return;
        }
        if (used == 0) return;
        c.inbuf.erase(0, used);

        switch (frame.opcode) {
            case 0x0:  // continuation
            case 0x1:
                c.fragments += frame.payload;
                if (frame.fin) {
                    if (on_message_) on_message_(c.fragments);
                    c.fragments.clear();
                }
                break;
            case 0x8: {
                const auto close = websocket_frame(0x8, "");
                c.outbuf.append(close.begin(), close.end());
                c.closing = true;
                break;
            }
            case 0x9: {
                const auto pong = websocket_frame(0xA, frame.payload);
                c.outbuf.append(pong.begin(), pong.end());
                break;
            }
            default:
                break;  // binary and pong frames are ignored
        }
    }
}

void WebSocketServer::flush(Client& c) {
    while (c.fd >= 0 && !c.outbuf.empty()) {
        const ssize_t n = ::send(c.fd, c.outbuf.data(), c.outbuf.size(), MSG_NOSIGNAL);
        if (n > 0) {
            c.outbuf.erase(0, static_cast<std::size_t>(n));
            continue;
        }
        if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR)) return;
        ::close(c.fd);
        c.fd = -1;
    }
}

}  // namespace mandala
