#include "mandala/sources.hpp"

#include <fcntl.h>
#include <termios.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace mandala {

Reading to_reading(const EsenseSample& s) {
    return {s.timestamp, normalize(s.meditation), normalize(s.attention), s.meditation, s.poor_signal};
}

std::vector<Reading> SimulatedSource::poll(double now) {
    std::vector<Reading> out;
    while (static_cast<double>(next_second_) <= now) {
        out.push_back(to_reading(simulate(profile_, static_cast<double>(next_second_))));
        ++next_second_;
    }
    return out;
}

ReplaySource::ReplaySource(std::vector<std::uint8_t> bytes) {
    ThinkGearState state;
    samples_ = parse_thinkgear(bytes, state);
    errors_ = state.checksum_errors + state.desyncs + state.malformed;
}

std::unique_ptr<ReplaySource> ReplaySource::from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open replay file: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return std::make_unique<ReplaySource>(std::move(bytes));
}

std::vector<Reading> ReplaySource::poll(double now) {
    std::vector<Reading> out;
    while (next_ < samples_.size() && samples_[next_].timestamp <= now) {
        out.push_back(to_reading(samples_[next_++]));
    }
    return out;
}

namespace {

speed_t baud_constant(int baud) {
    switch (baud) {
        case 9600: return B9600;
        case 19200: return B19200;
        case 38400: return B38400;
        case 57600: return B57600;
        case 115200: return B115200;
        default: throw std::invalid_argument("unsupported baud rate " + std::to_string(baud));
    }
}

}  // namespace

DeviceSource::DeviceSource(const std::string& path, int baud) {
    const speed_t speed = baud_constant(baud);
    fd_ = ::open(path.c_str(), O_RDONLY | O_NOCTTY | O_NONBLOCK);
    if (fd_ < 0) throw std::runtime_error("cannot open serial device " + path + ": " + std::strerror(errno));
    termios tio{};
    if (::tcgetattr(fd_, &tio) == 0) {
        ::cfmakeraw(&tio);
        ::cfsetispeed(&tio, speed);
        ::cfsetospeed(&tio, speed);
        tio.c_cflag |= CLOCAL | CREAD;
        ::tcsetattr(fd_, TCSANOW, &tio);
    }
    // Not a tty (e.g. a FIFO for testing): read it as a plain byte stream.
}

DeviceSource::~DeviceSource() {
    if (fd_ >= 0) ::close(fd_);
}

std::vector<Reading> DeviceSource::poll(double now) {
    std::vector<Reading> out;
    std::uint8_t buf[512];
    while (true) {
        const ssize_t n = ::read(fd_, buf, sizeof buf);
        if (n <= 0) break;
        for (auto& s : parse_thinkgear(std::span(buf, static_cast<std::size_t>(n)), parser_)) {
            Reading r = to_reading(s);
            r.timestamp = now;
            out.push_back(r);
        }
    }
    return out;
}

std::uint64_t DeviceSource::parse_errors() const {
    return parser_.checksum_errors + parser_.desyncs + parser_.malformed;
}

ManualSource::ManualSource(double m) : value_(m) {
    if (!(m >= 0.0 && m <= 1.0)) throw std::invalid_argument("manual m must be within [0, 1]");
}

bool ManualSource::set_manual(double m) {
    if (!(m >= 0.0 && m <= 1.0)) return false;
    value_.store(m);
    dirty_.store(true);
    return true;
}

std::vector<Reading> ManualSource::poll(double now) {
    if (!dirty_.exchange(false)) return {};
    const double m = value_.load();
    return {Reading{now, m, 0.0, static_cast<int>(std::lround(m * 100.0)), 0}};
}

std::unique_ptr<SignalSource> make_source(const SourceConfig& cfg) {
    switch (cfg.kind) {
        case SourceConfig::Kind::kDevice: return std::make_unique<DeviceSource>(cfg.path, cfg.baud);
        case SourceConfig::Kind::kReplay: return ReplaySource::from_file(cfg.path);
        case SourceConfig::Kind::kSimulated: return std::make_unique<SimulatedSource>(cfg.profile);
        case SourceConfig::Kind::kManual: return std::make_unique<ManualSource>(cfg.manual_m);
    }
    throw std::invalid_argument("unknown source kind");
}

}  // namespace mandala
