#pragma once

#include "mandala/config.hpp"
#include "mandala/signal.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace mandala {

/// One normalized reading handed to the engine.
struct Reading {
    double timestamp = 0.0;
    double m = 0.0;  // [0, 1]
    double a = 0.0;  // [0, 1]
    int raw_meditation = 0;
    int poor_signal = 0;
};

Reading to_reading(const EsenseSample& s);

class SignalSource {
public:
    virtual ~SignalSource() = default;

    /// Readings that became available up to session time `now`.
    virtual std::vector<Reading> poll(double now) = 0;
    [[nodiscard]] virtual std::string name() const = 0;
    /// False for sources that never go quiet (manual).
    [[nodiscard]] virtual bool can_starve() const { return true; }
    [[nodiscard]] virtual std::uint64_t parse_errors() const { return 0; }
    /// Manual override; returns false if the source does not accept it.
    virtual bool set_manual(double /*m*/) { return false; }
};

/// Emits simulate(profile, k) at integer seconds k.
class SimulatedSource final : public SignalSource {
public:
    explicit SimulatedSource(SignalProfile profile) : profile_(profile) {}
    std::vector<Reading> poll(double now) override;
    [[nodiscard]] std::string name() const override { return "simulated"; }

private:
    SignalProfile profile_;
    std::uint64_t next_second_ = 0;
};

/// Captured serial bytes, released at their nominal 1 Hz stamps.
class ReplaySource final : public SignalSource {
public:
    explicit ReplaySource(std::vector<std::uint8_t> bytes);
    static std::unique_ptr<ReplaySource> from_file(const std::filesystem::path& path);

    std::vector<Reading> poll(double now) override;
    [[nodiscard]] std::string name() const override { return "replay"; }
    [[nodiscard]] std::uint64_t parse_errors() const override { return errors_; }
    [[nodiscard]] std::size_t size() const { return samples_.size(); }

private:
    std::vector<EsenseSample> samples_;
    std::size_t next_ = 0;
    std::uint64_t errors_ = 0;
};

/// Live ThinkGear serial port (raw termios, non-blocking).
class DeviceSource final : public SignalSource {
public:
    DeviceSource(const std::string& path, int baud);
    ~DeviceSource() override;
    DeviceSource(const DeviceSource&) = delete;
    DeviceSource& operator=(const DeviceSource&) = delete;

    std::vector<Reading> poll(double now) override;
    [[nodiscard]] std::string name() const override { return "device"; }
    [[nodiscard]] std::uint64_t parse_errors() const override;

private:
    int fd_ = -1;
    ThinkGearState parser_;
};

/// Value set by the UI or tests.
class ManualSource final : public SignalSource {
public:
    explicit ManualSource(double m = 0.5);
    std::vector<Reading> poll(double now) override;
    [[nodiscard]] std::string name() const override { return "manual"; }
    [[nodiscard]] bool can_starve() const override { return false; }
    bool set_manual(double m) override;

private:
    std::atomic<double> value_;
    std::atomic<bool> dirty_{true};
};

std::unique_ptr<SignalSource> make_source(const SourceConfig& cfg);

}  // namespace mandala
