#pragma once

// Brainwave signal acquisition: ThinkGear serial grammar, simulated
// profiles, normalization and frame-rate smoothing of the 1 Hz eSense values.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mandala {

inline constexpr int kPoorSignalThreshold = 25;

/// One 1 Hz eSense reading.
struct EsenseSample {
    double timestamp = 0.0;
    int meditation = 0;   // 0..100
    int attention = 0;    // 0..100
    int poor_signal = 0;  // 0..200, 0 = good contact

    // Which codes were present in the originating packet.
    enum Field : std::uint8_t { kPoorSignal = 1, kAttention = 2, kMeditation = 4 };
    std::uint8_t present = 0;

    [[nodiscard]] bool good_contact() const { return poor_signal <= kPoorSignalThreshold; }

    bool operator==(const EsenseSample&) const = default;
};

// ---------------------------------------------------------------------------
// ThinkGear

inline constexpr std::uint8_t kThinkGearSync = 0xAA;
inline constexpr std::uint8_t kThinkGearExcode = 0x55;
inline constexpr std::size_t kThinkGearMaxPayload = 169;

namespace thinkgear_code {
inline constexpr std::uint8_t kPoorSignal = 0x02;
inline constexpr std::uint8_t kAttention = 0x04;
inline constexpr std::uint8_t kMeditation = 0x05;
inline constexpr std::uint8_t kRawWave = 0x80;
inline constexpr std::uint8_t kAsicEegPower = 0x83;
}  // namespace thinkgear_code

/// Streaming parser state. May sit mid-packet between calls.
struct ThinkGearState {
    enum class Phase : std::uint8_t { kSync1, kSync2, kLength, kPayload, kChecksum };

    Phase phase = Phase::kSync1;
    std::uint8_t expected_length = 0;
    std::vector<std::uint8_t> payload;

    // Last-known values for fields a packet does not carry.
    int meditation = 0;
    int attention = 0;
    int poor_signal = 0;

    double origin = 0.0;            // timestamp of the first emitted sample
    std::uint64_t emitted = 0;      // samples emitted so far
    std::uint64_t checksum_errors = 0;
    std::uint64_t desyncs = 0;      // length byte > 169
    std::uint64_t malformed = 0;    // checksum ok but payload unusable
    std::uint64_t packets = 0;      // checksum-valid packets

    bool operator==(const ThinkGearState&) const = default;
};

/// Feeds `chunk` into the parser and returns every sample completed by it.
/// Samples are stamped origin + n seconds (n = emission index).
std::vector<EsenseSample> parse_thinkgear(std::span<const std::uint8_t> chunk,
                                          ThinkGearState& state);

/// Encodes one packet carrying the given codes (test/replay helper).
std::vector<std::uint8_t> encode_thinkgear_packet(std::span<const std::uint8_t> payload);
std::vector<std::uint8_t> encode_esense_packet(int poor_signal, int attention, int meditation);

std::uint8_t thinkgear_checksum(std::span<const std::uint8_t> payload);

// ---------------------------------------------------------------------------
// Simulator

struct SignalProfile {
    enum class Kind { kConstant, kLinearRamp, kSinusoid, kRandomWalk };

    Kind kind = Kind::kConstant;
    double level = 50.0;      // constant level / ramp start / sinusoid center / walk start
    double target = 100.0;    // ramp end
    double amplitude = 50.0;  // sinusoid amplitude / max walk step
    double period = 60.0;     // sinusoid period / ramp duration, seconds
    std::uint64_t seed = 0;
};

SignalProfile::Kind parse_profile_kind(const std::string& name);
std::string to_string(SignalProfile::Kind kind);

/// Deterministic sample of the profile at time t >= 0. Random walks step
/// once per second and depend only on (seed, floor(t)).
EsenseSample simulate(const SignalProfile& profile, double t);

// ---------------------------------------------------------------------------
// Normalization and smoothing

class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// raw / 100. Throws RangeError outside 0..100.
double normalize(int raw);

struct SmoothedSignal {
    double m = 0.0;
    double a = 0.0;
    double time_constant = 1.0;  // seconds; 0 disables smoothing
    double last_update = 0.0;
};

/// Exponential approach toward the targets over dt seconds.
SmoothedSignal smooth_step(const SmoothedSignal& state, double target_m, double target_a,
                           double dt);
SmoothedSignal smooth_step(const SmoothedSignal& state, double target_m, double dt);

}  // namespace mandala
