#pragma once

#include "mandala/audio.hpp"
#include "mandala/mandala.hpp"
#include "mandala/osc.hpp"
#include "mandala/signal.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace mandala {

enum class Direction { kForward, kReverse };

/// forward: m, reverse: 1 - m.
constexpr double apply_direction(Direction d, double m) {
    return d == Direction::kForward ? m : 1.0 - m;
}

Direction parse_direction(const std::string& text);
std::string to_string(Direction d);

struct SourceConfig {
    enum class Kind { kDevice, kReplay, kSimulated, kManual };

    Kind kind = Kind::kSimulated;
    std::string path;  // serial device or replay file
    int baud = 57600;
    SignalProfile profile;
    double manual_m = 0.5;
};

SourceConfig::Kind parse_source_kind(const std::string& text);
std::string to_string(SourceConfig::Kind kind);

struct AudioConfig {
    enum class Mode { kOff, kCrossfade, kGranular };

    Mode mode = Mode::kOff;
    std::string track1;  // crossfade T1, or the granular source
    std::string track2;  // crossfade T2
    GranularConfig granular;
    double block_seconds = 0.01;
    std::string record_path;  // optional WAV recording of the live output
};

AudioConfig::Mode parse_audio_mode(const std::string& text);

struct SessionConfig {
    SourceConfig source;
    Direction direction = Direction::kForward;
    double frame_rate = 60.0;
    MandalaConfig mandala = MandalaConfig::uniform();
    AudioConfig audio;
    std::vector<osc::Endpoint> osc_out;
    std::uint16_t osc_in_port = 0;      // 0 disables inbound control
    std::uint16_t websocket_port = 0;   // 0 disables the UI channel
    std::string websocket_host = "127.0.0.1";
    std::string ui_dir;                 // static files served on the WebSocket port
    std::uint64_t seed = 0;
    double time_constant = 1.0;         // smoothing, seconds; 0 disables
    double osc_rate = 10.0;             // Hz for /em/meditation etc.
    double starvation_timeout = 5.0;    // seconds without samples before degraded
    bool emit_particles = false;        // /em/particle per particle per frame
    std::string trace_out;              // optional CSV of (t, effective m) per tick
    std::string frames_out;             // optional frames CSV

    /// Propagates `seed` into the mandala, granular and simulator seeds.
    void apply_seed(std::uint64_t s);

    /// Throws std::invalid_argument on a broken invariant.
    void validate() const;
};

/// Minimal TOML subset: [sections], key = value, "strings", numbers,
/// true/false, ["string", "arrays"], # comments.
class ConfigFile {
public:
    using Value = std::variant<std::string, double, bool, std::vector<std::string>>;

    static ConfigFile parse(std::istream& in);
    static ConfigFile load(const std::filesystem::path& path);

    [[nodiscard]] bool has(const std::string& key) const { return values_.contains(key); }
    [[nodiscard]] const Value* find(const std::string& key) const;
    [[nodiscard]] const std::map<std::string, Value>& values() const { return values_; }

    // Typed access with "section.key" names; throw on a type mismatch.
    [[nodiscard]] std::string get_string(const std::string& key, const std::string& fallback) const;
    [[nodiscard]] double get_number(const std::string& key, double fallback) const;
    [[nodiscard]] bool get_bool(const std::string& key, bool fallback) const;
    [[nodiscard]] std::vector<std::string> get_strings(const std::string& key) const;

private:
    std::map<std::string, Value> values_;
};

/// Builds a session config from a parsed file; unknown keys are rejected.
SessionConfig session_config_from(const ConfigFile& file);
SessionConfig load_session_config(const std::filesystem::path& path);

}  // namespace mandala
