#pragma once

// Per-tick pipeline: source -> smoothing -> direction -> mandala frame,
// audio parameters and outbound OSC, all from one effective m.

#include "mandala/audio.hpp"
#include "mandala/config.hpp"
#include "mandala/mandala.hpp"
#include "mandala/osc.hpp"
#include "mandala/signal.hpp"
#include "mandala/sources.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mandala {

namespace address {
inline constexpr const char* kMeditation = "/em/meditation";
inline constexpr const char* kAttention = "/em/attention";
inline constexpr const char* kRaw = "/em/raw";
inline constexpr const char* kMode = "/em/mode";
inline constexpr const char* kParticle = "/em/particle";
// Inbound control.
inline constexpr const char* kSetM = "/em/set/m";
inline constexpr const char* kSetMode = "/em/set/mode";
}  // namespace address

struct AudioParams {
    double m = 0.0;
    CrossfadeGains gains;
    double rate = 0.0;          // m R0
    double jitter_bound = 0.0;  // alpha (1 - m)
};

struct EngineCounters {
    std::uint64_t frames = 0;
    std::uint64_t samples = 0;
    std::uint64_t held_samples = 0;  // poor_signal above threshold
    std::uint64_t parse_errors = 0;
    std::uint64_t rejected_commands = 0;
    std::uint64_t clip_count = 0;
};

struct EngineState {
    SmoothedSignal signal;
    double target_m = 0.0;
    double target_a = 0.0;
    double effective_m = 0.0;
    int raw_meditation = 0;
    int poor_signal = 0;
    double clock = 0.0;
    double last_sample_time = 0.0;
    bool have_sample = false;
    bool holding = false;   // latest reading had poor contact
    bool degraded = false;  // source starved
    ParticleFrame frame;
    EngineCounters counters;
};

struct TickOutput {
    const ParticleFrame* frame = nullptr;  // valid until the next tick
    AudioParams audio;
    std::vector<osc::Message> osc;
};

class Engine {
public:
    Engine(SessionConfig config, std::unique_ptr<SignalSource> source);

    /// Advances to session time `now` (seconds, non-decreasing).
    TickOutput tick(double now);

    [[nodiscard]] const EngineState& state() const { return state_; }
    [[nodiscard]] const SessionConfig& config() const { return config_; }
    [[nodiscard]] const Mandala& mandala() const { return mandala_; }
    [[nodiscard]] Direction direction() const { return config_.direction; }
    [[nodiscard]] const SignalSource& source() const { return *source_; }

    void set_direction(Direction d);
    /// Only accepted by a manual source; m must lie in [0, 1].
    bool set_manual_m(double m);
    /// Whitelisted live parameter edit; returns false if rejected.
    bool set_param(const std::string& name, double value);

    static const std::vector<std::string>& param_whitelist();

private:
    void ingest(double now);

    SessionConfig config_;
    std::unique_ptr<SignalSource> source_;
    Mandala mandala_;
    EngineState state_;
    bool started_ = false;
    bool mode_dirty_ = true;
    long long last_osc_slot_ = -1;
};

}  // namespace mandala
