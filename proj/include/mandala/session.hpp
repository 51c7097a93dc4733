#pragma once

// Live session: frame clock thread driving the Engine, an AudioClock for the
// audio path, OSC fan-out, inbound OSC control and the WebSocket UI channel.

#include "mandala/config.hpp"
#include "mandala/engine.hpp"
#include "mandala/offline.hpp"
#include "mandala/osc.hpp"
#include "mandala/realtime.hpp"
#include "mandala/trace.hpp"
#include "mandala/websocket.hpp"

#include <atomic>
#include <chrono>
#include <deque>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace mandala {

/// {"type":"frame","t":..,"m":..,"positions":[[x,y],..]}
std::string frame_json(const ParticleFrame& frame);

struct StatusSnapshot {
    std::string source;
    int poor_signal = 0;
    Direction mode = Direction::kForward;
    double m = 0.0;
    bool degraded = false;
    std::uint64_t frames = 0;
};

/// {"type":"status","source":..,"poorSignal":..,"mode":..,"m":..,"degraded":..,"frames":..}
std::string status_json(const StatusSnapshot& s);

/// Parses a client command and applies it to the engine. Returns false for
/// malformed or rejected commands.
bool apply_ui_command(Engine& engine, const std::string& json_text);

struct SessionStats {
    std::uint64_t frames = 0;
    std::uint64_t osc_sent = 0;
    std::uint64_t osc_errors = 0;
    std::uint64_t audio_blocks = 0;
    double max_lateness = 0.0;  // seconds behind schedule, worst tick
    EngineCounters engine;
};

class Session {
public:
    /// Opens every resource up front (tracks, serial port, sockets) and
    /// throws std::runtime_error / std::invalid_argument on failure.
    explicit Session(SessionConfig config);
    ~Session();
    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    void start();
    /// Stops all loops, flushes sockets and writes recordings.
    void stop();
    /// Runs ticks 0..floor(duration * fps) on a virtual clock, without
    /// sleeping; audio is rendered in step with the ticks. Writes the same
    /// outputs as stop(). Not combinable with start().
    void run_lockstep(double duration);
    [[nodiscard]] bool running() const { return running_.load(); }

    // Thread-safe controls, applied at the start of the next tick.
    void set_manual_m(double m);
    void set_direction(Direction d);
    void set_param(const std::string& name, double value);
    void submit_ui_command(std::string json_text);

    [[nodiscard]] SessionStats stats() const;
    [[nodiscard]] StatusSnapshot status() const;
    [[nodiscard]] std::optional<ParticleFrame> latest_frame() const;
    /// Effective (t, m) per tick, recorded when trace_out is set or record_trace() was called.
    [[nodiscard]] MTrace recorded_trace() const;
    void record_trace(bool on) { record_trace_ = on; }

    [[nodiscard]] std::uint16_t websocket_port() const { return ws_ ? ws_->port() : 0; }
    [[nodiscard]] std::uint16_t osc_in_port() const { return osc_in_ ? osc_in_->port() : 0; }
    [[nodiscard]] const SessionConfig& config() const { return config_; }

    /// Called on the frame thread after every tick (tests, CLI progress).
    void on_tick(std::function<void(const TickOutput&)> cb) { on_tick_ = std::move(cb); }

private:
    void frame_loop();
    void tick_once(std::size_t k, double lateness, FrameCsvWriter* frames_writer);
    void write_outputs(const AudioTrack& recording);
    void apply_commands();
    void send_osc(const std::vector<osc::Message>& msgs);

    SessionConfig config_;
    std::unique_ptr<Engine> engine_;
    std::vector<std::unique_ptr<osc::Sender>> senders_;
    std::unique_ptr<osc::Server> osc_in_;
    std::unique_ptr<WebSocketServer> ws_;
    ParamHandoff handoff_;
    std::unique_ptr<AudioClock> audio_;
    std::unique_ptr<std::ofstream> frames_file_;

    mutable std::mutex commands_mutex_;
    std::deque<std::function<void(Engine&)>> commands_;

    mutable std::mutex snapshot_mutex_;
    StatusSnapshot status_;
    std::optional<ParticleFrame> latest_;
    MTrace trace_;
    SessionStats stats_;

    std::function<void(const TickOutput&)> on_tick_;
    bool record_trace_ = false;
    std::atomic<bool> running_{false};
    std::thread frame_thread_;
};

}  // namespace mandala
