// mandala: live session, offline render and headset-to-OSC bridge.

#include "mandala/config.hpp"
#include "mandala/offline.hpp"
#include "mandala/session.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <iostream>
#include <optional>
#include <thread>

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted.store(true); }

struct CommonFlags {
    std::string config_path;
    std::string source;
    std::string mapping;
    std::uint16_t ws_port = 0;
    std::vector<std::string> osc_out;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "TOML-style config file");
    cmd->add_option("--seed", f.seed, "Seed for the mandala noise, grain jitter and simulator");
    cmd->add_option("--mapping", f.mapping, "forward or reverse")->check(CLI::IsMember({"forward", "reverse"}));
}

void add_live(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--source", f.source,
                    "device:<serial path> | replay:<file> | simulated[:<profile>] | manual[:<m>]");
    cmd->add_option("--osc-out", f.osc_out, "OSC destination host:port (repeatable)");
}

// Applies --source on top of the file config.
void apply_source(mandala::SessionConfig& c, const std::string& text) {
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
    c.source.kind = mandala::parse_source_kind(kind);
    switch (c.source.kind) {
        case mandala::SourceConfig::Kind::kDevice:
        case mandala::SourceConfig::Kind::kReplay:
            if (!arg.empty()) c.source.path = arg;
            break;
        case mandala::SourceConfig::Kind::kSimulated:
            if (!arg.empty()) c.source.profile.kind = mandala::parse_profile_kind(arg);
            break;
        case mandala::SourceConfig::Kind::kManual:
            if (!arg.empty()) c.source.manual_m = std::stod(arg);
            break;
    }
}

mandala::SessionConfig build_config(const CommonFlags& f) {
    mandala::SessionConfig c;
    if (!f.config_path.empty()) c = mandala::load_session_config(f.config_path);
    if (f.seed) c.apply_seed(*f.seed);
    if (!f.source.empty()) apply_source(c, f.source);
    if (!f.mapping.empty()) c.direction = mandala::parse_direction(f.mapping);
    if (!f.osc_out.empty()) {
        c.osc_out.clear();
        for (const auto& ep : f.osc_out) c.osc_out.push_back(mandala::osc::Endpoint::parse(ep));
    }
    if (f.ws_port != 0) c.websocket_port = f.ws_port;
    return c;
}

void print_stats(const mandala::Session& session) {
    const auto stats = session.stats();
    std::cerr << "frames=" << stats.frames << " samples=" << stats.engine.samples
              << " osc_sent=" << stats.osc_sent << " parse_errors=" << stats.engine.parse_errors
              << " clips=" << stats.engine.clip_count << '\n';
}

int run_session(mandala::SessionConfig cfg, double duration, bool quiet) {
    mandala::Session session(std::move(cfg));
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    session.start();
    if (!quiet) {
        std::cerr << "session running (source=" << session.status().source
                  << ", mode=" << mandala::to_string(session.config().direction) << ")";
        if (session.websocket_port() != 0) std::cerr << ", ws://127.0.0.1:" << session.websocket_port();
        std::cerr << '\n';
    }

    const auto started = std::chrono::steady_clock::now();
    while (!g_interrupted.load()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        if (duration > 0.0 && elapsed >= duration) break;
    }
    session.stop();
    print_stats(session);
    return 0;
}

int run_lockstep(mandala::SessionConfig cfg, double duration) {
    if (!(duration > 0.0)) {
        std::cerr << "error: --lockstep needs --duration\n";
        return 2;
    }
    mandala::Session session(std::move(cfg));
    session.run_lockstep(duration);
    print_stats(session);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Meditation-driven particle mandala and ambient audio engine"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    double run_duration = 0.0;
    bool lockstep = false;
    std::string serve_ui, record_trace, record_audio, frames_out;
    auto* run = app.add_subcommand("run", "Live session");
    add_common(run, run_flags);
    add_live(run, run_flags);
    run->add_option("--ws-port", run_flags.ws_port, "WebSocket port for the UI channel");
    run->add_option("--duration", run_duration, "Stop after this many seconds (default: until Ctrl-C)");
    run->add_option("--serve-ui", serve_ui, "Serve static UI files from this directory on the WebSocket port");
    run->add_option("--record-trace", record_trace, "Write the effective (t,m) per frame as CSV");
    run->add_option("--record-audio", record_audio, "Write the live audio output as WAV");
    run->add_option("--frames", frames_out, "Write every frame as t,m,q,x,y CSV");
    run->add_flag("--lockstep", lockstep, "Tick on a virtual clock as fast as possible (reproducible output)");

    CommonFlags render_flags;
    std::string trace_path, audio_mode, track1, track2, wav_out, wav_format = "float32";
    double render_rate = 0.0;
    auto* render = app.add_subcommand("render", "Offline render of an m trace");
    add_common(render, render_flags);
    render->add_option("--trace", trace_path, "Input CSV with header t,m")->required()->check(CLI::ExistingFile);
    render->add_option("--frames", frames_out, "Output frames CSV (t,m,q,x,y)");
    render->add_option("--frame-rate", render_rate, "Frames per second (default: config frame_rate)");
    render->add_option("--audio", audio_mode, "crossfade or granular")->check(CLI::IsMember({"crossfade", "granular"}));
    render->add_option("--track1,--track", track1, "T1 for crossfade, or the granular source");
    render->add_option("--track2", track2, "T2 for crossfade");
    render->add_option("--wav", wav_out, "Output WAV path");
    render->add_option("--format", wav_format, "pcm16 or float32")->check(CLI::IsMember({"pcm16", "float32"}));

    CommonFlags bridge_flags;
    double bridge_duration = 0.0;
    auto* bridge = app.add_subcommand("bridge", "Headset (or other source) to OSC only");
    add_common(bridge, bridge_flags);
    add_live(bridge, bridge_flags);
    bridge->add_option("--duration", bridge_duration, "Stop after this many seconds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) {
            auto cfg = build_config(run_flags);
            if (!serve_ui.empty()) {
                cfg.ui_dir = serve_ui;
                if (cfg.websocket_port == 0) cfg.websocket_port = 8080;
            }
            if (!record_trace.empty()) cfg.trace_out = record_trace;
            if (!record_audio.empty()) cfg.audio.record_path = record_audio;
            if (!frames_out.empty()) cfg.frames_out = frames_out;
            if (lockstep) return run_lockstep(std::move(cfg), run_duration);
            return run_session(std::move(cfg), run_duration, false);
        }

        if (bridge->parsed()) {
            auto cfg = build_config(bridge_flags);
            if (cfg.source.kind == mandala::SourceConfig::Kind::kSimulated && bridge_flags.source.empty() &&
                bridge_flags.config_path.empty()) {
                std::cerr << "bridge: no source given, using the simulator\n";
            }
            if (cfg.osc_out.empty()) cfg.osc_out.push_back({});
            cfg.websocket_port = 0;
            cfg.audio.mode = mandala::AudioConfig::Mode::kOff;
            return run_session(std::move(cfg), bridge_duration, false);
        }

        // render
        auto cfg = build_config(render_flags);
        const double rate = render_rate > 0.0 ? render_rate : cfg.frame_rate;
        const auto trace = mandala::read_trace_csv(std::filesystem::path(trace_path));
        if (!frames_out.empty()) {
            mandala::write_frames_csv(std::filesystem::path(frames_out), mandala::render_frames(cfg.mandala, trace, rate));
        }
        if (!audio_mode.empty()) {
            if (wav_out.empty()) throw std::invalid_argument("render: --wav is required with --audio");
            const auto mode = audio_mode == "crossfade" ? mandala::AudioRenderMode::kCrossfade
                                                        : mandala::AudioRenderMode::kGranular;
            const std::string t1 = track1.empty() ? cfg.audio.track1 : track1;
            const std::string t2 = track2.empty() ? cfg.audio.track2 : track2;
            std::vector<mandala::AudioTrack> tracks{mandala::read_wav(t1)};
            if (mode == mandala::AudioRenderMode::kCrossfade) tracks.push_back(mandala::read_wav(t2));
            const auto result = mandala::render_audio(mode, tracks, trace, cfg.audio.granular);
            mandala::write_wav(wav_out, result.audio,
                               wav_format == "pcm16" ? mandala::WavFormat::kPcm16 : mandala::WavFormat::kFloat32);
            if (result.clip_count > 0) std::cerr << "clipped samples: " << result.clip_count << '\n';
        }
        if (frames_out.empty() && audio_mode.empty()) {
            std::cerr << "render: nothing to do (give --frames and/or --audio)\n";
            return 2;
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
