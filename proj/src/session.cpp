#include "mandala/session.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace mandala {

using nlohmann::json;

std::string frame_json(const ParticleFrame& frame) {
    json positions = json::array();
    for (const auto& p : frame.positions) positions.push_back({p.x, p.y});
    return json{{"type", "frame"}, {"t", frame.t}, {"m", frame.m}, {"positions", std::move(positions)}}.dump();
}

std::string status_json(const StatusSnapshot& s) {
    return json{{"type", "status"},         {"source", s.source},      {"poorSignal", s.poor_signal},
                {"mode", to_string(s.mode)}, {"m", s.m},                {"degraded", s.degraded},
                {"frames", s.frames}}
        .dump();
}

bool apply_ui_command(Engine& engine, const std::string& json_text) {
    const json msg = json::parse(json_text, nullptr, false);
    if (msg.is_discarded() || !msg.is_object()) return false;
    const auto type = msg.find("type");
    const auto value = msg.find("value");
    if (type == msg.end() || !type->is_string() || value == msg.end()) return false;

    const std::string kind = type->get<std::string>();
    if (kind == "setM") {
        if (!value->is_number()) return false;
        return engine.set_manual_m(value->get<double>());
    }
    if (kind == "setMode") {
        if (!value->is_string()) return false;
        const auto mode = value->get<std::string>();
        if (mode != "forward" && mode != "reverse") return false;
        engine.set_direction(parse_direction(mode));
        return true;
    }
    if (kind == "setParam") {
        const auto name = msg.find("name");
        if (name == msg.end() || !name->is_string() || !value->is_number()) return false;
        return engine.set_param(name->get<std::string>(), value->get<double>());
    }
    return false;
}

// ---------------------------------------------------------------------------

namespace {

std::unique_ptr<AudioProcessor> make_processor(const AudioConfig& audio) {
    switch (audio.mode) {
        case AudioConfig::Mode::kOff: return nullptr;
        case AudioConfig::Mode::kCrossfade:
            return std::make_unique<RealtimeCrossfade>(read_wav(audio.track1), read_wav(audio.track2));
        case AudioConfig::Mode::kGranular:
            return std::make_unique<RealtimeGranular>(read_wav(audio.track1), audio.granular);
    }
    return nullptr;
}

}  // namespace

Session::Session(SessionConfig config) : config_(std::move(config)) {
    config_.validate();
    engine_ = std::make_unique<Engine>(config_, make_source(config_.source));

    if (auto processor = make_processor(config_.audio)) {
        audio_ = std::make_unique<AudioClock>(std::move(processor), handoff_, config_.audio.block_seconds,
                                              !config_.audio.record_path.empty());
    }
    for (const auto& ep : config_.osc_out) senders_.push_back(std::make_unique<osc::Sender>(ep));

    if (config_.osc_in_port != 0) {
        osc_in_ = std::make_unique<osc::Server>(
            config_.osc_in_port, [this](const osc::Message& msg, const osc::Endpoint&) {
                if (msg.address == address::kSetM && msg.args.size() == 1) {
                    if (const auto* f = std::get_if<float>(&msg.args[0])) set_manual_m(*f);
                } else if (msg.address == address::kSetMode && msg.args.size() == 1) {
                    if (const auto* s = std::get_if<std::string>(&msg.args[0])) {
                        if (*s == "forward" || *s == "reverse") set_direction(parse_direction(*s));
                    }
                }
            });
    }
    if (config_.websocket_port != 0) {
        ws_ = std::make_unique<WebSocketServer>(
            config_.websocket_port, [this](const std::string& text) { submit_ui_command(text); },
            config_.ui_dir, config_.websocket_host);
        ws_->on_connect([this] { ws_->broadcast(status_json(status())); });
    }
    if (!config_.frames_out.empty()) {
        frames_file_ = std::make_unique<std::ofstream>(config_.frames_out);
        if (!*frames_file_) throw std::runtime_error("cannot write frames file: " + config_.frames_out);
    }
    record_trace_ = !config_.trace_out.empty();
    status_.source = engine_->source().name();
    status_.mode = config_.direction;
}

Session::~Session() { stop(); }

void Session::start() {
    if (running_.exchange(true)) return;
    if (osc_in_) osc_in_->start();
    if (ws_) ws_->start();
    frame_thread_ = std::thread([this] { frame_loop(); });
}

void Session::stop() {
    const bool was_running = running_.exchange(false);
    if (frame_thread_.joinable()) frame_thread_.join();
    if (!was_running) return;

    AudioTrack recording;
    if (audio_) recording = audio_->stop();
    if (ws_) ws_->stop();
    if (osc_in_) osc_in_->stop();
    write_outputs(recording);
}

void Session::write_outputs(const AudioTrack& recording) {
    if (!config_.audio.record_path.empty() && !recording.empty()) {
        write_wav(config_.audio.record_path, recording, WavFormat::kFloat32);
    }
    if (frames_file_) frames_file_->flush();
    if (!config_.trace_out.empty()) {
        std::lock_guard lock(snapshot_mutex_);
        if (!trace_.empty()) write_trace_csv(config_.trace_out, trace_);
    }
}

void Session::run_lockstep(double duration) {
    if (running_.load()) throw std::logic_error("session already running");
    if (!(duration >= 0.0)) throw std::invalid_argument("duration must be >= 0");
    const double rate = config_.frame_rate;
    const auto ticks = static_cast<std::size_t>(std::floor(duration * rate + 1e-9)) + 1;

    std::optional<FrameCsvWriter> frames_writer;
    if (frames_file_) frames_writer.emplace(*frames_file_);

    // Tick k owns the audio frames [t_k sr, t_{k+1} sr).
    auto processor = make_processor(config_.audio);
    const bool record = processor && !config_.audio.record_path.empty();
    std::vector<float> recorded;
    std::vector<float> block;
    std::size_t audio_frame = 0;
    const std::size_t block_frames =
        processor ? std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(
                                                 config_.audio.block_seconds * processor->sample_rate())))
                  : 0;

    for (std::size_t k = 0; k < ticks; ++k) {
        tick_once(k, 0.0, frames_writer ? &*frames_writer : nullptr);
        if (!processor) continue;
        const double m = handoff_.read();
        const auto end = static_cast<std::size_t>(
            std::floor(frame_time(0.0, k + 1, rate) * processor->sample_rate() + 1e-9));
        while (audio_frame < end) {
            const std::size_t n = std::min(block_frames, end - audio_frame);
            block.assign(2 * n, 0.0f);
            processor->process(block, m);
            if (record) recorded.insert(recorded.end(), block.begin(), block.end());
            audio_frame += n;
        }
    }

    AudioTrack recording;
    if (record) {
        recording = AudioTrack::silent(processor->sample_rate(), 2, recorded.size() / 2);
        for (std::size_t i = 0; i < recorded.size() / 2; ++i) {
            recording.channels[0][i] = recorded[2 * i];
            recording.channels[1][i] = recorded[2 * i + 1];
        }
    }
    if (processor) {
        std::lock_guard lock(snapshot_mutex_);
        stats_.engine.clip_count = processor->clip_count();
    }
    write_outputs(recording);
}

void Session::set_manual_m(double m) {
    std::lock_guard lock(commands_mutex_);
    commands_.push_back([m](Engine& e) { e.set_manual_m(m); });
}

void Session::set_direction(Direction d) {
    std::lock_guard lock(commands_mutex_);
    commands_.push_back([d](Engine& e) { e.set_direction(d); });
}

void Session::set_param(const std::string& name, double value) {
    std::lock_guard lock(commands_mutex_);
    commands_.push_back([name, value](Engine& e) { e.set_param(name, value); });
}

void Session::submit_ui_command(std::string json_text) {
    std::lock_guard lock(commands_mutex_);
    commands_.push_back([text = std::move(json_text)](Engine& e) { apply_ui_command(e, text); });
}

void Session::apply_commands() {
    std::deque<std::function<void(Engine&)>> pending;
    {
        std::lock_guard lock(commands_mutex_);
        pending.swap(commands_);
    }
    for (auto& cmd : pending) cmd(*engine_);
}

void Session::send_osc(const std::vector<osc::Message>& msgs) {
    for (const auto& msg : msgs) {
        const auto bytes = osc::encode(msg);
        for (auto& sender : senders_) {
            try {
                sender->send_bytes(bytes);
                std::lock_guard lock(snapshot_mutex_);
                ++stats_.osc_sent;
            } catch (const osc::NetworkError&) {
                std::lock_guard lock(snapshot_mutex_);
                ++stats_.osc_errors;
            }
        }
    }
}

void Session::frame_loop() {
    using clock = std::chrono::steady_clock;
    const auto period = std::chrono::duration<double>(1.0 / config_.frame_rate);
    const auto start = clock::now();
    std::optional<FrameCsvWriter> frames_writer;
    if (frames_file_) frames_writer.emplace(*frames_file_);

    for (std::size_t k = 0; running_.load(); ++k) {
        const auto due = start + std::chrono::duration_cast<clock::duration>(period * static_cast<double>(k));
        std::this_thread::sleep_until(due);
        if (!running_.load()) break;
        const double lateness = std::chrono::duration<double>(clock::now() - due).count();
        tick_once(k, lateness, frames_writer ? &*frames_writer : nullptr);
        // Audio starts once the first m has been published.
        if (k == 0 && audio_) audio_->start();
    }
}

void Session::tick_once(std::size_t k, double lateness, FrameCsvWriter* frames_writer) {
    const double rate = config_.frame_rate;
    const auto status_every = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(rate)));

    apply_commands();
    const double t = frame_time(0.0, k, rate);
    const TickOutput out = engine_->tick(t);
    handoff_.publish(out.audio.m);
    send_osc(out.osc);

    const auto& st = engine_->state();
    StatusSnapshot snap{engine_->source().name(), st.poor_signal, engine_->direction(),
                        st.effective_m, st.degraded, st.counters.frames};
    if (ws_) {
        ws_->broadcast(frame_json(*out.frame));
        if (k % status_every == 0) ws_->broadcast(status_json(snap));
    }
    if (frames_writer) frames_writer->write(*out.frame);

    {
        std::lock_guard lock(snapshot_mutex_);
        status_ = snap;
        latest_ = *out.frame;
        if (record_trace_) trace_.push(t, out.audio.m);
        stats_.frames = st.counters.frames;
        const auto clips = stats_.engine.clip_count;
        stats_.engine = st.counters;
        stats_.engine.clip_count = clips;
        stats_.max_lateness = std::max(stats_.max_lateness, lateness);
    }
    if (on_tick_) on_tick_(out);
}

SessionStats Session::stats() const {
    std::lock_guard lock(snapshot_mutex_);
    SessionStats s = stats_;
    if (audio_ && audio_->blocks() > 0) {
        s.audio_blocks = audio_->blocks();
        s.engine.clip_count = audio_->clip_count();
    }
    return s;
}

StatusSnapshot Session::status() const {
    std::lock_guard lock(snapshot_mutex_);
    return status_;
}

std::optional<ParticleFrame> Session::latest_frame() const {
    std::lock_guard lock(snapshot_mutex_);
    return latest_;
}

MTrace Session::recorded_trace() const {
    std::lock_guard lock(snapshot_mutex_);
    return trace_;
}

}  // namespace mandala
