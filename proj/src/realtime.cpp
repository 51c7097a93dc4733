#include "mandala/realtime.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace mandala {

namespace {

float sample_at(const AudioTrack& t, std::size_t channel, std::size_t frame) {
    const auto& ch = t.channels[std::min(channel, t.channel_count() - 1)];
    return ch[frame];
}

float clamp_unit(float v, std::size_t& clips) {
    if (v > 1.0f || v < -1.0f) {
        ++clips;
        return std::clamp(v, -1.0f, 1.0f);
    }
    return v;
}

}  // namespace

RealtimeCrossfade::RealtimeCrossfade(AudioTrack t1, AudioTrack t2)
    : t1_(std::move(t1)), t2_(std::move(t2)) {
    t1_.validate();
    t2_.validate();
    if (t1_.empty() || t2_.empty()) throw std::invalid_argument("crossfade: empty track");
    if (t1_.sample_rate != t2_.sample_rate) throw std::invalid_argument("crossfade: sample rates differ");
}

void RealtimeCrossfade::process(std::span<float> out, double m) noexcept {
    const double g = std::clamp(m, 0.0, 1.0);
    const std::size_t frames = out.size() / 2;
    for (std::size_t i = 0; i < frames; ++i) {
        for (std::size_t c = 0; c < 2; ++c) {
            out[2 * i + c] = static_cast<float>(
                crossfade_sample(g, sample_at(t1_, c, pos1_), sample_at(t2_, c, pos2_)));
        }
        if (++pos1_ == t1_.frames()) pos1_ = 0;
        if (++pos2_ == t2_.frames()) pos2_ = 0;
    }
}

RealtimeGranular::RealtimeGranular(AudioTrack track, GranularConfig cfg)
    : track_(std::move(track)), cfg_(cfg), rng_(cfg.seed) {
    track_.validate();
    cfg_.validate();
    if (track_.empty()) throw std::invalid_argument("granular: empty track");
    grain_len_ = cfg_.grain_frames(track_.sample_rate);
    hop_ = cfg_.hop_frames(track_.sample_rate);
    window_.resize(grain_len_);
    for (std::size_t j = 0; j < grain_len_; ++j) window_[j] = static_cast<float>(hann(j, grain_len_));
    max_position_ = std::max(0.0, track_.duration() - static_cast<double>(grain_len_) / track_.sample_rate);
}

void RealtimeGranular::spawn(double m) noexcept {
    const auto params = granular_params(m, cfg_, rng_.uniform_signed());
    const double pos = std::clamp(tau_ + params.delta_tau, 0.0, max_position_);
    Grain* slot = &grains_[0];
    for (auto& g : grains_) {
        if (!g.active) {
            slot = &g;
            break;
        }
        if (g.age > slot->age) slot = &g;  // pool full: replace the oldest
    }
    *slot = Grain{pos * track_.sample_rate, 0, true};
}

void RealtimeGranular::process(std::span<float> out, double m) noexcept {
    const double g = std::clamp(m, 0.0, 1.0);
    const std::size_t frames = out.size() / 2;
    const double rate = track_.sample_rate;
    const auto n = static_cast<double>(track_.frames());

    for (std::size_t i = 0; i < frames; ++i) {
        if (until_next_grain_ == 0) {
            spawn(g);
            until_next_grain_ = hop_;
        }
        --until_next_grain_;

        float left = 0.0f, right = 0.0f;
        for (auto& grain : grains_) {
            if (!grain.active) continue;
            const double pos = grain.start + static_cast<double>(grain.age);
            const auto idx = static_cast<std::size_t>(pos);
            const float frac = static_cast<float>(pos - std::floor(pos));
            const float w = window_[grain.age];
            if (pos < n) {
                const std::size_t next = idx + 1 < track_.frames() ? idx + 1 : idx;
                for (std::size_t c = 0; c < 2; ++c) {
                    const float a = sample_at(track_, c, idx);
                    const float b = sample_at(track_, c, next);
                    (c == 0 ? left : right) += w * (a + frac * (b - a));
                }
            }
            if (++grain.age >= grain_len_) grain.active = false;
        }
        out[2 * i] = clamp_unit(left, clips_);
        out[2 * i + 1] = clamp_unit(right, clips_);

        tau_ += g * cfg_.base_rate / rate;
        if (max_position_ > 0.0 && tau_ > max_position_) tau_ = std::fmod(tau_, max_position_);
    }
}

// ---------------------------------------------------------------------------

SpscRing::SpscRing(std::size_t capacity) : buffer_(capacity + 1) {}

std::size_t SpscRing::push(std::span<const float> data) noexcept {
    const std::size_t cap = buffer_.size();
    std::size_t head = head_.load(std::memory_order_relaxed);
    const std::size_t tail = tail_.load(std::memory_order_acquire);
    const std::size_t free = (tail + cap - head - 1) % cap;
    const std::size_t n = std::min(free, data.size());
    for (std::size_t i = 0; i < n; ++i) {
        buffer_[head] = data[i];
        head = head + 1 == cap ? 0 : head + 1;
    }
    head_.store(head, std::memory_order_release);
    if (n < data.size()) dropped_.fetch_add(data.size() - n, std::memory_order_relaxed);
    return n;
}

std::size_t SpscRing::pop(std::span<float> out) noexcept {
    const std::size_t cap = buffer_.size();
    std::size_t tail = tail_.load(std::memory_order_relaxed);
    const std::size_t head = head_.load(std::memory_order_acquire);
    const std::size_t avail = (head + cap - tail) % cap;
    const std::size_t n = std::min(avail, out.size());
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = buffer_[tail];
        tail = tail + 1 == cap ? 0 : tail + 1;
    }
    tail_.store(tail, std::memory_order_release);
    return n;
}

AudioClock::AudioClock(std::unique_ptr<AudioProcessor> processor, const ParamHandoff& handoff,
                       double block_seconds, bool record)
    : processor_(std::move(processor)),
      handoff_(handoff),
      block_frames_(std::max<std::size_t>(
          1, static_cast<std::size_t>(std::lround(block_seconds * processor_->sample_rate())))),
      record_(record),
      ring_(record ? block_frames_ * 2 * 64 : 1) {}

AudioClock::~AudioClock() { stop(); }

void AudioClock::start() {
    if (running_.exchange(true)) return;
    callback_thread_ = std::thread([this] { callback_loop(); });
    if (record_) drain_thread_ = std::thread([this] { drain_loop(); });
}

AudioTrack AudioClock::stop() {
    running_.store(false);
    if (callback_thread_.joinable()) callback_thread_.join();
    if (drain_thread_.joinable()) drain_thread_.join();
    if (record_) drain_pending();

    AudioTrack track = AudioTrack::silent(processor_->sample_rate(), 2, recorded_.size() / 2);
    for (std::size_t i = 0; i < track.frames(); ++i) {
        track.channels[0][i] = recorded_[2 * i];
        track.channels[1][i] = recorded_[2 * i + 1];
    }
    recorded_.clear();
    return track;
}

void AudioClock::callback_loop() {
    using clock = std::chrono::steady_clock;
    std::vector<float> block(block_frames_ * 2);
    const auto period = std::chrono::duration<double>(static_cast<double>(block_frames_) /
                                                      processor_->sample_rate());
    const auto start = clock::now();
    std::size_t k = 0;
    while (running_.load()) {
        processor_->process(block, handoff_.read());
        if (record_) ring_.push(block);
        blocks_.fetch_add(1);
        ++k;
        std::this_thread::sleep_until(start + std::chrono::duration_cast<clock::duration>(period * k));
    }
}

void AudioClock::drain_pending() {
    std::vector<float> chunk(block_frames_ * 2 * 8);
    std::size_t n;
    while ((n = ring_.pop(chunk)) > 0) {
        recorded_.insert(recorded_.end(), chunk.begin(), chunk.begin() + static_cast<long>(n));
    }
}

void AudioClock::drain_loop() {
    while (running_.load()) {
        drain_pending();
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
}

}  // namespace mandala
