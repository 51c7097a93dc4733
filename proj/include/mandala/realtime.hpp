#pragma once

// Live audio path. A control thread publishes m through ParamHandoff; the
// audio callback reads it once per block. process() never blocks or allocates.

#include "mandala/audio.hpp"
#include "mandala/random.hpp"

#include <array>
#include <atomic>
#include <cstddef>
#include <memory>
#include <span>
#include <thread>
#include <vector>

namespace mandala {

class ParamHandoff {
public:
    static_assert(std::atomic<double>::is_always_lock_free);

    void publish(double m) noexcept { value_.store(m, std::memory_order_release); }
    [[nodiscard]] double read() const noexcept { return value_.load(std::memory_order_acquire); }

private:
    std::atomic<double> value_{0.0};
};

/// Stereo interleaved block renderer.
class AudioProcessor {
public:
    virtual ~AudioProcessor() = default;
    virtual void process(std::span<float> interleaved_stereo, double m) noexcept = 0;
    [[nodiscard]] virtual int sample_rate() const = 0;
    [[nodiscard]] virtual std::size_t clip_count() const { return 0; }
};

/// Crossfade between two looping tracks.
class RealtimeCrossfade final : public AudioProcessor {
public:
    RealtimeCrossfade(AudioTrack t1, AudioTrack t2);

    void process(std::span<float> out, double m) noexcept override;
    [[nodiscard]] int sample_rate() const override { return t1_.sample_rate; }

private:
    AudioTrack t1_;
    AudioTrack t2_;
    std::size_t pos1_ = 0;
    std::size_t pos2_ = 0;
};

/// Granular playback with a looping read-head.
class RealtimeGranular final : public AudioProcessor {
public:
    static constexpr std::size_t kMaxGrains = 64;

    RealtimeGranular(AudioTrack track, GranularConfig cfg);

    void process(std::span<float> out, double m) noexcept override;
    [[nodiscard]] int sample_rate() const override { return track_.sample_rate; }
    [[nodiscard]] std::size_t clip_count() const override { return clips_; }
    [[nodiscard]] double read_head() const { return tau_; }

private:
    struct Grain {
        double start = 0.0;  // source frame
        std::size_t age = 0;
        bool active = false;
    };

    void spawn(double m) noexcept;

    AudioTrack track_;
    GranularConfig cfg_;
    std::vector<float> window_;
    std::size_t grain_len_ = 0;
    std::size_t hop_ = 0;
    double max_position_ = 0.0;  // seconds
    std::array<Grain, kMaxGrains> grains_{};
    std::size_t until_next_grain_ = 0;
    double tau_ = 0.0;
    SplitMix64 rng_;
    std::size_t clips_ = 0;
};

/// Fixed-capacity single-producer single-consumer ring.
class SpscRing {
public:
    explicit SpscRing(std::size_t capacity);

    /// Writes as many samples as fit; returns the count written.
    std::size_t push(std::span<const float> data) noexcept;
    std::size_t pop(std::span<float> out) noexcept;
    [[nodiscard]] std::size_t dropped() const noexcept { return dropped_.load(); }

private:
    std::vector<float> buffer_;
    std::atomic<std::size_t> head_{0};
    std::atomic<std::size_t> tail_{0};
    std::atomic<std::size_t> dropped_{0};
};

/// Software audio device: calls the processor once per block at real-time
/// pace and optionally records the output.
class AudioClock {
public:
    AudioClock(std::unique_ptr<AudioProcessor> processor, const ParamHandoff& handoff,
               double block_seconds = 0.01, bool record = false);
    ~AudioClock();

    AudioClock(const AudioClock&) = delete;
    AudioClock& operator=(const AudioClock&) = delete;

    void start();
    /// Stops both threads; returns the recording (empty unless recording).
    AudioTrack stop();

    [[nodiscard]] std::size_t blocks() const { return blocks_.load(); }
    [[nodiscard]] std::size_t clip_count() const { return processor_->clip_count(); }

private:
    void callback_loop();
    void drain_loop();
    void drain_pending();

    std::unique_ptr<AudioProcessor> processor_;
    const ParamHandoff& handoff_;
    std::size_t block_frames_;
    bool record_;
    SpscRing ring_;
    std::vector<float> recorded_;
    std::atomic<bool> running_{false};
    std::atomic<std::size_t> blocks_{0};
    std::thread callback_thread_;
    std::thread drain_thread_;
};

}  // namespace mandala
