#pragma once

// Meditation-driven audio mappings: an M-weighted crossfade between two
// tracks, and constant-pitch granular playback whose read-head advances at
// m * R0 while each grain's source position is jittered by alpha (1 - m) n.

#include "mandala/trace.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace mandala {

struct AudioTrack {
    int sample_rate = 48000;
    std::vector<std::vector<float>> channels;  // 1 or 2, equal length

    [[nodiscard]] std::size_t channel_count() const { return channels.size(); }
    [[nodiscard]] std::size_t frames() const { return channels.empty() ? 0 : channels[0].size(); }
    [[nodiscard]] double duration() const {
        return static_cast<double>(frames()) / static_cast<double>(sample_rate);
    }
    [[nodiscard]] bool empty() const { return frames() == 0; }

    static AudioTrack silent(int sample_rate, std::size_t channels, std::size_t frames);

    /// Throws std::invalid_argument on ragged channels, bad rate or non-finite samples.
    void validate() const;

    bool operator==(const AudioTrack&) const = default;
};

struct CrossfadeGains {
    double g1 = 0.0;
    double g2 = 0.0;
    bool clamped = false;  // input m was outside [0,1]
};

CrossfadeGains crossfade_gains(double m);

/// out[i] = m(i) t1[i] + (1 - m(i)) t2[i], m sampled at i / sample_rate.
/// Exactly t1 where m == 1 and exactly t2 where m == 0.
AudioTrack mix(const AudioTrack& t1, const AudioTrack& t2, const MTrace& m_trace);

/// Single-sample crossfade with exact endpoints.
inline double crossfade_sample(double m, double a, double b) {
    if (m >= 1.0) return a;
    if (m <= 0.0) return b;
    return m * a + (1.0 - m) * b;
}

struct GranularConfig {
    double base_rate = 1.0;        // R0
    double alpha = 0.5;            // seconds of jitter at m = 0
    double grain_duration = 0.05;  // seconds
    double grain_overlap = 0.5;    // fraction in [0, 1)
    std::uint64_t seed = 0;

    void validate() const;
    [[nodiscard]] double hop_seconds() const { return grain_duration * (1.0 - grain_overlap); }
    [[nodiscard]] std::size_t grain_frames(int sample_rate) const;
    [[nodiscard]] std::size_t hop_frames(int sample_rate) const;
};

struct GranularParams {
    double rate = 0.0;
    double delta_tau = 0.0;
};

/// rate = m R0, delta_tau = alpha (1 - m) n.
GranularParams granular_params(double m, const GranularConfig& cfg, double n);

struct GrainEvent {
    std::size_t onset = 0;         // output frame index
    double m = 0.0;                // m at onset
    double read_head = 0.0;        // tau at onset, seconds, unclamped
    double delta_tau = 0.0;        // jitter applied to the read-head
    double source_position = 0.0;  // clamp(tau + delta_tau, 0, length - duration)
    double duration = 0.0;
};

struct GranularResult {
    AudioTrack audio;
    std::vector<GrainEvent> grains;
    double final_read_head = 0.0;  // seconds into the source
    std::size_t clip_count = 0;
};

/// Renders `output_seconds` of granular playback (default: the track
/// duration). Grains fire on a fixed hop clock, play at source pitch, are
/// periodic-Hann windowed and overlap-added; output is hard-clamped to [-1, 1].
GranularResult granular_render(const AudioTrack& track, const MTrace& m_trace,
                               const GranularConfig& cfg, double output_seconds = -1.0);

/// Periodic Hann window value for index j of n.
double hann(std::size_t j, std::size_t n);

// ---------------------------------------------------------------------------
// WAV

enum class WavFormat { kPcm16, kFloat32 };

AudioTrack read_wav(const std::filesystem::path& path);
AudioTrack decode_wav(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_wav(const AudioTrack& track, WavFormat format);
void write_wav(const std::filesystem::path& path, const AudioTrack& track, WavFormat format);

}  // namespace mandala
