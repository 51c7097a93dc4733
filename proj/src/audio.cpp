#include "mandala/audio.hpp"

#include "mandala/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mandala {

AudioTrack AudioTrack::silent(int sample_rate, std::size_t channels, std::size_t frames) {
    AudioTrack t;
    t.sample_rate = sample_rate;
    t.channels.assign(channels, std::vector<float>(frames, 0.0f));
    return t;
}

void AudioTrack::validate() const {
    if (sample_rate <= 0) throw std::invalid_argument("audio: sample rate must be positive");
    if (channels.empty() || channels.size() > 2) {
        throw std::invalid_argument("audio: expected 1 or 2 channels");
    }
    for (const auto& ch : channels) {
        if (ch.size() != channels[0].size()) {
            throw std::invalid_argument("audio: channels differ in length");
        }
        for (float v : ch) {
            if (!std::isfinite(v)) throw std::invalid_argument("audio: non-finite sample");
        }
    }
}

CrossfadeGains crossfade_gains(double m) {
    CrossfadeGains g;
    g.clamped = !(m >= 0.0 && m <= 1.0);
    const double c = std::isnan(m) ? 0.0 : std::clamp(m, 0.0, 1.0);
    g.g1 = c;
    g.g2 = 1.0 - c;
    return g;
}

AudioTrack mix(const AudioTrack& t1, const AudioTrack& t2, const MTrace& m_trace) {
    t1.validate();
    t2.validate();
    if (t1.sample_rate != t2.sample_rate) {
        throw std::invalid_argument("mix: sample rates differ (" + std::to_string(t1.sample_rate) +
                                    " vs " + std::to_string(t2.sample_rate) + ")");
    }
    if (t1.channel_count() != t2.channel_count()) {
        throw std::invalid_argument("mix: channel counts differ");
    }
    if (m_trace.empty()) throw std::invalid_argument("mix: empty m trace");

    const std::size_t frames = std::min(t1.frames(), t2.frames());
    AudioTrack out = AudioTrack::silent(t1.sample_rate, t1.channel_count(), frames);
    const double rate = t1.sample_rate;
    for (std::size_t i = 0; i < frames; ++i) {
        const double m = std::clamp(m_trace.at(static_cast<double>(i) / rate), 0.0, 1.0);
        for (std::size_t c = 0; c < out.channel_count(); ++c) {
            out.channels[c][i] = static_cast<float>(
                crossfade_sample(m, t1.channels[c][i], t2.channels[c][i]));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

void GranularConfig::validate() const {
    if (!(base_rate > 0.0)) throw std::invalid_argument("granular: base_rate must be > 0");
    if (!(alpha >= 0.0)) throw std::invalid_argument("granular: alpha must be >= 0");
    if (!(grain_duration > 0.0)) throw std::invalid_argument("granular: grain_duration must be > 0");
    if (!(grain_overlap >= 0.0 && grain_overlap < 1.0)) {
        throw std::invalid_argument("granular: grain_overlap must be in [0,1)");
    }
}

std::size_t GranularConfig::grain_frames(int sample_rate) const {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(grain_duration * sample_rate)));
}

std::size_t GranularConfig::hop_frames(int sample_rate) const {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(hop_seconds() * sample_rate)));
}

GranularParams granular_params(double m, const GranularConfig& cfg, double n) {
    return {m * cfg.base_rate, cfg.alpha * (1.0 - m) * n};
}

double hann(std::size_t j, std::size_t n) {
    return 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(j) /
                                 static_cast<double>(n)));
}

namespace {

// Linear interpolation at fractional frame position; zero outside the track.
float read_frac(const std::vector<float>& ch, double pos) {
    const double base = std::floor(pos);
    const auto i = static_cast<long long>(base);
    const double frac = pos - base;
    const auto n = static_cast<long long>(ch.size());
    const float a = (i >= 0 && i < n) ? ch[static_cast<std::size_t>(i)] : 0.0f;
    const float b = (i + 1 >= 0 && i + 1 < n) ? ch[static_cast<std::size_t>(i + 1)] : 0.0f;
    return static_cast<float>(a + frac * (b - a));
}

}  // namespace

GranularResult granular_render(const AudioTrack& track, const MTrace& m_trace,
                               const GranularConfig& cfg, double output_seconds) {
    if (track.empty()) throw std::invalid_argument("granular: empty track");
    track.validate();
    cfg.validate();
    if (m_trace.empty()) throw std::invalid_argument("granular: empty m trace");

    const int sr = track.sample_rate;
    const double rate = sr;
    const std::size_t out_frames =
        output_seconds < 0.0 ? track.frames()
                             : static_cast<std::size_t>(std::llround(output_seconds * rate));
    const std::size_t grain_len = cfg.grain_frames(sr);
    const std::size_t hop = cfg.hop_frames(sr);
    const double grain_seconds = static_cast<double>(grain_len) / rate;
    const double max_position = std::max(0.0, track.duration() - grain_seconds);

    std::vector<std::vector<double>> acc(track.channel_count(), std::vector<double>(out_frames, 0.0));
    std::vector<double> window(grain_len);
    for (std::size_t j = 0; j < grain_len; ++j) window[j] = hann(j, grain_len);

    GranularResult result;
    SplitMix64 rng(cfg.seed);
    double tau = 0.0;  // read-head, seconds

    for (std::size_t i = 0; i < out_frames; ++i) {
        const double m = std::clamp(m_trace.at(static_cast<double>(i) / rate), 0.0, 1.0);

        if (i % hop == 0) {
            const double n = rng.uniform_signed();
            const auto params = granular_params(m, cfg, n);
            GrainEvent g;
            g.onset = i;
            g.m = m;
            g.read_head = tau;
            g.delta_tau = params.delta_tau;
            g.source_position = std::clamp(tau + params.delta_tau, 0.0, max_position);
            g.duration = grain_seconds;
            result.grains.push_back(g);

            const double start = g.source_position * rate;
            const std::size_t len = std::min(grain_len, out_frames - i);
            for (std::size_t c = 0; c < acc.size(); ++c) {
                const auto& src = track.channels[c];
                auto& dst = acc[c];
                for (std::size_t j = 0; j < len; ++j) {
                    dst[i + j] += window[j] * read_frac(src, start + static_cast<double>(j));
                }
            }
        }

        tau += m * cfg.base_rate / rate;
    }

    result.final_read_head = tau;
    result.audio = AudioTrack::silent(sr, track.channel_count(), out_frames);
    for (std::size_t c = 0; c < acc.size(); ++c) {
        for (std::size_t i = 0; i < out_frames; ++i) {
            double v = acc[c][i];
            if (v > 1.0 || v < -1.0) {
                ++result.clip_count;
                v = std::clamp(v, -1.0, 1.0);
            }
            result.audio.channels[c][i] = static_cast<float>(v);
        }
    }
    return result;
}

}  // namespace mandala
