#pragma once

// Deterministic batch rendering: an m trace in, particle frames and audio out.

#include "mandala/audio.hpp"
#include "mandala/mandala.hpp"
#include "mandala/trace.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace mandala {

/// Frame times start + k / frame_rate across the trace span (one frame for
/// a single-point trace); m linearly interpolated from the trace.
std::vector<ParticleFrame> render_frames(const MandalaConfig& cfg, const MTrace& trace,
                                         double frame_rate);

/// Frame time for index k; shared with the live engine so both paths agree.
inline double frame_time(double start, std::size_t k, double frame_rate) {
    return start + static_cast<double>(k) / frame_rate;
}

struct FrameRow {
    double t = 0.0;
    double m = 0.0;
    std::size_t q = 0;
    double x = 0.0;
    double y = 0.0;
    bool operator==(const FrameRow&) const = default;
};

/// Streams frames as `t,m,q,x,y` rows (shortest round-trip decimals).
class FrameCsvWriter {
public:
    explicit FrameCsvWriter(std::ostream& out);
    void write(const ParticleFrame& frame);

private:
    std::ostream& out_;
};

void write_frames_csv(std::ostream& out, const std::vector<ParticleFrame>& frames);
void write_frames_csv(const std::filesystem::path& path, const std::vector<ParticleFrame>& frames);
std::vector<FrameRow> read_frames_csv(std::istream& in);
std::vector<FrameRow> read_frames_csv(const std::filesystem::path& path);

enum class AudioRenderMode { kCrossfade, kGranular };

struct AudioRenderResult {
    AudioTrack audio;
    std::size_t clip_count = 0;
    std::optional<GranularResult> granular;  // grain log for granular renders
};

/// Crossfade uses tracks[0] and tracks[1]; granular uses tracks[0] and
/// renders for the trace span (or the track length for a single point).
AudioRenderResult render_audio(AudioRenderMode mode, const std::vector<AudioTrack>& tracks,
                               const MTrace& trace, const GranularConfig& cfg);

}  // namespace mandala
