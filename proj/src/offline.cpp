#include "mandala/offline.hpp"

#include "mandala/csv.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace mandala {

std::vector<ParticleFrame> render_frames(const MandalaConfig& cfg, const MTrace& trace,
                                         double frame_rate) {
    if (trace.empty()) throw std::invalid_argument("render_frames: empty trace");
    if (!(frame_rate > 0.0)) throw std::invalid_argument("render_frames: frame_rate must be > 0");
    const Mandala mandala(cfg);

    const double start = trace.start();
    const double span = trace.end() - start;
    // Tolerate rounding so a frame landing exactly on the last point is kept.
    const auto count = static_cast<std::size_t>(std::floor(span * frame_rate + 1e-9)) + 1;

    std::vector<ParticleFrame> frames(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double t = frame_time(start, k, frame_rate);
        frames[k] = mandala.frame(t, trace.at(t));
    }
    return frames;
}

FrameCsvWriter::FrameCsvWriter(std::ostream& out) : out_(out) { out_ << "t,m,q,x,y\n"; }

void FrameCsvWriter::write(const ParticleFrame& frame) {
    const std::string t = format_double(frame.t);
    const std::string m = format_double(frame.m);
    for (std::size_t q = 0; q < frame.positions.size(); ++q) {
        out_ << t << ',' << m << ',' << q << ',' << format_double(frame.positions[q].x) << ','
             << format_double(frame.positions[q].y) << '\n';
    }
}

void write_frames_csv(std::ostream& out, const std::vector<ParticleFrame>& frames) {
    FrameCsvWriter writer(out);
    for (const auto& f : frames) writer.write(f);
}

void write_frames_csv(const std::filesystem::path& path, const std::vector<ParticleFrame>& frames) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write frames file: " + path.string());
    write_frames_csv(out, frames);
}

std::vector<FrameRow> read_frames_csv(std::istream& in) {
    const auto table = read_csv(in);
    const std::size_t ct = table.column("t"), cm = table.column("m"), cq = table.column("q"),
                      cx = table.column("x"), cy = table.column("y");
    std::vector<FrameRow> rows;
    rows.reserve(table.rows.size());
    for (const auto& r : table.rows) {
        const long long q = parse_int(r[cq]);
        if (q < 0) throw std::runtime_error("frames csv: negative particle index");
        rows.push_back({parse_double(r[ct]), parse_double(r[cm]), static_cast<std::size_t>(q),
                        parse_double(r[cx]), parse_double(r[cy])});
    }
    return rows;
}

std::vector<FrameRow> read_frames_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open frames file: " + path.string());
    return read_frames_csv(in);
}

AudioRenderResult render_audio(AudioRenderMode mode, const std::vector<AudioTrack>& tracks,
                               const MTrace& trace, const GranularConfig& cfg) {
    if (trace.empty()) throw std::invalid_argument("render_audio: empty trace");
    AudioRenderResult result;
    if (mode == AudioRenderMode::kCrossfade) {
        if (tracks.size() < 2) throw std::invalid_argument("render_audio: crossfade needs two tracks");
        result.audio = mix(tracks[0], tracks[1], trace);
        return result;
    }
    if (tracks.empty()) throw std::invalid_argument("render_audio: granular needs a track");
    const double span = trace.end() - trace.start();
    auto g = granular_render(tracks[0], trace, cfg, span > 0.0 ? trace.end() : -1.0);
    result.audio = g.audio;
    result.clip_count = g.clip_count;
    result.granular = std::move(g);
    return result;
}

}  // namespace mandala
