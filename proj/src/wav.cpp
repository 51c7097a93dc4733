#include "mandala/audio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

namespace mandala {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    std::uint32_t u32(std::size_t at) const {
        need(at, 4);
        return static_cast<std::uint32_t>(bytes_[at]) | (static_cast<std::uint32_t>(bytes_[at + 1]) << 8) |
               (static_cast<std::uint32_t>(bytes_[at + 2]) << 16) |
               (static_cast<std::uint32_t>(bytes_[at + 3]) << 24);
    }
    std::uint16_t u16(std::size_t at) const {
        need(at, 2);
        return static_cast<std::uint16_t>(bytes_[at] | (bytes_[at + 1] << 8));
    }
    bool tag(std::size_t at, const char* fourcc) const {
        need(at, 4);
        return std::memcmp(bytes_.data() + at, fourcc, 4) == 0;
    }
    void need(std::size_t at, std::size_t n) const {
        if (at > bytes_.size() || bytes_.size() - at < n) throw std::runtime_error("wav: truncated file");
    }

private:
    const std::vector<std::uint8_t>& bytes_;
};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>((v >> s) & 0xFF));
}

void put_tag(std::vector<std::uint8_t>& out, const char* fourcc) {
    out.insert(out.end(), fourcc, fourcc + 4);
}

}  // namespace

AudioTrack decode_wav(const std::vector<std::uint8_t>& bytes) {
    Reader r(bytes);
    if (!r.tag(0, "RIFF") || !r.tag(8, "WAVE")) throw std::runtime_error("wav: not a RIFF/WAVE file");

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t sample_rate = 0;
    bool have_fmt = false;
    std::size_t data_at = 0, data_size = 0;
    bool have_data = false;

    std::size_t at = 12;
    while (at + 8 <= bytes.size()) {
        const std::uint32_t size = r.u32(at + 4);
        const std::size_t body = at + 8;
        if (r.tag(at, "fmt ")) {
            r.need(body, 16);
            format = r.u16(body);
            channels = r.u16(body + 2);
            sample_rate = r.u32(body + 4);
            bits = r.u16(body + 14);
            if (format == kFormatExtensible) {
                r.need(body, 26);
                format = r.u16(body + 24);
            }
            have_fmt = true;
        } else if (r.tag(at, "data")) {
            data_at = body;
            data_size = std::min<std::size_t>(size, bytes.size() - body);
            have_data = true;
            break;
        }
        at = body + size + (size & 1);
    }
    if (!have_fmt || !have_data) throw std::runtime_error("wav: missing fmt or data chunk");
    if (channels < 1 || channels > 2) throw std::runtime_error("wav: only mono or stereo supported");

    const bool pcm16 = format == kFormatPcm && bits == 16;
    const bool f32 = format == kFormatFloat && bits == 32;
    if (!pcm16 && !f32) {
        throw std::runtime_error("wav: unsupported encoding (format " + std::to_string(format) +
                                 ", " + std::to_string(bits) + " bits)");
    }

    const std::size_t bytes_per_sample = bits / 8;
    const std::size_t frames = data_size / (bytes_per_sample * channels);
    AudioTrack track = AudioTrack::silent(static_cast<int>(sample_rate), channels, frames);
    std::size_t p = data_at;
    for (std::size_t i = 0; i < frames; ++i) {
        for (std::size_t c = 0; c < channels; ++c) {
            if (pcm16) {
                const auto v = static_cast<std::int16_t>(r.u16(p));
                track.channels[c][i] = static_cast<float>(v) / 32768.0f;
            } else {
                track.channels[c][i] = std::bit_cast<float>(r.u32(p));
            }
            p += bytes_per_sample;
        }
    }
    return track;
}

std::vector<std::uint8_t> encode_wav(const AudioTrack& track, WavFormat fmt) {
    track.validate();
    const std::uint16_t channels = static_cast<std::uint16_t>(track.channel_count());
    const std::uint16_t bits = fmt == WavFormat::kPcm16 ? 16 : 32;
    const std::uint32_t block_align = channels * bits / 8;
    const std::uint64_t data_size = static_cast<std::uint64_t>(track.frames()) * block_align;
    if (data_size > 0xFFFFFFFFull - 36) throw std::runtime_error("wav: track too long");

    std::vector<std::uint8_t> out;
    out.reserve(44 + data_size);
    put_tag(out, "RIFF");
    put_u32(out, static_cast<std::uint32_t>(36 + data_size));
    put_tag(out, "WAVE");
    put_tag(out, "fmt ");
    put_u32(out, 16);
    put_u16(out, fmt == WavFormat::kPcm16 ? kFormatPcm : kFormatFloat);
    put_u16(out, channels);
    put_u32(out, static_cast<std::uint32_t>(track.sample_rate));
    put_u32(out, static_cast<std::uint32_t>(track.sample_rate) * block_align);
    put_u16(out, static_cast<std::uint16_t>(block_align));
    put_u16(out, bits);
    put_tag(out, "data");
    put_u32(out, static_cast<std::uint32_t>(data_size));

    for (std::size_t i = 0; i < track.frames(); ++i) {
        for (std::size_t c = 0; c < channels; ++c) {
            const float v = track.channels[c][i];
            if (fmt == WavFormat::kPcm16) {
                const double scaled = std::clamp(std::round(static_cast<double>(v) * 32768.0), -32768.0, 32767.0);
                put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
            } else {
                put_u32(out, std::bit_cast<std::uint32_t>(v));
            }
        }
    }
    return out;
}

AudioTrack read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open WAV file: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_wav(bytes);
}

void write_wav(const std::filesystem::path& path, const AudioTrack& track, WavFormat fmt) {
    const auto bytes = encode_wav(track, fmt);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write WAV file: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace mandala
