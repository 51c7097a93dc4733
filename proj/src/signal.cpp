#include "mandala/signal.hpp"

#include "mandala/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

namespace mandala {

namespace {

struct DecodedPayload {
    std::optional<int> poor_signal;
    std::optional<int> attention;
    std::optional<int> meditation;
};

// Walks the data rows of a checksum-valid payload. Returns nullopt when a row
// runs past the payload end or an eSense value is out of range.
std::optional<DecodedPayload> decode_rows(std::span<const std::uint8_t> p) {
    DecodedPayload out;
    std::size_t i = 0;
    while (i < p.size()) {
        int excode_level = 0;
        while (i < p.size() && p[i] == kThinkGearExcode) {
            ++excode_level;
            ++i;
        }
        if (i >= p.size()) return std::nullopt;
        const std::uint8_t code = p[i++];

        if (code >= 0x80) {
            if (i >= p.size()) return std::nullopt;
            const std::size_t vlen = p[i++];
            if (p.size() - i < vlen) return std::nullopt;
            i += vlen;  // raw wave, ASIC EEG power etc. are recognized but not decoded
            continue;
        }

        if (i >= p.size()) return std::nullopt;
        const int value = p[i++];
        if (excode_level != 0) continue;

        switch (code) {
            case thinkgear_code::kPoorSignal:
                if (value > 200) return std::nullopt;
                out.poor_signal = value;
                break;
            case thinkgear_code::kAttention:
                if (value > 100) return std::nullopt;
                out.attention = value;
                break;
            case thinkgear_code::kMeditation:
                if (value > 100) return std::nullopt;
                out.meditation = value;
                break;
            default:
                break;
        }
    }
    return out;
}

}  // namespace

std::uint8_t thinkgear_checksum(std::span<const std::uint8_t> payload) {
    unsigned sum = 0;
    for (auto b : payload) sum += b;
    return static_cast<std::uint8_t>(0xFF - (sum & 0xFF));
}

std::vector<EsenseSample> parse_thinkgear(std::span<const std::uint8_t> chunk,
                                          ThinkGearState& st) {
    using Phase = ThinkGearState::Phase;
    std::vector<EsenseSample> samples;

    for (const std::uint8_t byte : chunk) {
        switch (st.phase) {
            case Phase::kSync1:
                if (byte == kThinkGearSync) st.phase = Phase::kSync2;
                break;

            case Phase::kSync2:
                st.phase = byte == kThinkGearSync ? Phase::kLength : Phase::kSync1;
                break;

            case Phase::kLength:
                if (byte == kThinkGearSync) break;  // extra sync byte
                if (byte > kThinkGearMaxPayload) {
                    ++st.desyncs;
                    st.phase = Phase::kSync1;
                    break;
                }
                st.expected_length = byte;
                st.payload.clear();
                st.phase = byte == 0 ? Phase::kChecksum : Phase::kPayload;
                break;

            case Phase::kPayload:
                st.payload.push_back(byte);
                if (st.payload.size() == st.expected_length) st.phase = Phase::kChecksum;
                break;

            case Phase::kChecksum: {
                st.phase = Phase::kSync1;
                if (thinkgear_checksum(st.payload) != byte) {
                    ++st.checksum_errors;
                    break;
                }
                ++st.packets;
                const auto rows = decode_rows(st.payload);
                if (!rows) {
                    ++st.malformed;
                    break;
                }
                if (rows->poor_signal) st.poor_signal = *rows->poor_signal;
                if (rows->attention) st.attention = *rows->attention;
                if (rows->meditation) st.meditation = *rows->meditation;
                if (!rows->attention && !rows->meditation) break;

                EsenseSample s;
                s.timestamp = st.origin + static_cast<double>(st.emitted);
                s.meditation = st.meditation;
                s.attention = st.attention;
                s.poor_signal = st.poor_signal;
                if (rows->poor_signal) s.present |= EsenseSample::kPoorSignal;
                if (rows->attention) s.present |= EsenseSample::kAttention;
                if (rows->meditation) s.present |= EsenseSample::kMeditation;
                ++st.emitted;
                samples.push_back(s);
                break;
            }
        }
    }
    return samples;
}

std::vector<std::uint8_t> encode_thinkgear_packet(std::span<const std::uint8_t> payload) {
    if (payload.size() > kThinkGearMaxPayload) {
        throw std::length_error("ThinkGear payload exceeds 169 bytes");
    }
    std::vector<std::uint8_t> out;
    out.reserve(payload.size() + 4);
    out.push_back(kThinkGearSync);
    out.push_back(kThinkGearSync);
    out.push_back(static_cast<std::uint8_t>(payload.size()));
    for (auto b : payload) out.push_back(b);
    out.push_back(thinkgear_checksum(payload));
    return out;
}

std::vector<std::uint8_t> encode_esense_packet(int poor_signal, int attention, int meditation) {
    const std::uint8_t payload[] = {
        thinkgear_code::kPoorSignal, static_cast<std::uint8_t>(poor_signal),
        thinkgear_code::kAttention,  static_cast<std::uint8_t>(attention),
        thinkgear_code::kMeditation, static_cast<std::uint8_t>(meditation),
    };
    return encode_thinkgear_packet(payload);
}

// ---------------------------------------------------------------------------

SignalProfile::Kind parse_profile_kind(const std::string& name) {
    if (name == "constant") return SignalProfile::Kind::kConstant;
    if (name == "linear-ramp" || name == "ramp") return SignalProfile::Kind::kLinearRamp;
    if (name == "sinusoid" || name == "sine") return SignalProfile::Kind::kSinusoid;
    if (name == "bounded-random-walk" || name == "random-walk") {
        return SignalProfile::Kind::kRandomWalk;
    }
    throw std::invalid_argument("unknown signal profile: " + name);
}

std::string to_string(SignalProfile::Kind kind) {
    switch (kind) {
        case SignalProfile::Kind::kConstant: return "constant";
        case SignalProfile::Kind::kLinearRamp: return "linear-ramp";
        case SignalProfile::Kind::kSinusoid: return "sinusoid";
        case SignalProfile::Kind::kRandomWalk: return "bounded-random-walk";
    }
    return "constant";
}

namespace {

double clamp100(double v) { return std::clamp(v, 0.0, 100.0); }

double random_walk_value(const SignalProfile& p, std::uint64_t steps) {
    double v = clamp100(p.level);
    for (std::uint64_t k = 1; k <= steps; ++k) {
        v = clamp100(v + p.amplitude * signed_unit(hash_combine(p.seed, k)));
    }
    return v;
}

}  // namespace

EsenseSample simulate(const SignalProfile& p, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("simulate: t must be >= 0");

    double value = 0.0;
    switch (p.kind) {
        case SignalProfile::Kind::kConstant:
            value = p.level;
            break;
        case SignalProfile::Kind::kLinearRamp: {
            const double frac = p.period > 0.0 ? std::min(t / p.period, 1.0) : 1.0;
            value = p.level + (p.target - p.level) * frac;
            break;
        }
        case SignalProfile::Kind::kSinusoid:
            value = p.level + p.amplitude * std::sin(2.0 * std::numbers::pi * t / p.period);
            break;
        case SignalProfile::Kind::kRandomWalk:
            value = random_walk_value(p, static_cast<std::uint64_t>(std::floor(t)));
            break;
    }

    EsenseSample s;
    s.timestamp = t;
    s.meditation = static_cast<int>(std::lround(clamp100(value)));
    s.attention = 100 - s.meditation;
    s.poor_signal = 0;
    s.present = EsenseSample::kPoorSignal | EsenseSample::kAttention | EsenseSample::kMeditation;
    return s;
}

// ---------------------------------------------------------------------------

double normalize(int raw) {
    if (raw < 0 || raw > 100) {
        throw RangeError("eSense value " + std::to_string(raw) + " outside 0..100");
    }
    return static_cast<double>(raw) / 100.0;
}

namespace {

double approach(double current, double target, double decay) {
    return std::clamp(target + (current - target) * decay, 0.0, 1.0);
}

}  // namespace

SmoothedSignal smooth_step(const SmoothedSignal& state, double target_m, double target_a,
                           double dt) {
    SmoothedSignal next = state;
    next.last_update = state.last_update + dt;
    if (state.time_constant <= 0.0) {
        next.m = std::clamp(target_m, 0.0, 1.0);
        next.a = std::clamp(target_a, 0.0, 1.0);
        return next;
    }
    const double decay = std::exp(-dt / state.time_constant);
    next.m = approach(state.m, target_m, decay);
    next.a = approach(state.a, target_a, decay);
    return next;
}

SmoothedSignal smooth_step(const SmoothedSignal& state, double target_m, double dt) {
    return smooth_step(state, target_m, state.a, dt);
}

}  // namespace mandala
