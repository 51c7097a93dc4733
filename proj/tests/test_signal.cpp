#include "mandala/signal.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace mandala;

namespace {

std::vector<EsenseSample> parse_all(const std::vector<std::uint8_t>& bytes) {
    ThinkGearState st;
    return parse_thinkgear(bytes, st);
}

// Checksum computed directly from the published formula, independent of the parser.
std::uint8_t oracle_checksum(std::initializer_list<int> payload) {
    int sum = 0;
    for (int b : payload) sum += b;
    return static_cast<std::uint8_t>(0xFF - (sum % 256));
}

}  // namespace

TEST_CASE("golden meditation packet") {
    REQUIRE(oracle_checksum({0x05, 0x3C}) == 0xBE);
    const auto samples = parse_all({0xAA, 0xAA, 0x02, 0x05, 0x3C, 0xBE});
    REQUIRE(samples.size() == 1);
    CHECK(samples[0].meditation == 60);
    CHECK((samples[0].present & EsenseSample::kMeditation) != 0);
    CHECK((samples[0].present & EsenseSample::kAttention) == 0);
}

TEST_CASE("bad checksum is dropped and the parser resyncs") {
    ThinkGearState st;
    std::vector<std::uint8_t> bytes{0xAA, 0xAA, 0x02, 0x05, 0x3C, 0x00};
    CHECK(parse_thinkgear(bytes, st).empty());
    CHECK(st.checksum_errors == 1);
    CHECK(st.phase == ThinkGearState::Phase::kSync1);

    const std::vector<std::uint8_t> good{0xAA, 0xAA, 0x02, 0x05, 0x3C, 0xBE};
    const auto after = parse_thinkgear(good, st);
    REQUIRE(after.size() == 1);
    CHECK(after[0].meditation == 60);
}

TEST_CASE("packet split across chunks") {
    ThinkGearState st;
    const std::vector<std::uint8_t> a{0xAA, 0xAA, 0x02, 0x05};
    const std::vector<std::uint8_t> b{0x3C, 0xBE};
    CHECK(parse_thinkgear(a, st).empty());
    const auto out = parse_thinkgear(b, st);
    REQUIRE(out.size() == 1);
    CHECK(out[0].meditation == 60);
}

TEST_CASE("length above 169 is a desync") {
    ThinkGearState st;
    std::vector<std::uint8_t> bytes{0xAA, 0xAA, 0xB0, 0x05, 0x3C};
    const auto good = encode_esense_packet(0, 40, 70);
    bytes.insert(bytes.end(), good.begin(), good.end());
    const auto out = parse_thinkgear(bytes, st);
    CHECK(st.desyncs == 1);
    REQUIRE(out.size() == 1);
    CHECK(out[0].meditation == 70);
    CHECK(out[0].attention == 40);
}

TEST_CASE("full eSense packet with raw wave and ASIC power rows") {
    std::vector<std::uint8_t> payload{0x02, 0x00, 0x80, 0x02, 0x01, 0x02, 0x83, 24};
    for (int i = 0; i < 24; ++i) payload.push_back(static_cast<std::uint8_t>(i));
    payload.insert(payload.end(), {0x04, 0x30, 0x05, 0x50});
    const auto out = parse_all(encode_thinkgear_packet(payload));
    REQUIRE(out.size() == 1);
    CHECK(out[0].poor_signal == 0);
    CHECK(out[0].attention == 0x30);
    CHECK(out[0].meditation == 0x50);
}

TEST_CASE("packet without eSense codes emits nothing but updates poor signal") {
    ThinkGearState st;
    const std::uint8_t only_poor[] = {0x02, 0xC8};
    CHECK(parse_thinkgear(encode_thinkgear_packet(only_poor), st).empty());
    CHECK(st.poor_signal == 200);
    const std::uint8_t raw_only[] = {0x80, 0x02, 0x10, 0x20};
    CHECK(parse_thinkgear(encode_thinkgear_packet(raw_only), st).empty());

    const std::uint8_t med[] = {0x05, 0x10};
    const auto out = parse_thinkgear(encode_thinkgear_packet(med), st);
    REQUIRE(out.size() == 1);
    CHECK(out[0].poor_signal == 200);  // carried from the earlier packet
}

TEST_CASE("out-of-range eSense value is malformed") {
    ThinkGearState st;
    const std::uint8_t payload[] = {0x05, 101};
    CHECK(parse_thinkgear(encode_thinkgear_packet(payload), st).empty());
    CHECK(st.malformed == 1);
    const std::uint8_t truncated[] = {0x83, 0x10, 0x00};
    CHECK(parse_thinkgear(encode_thinkgear_packet(truncated), st).empty());
    CHECK(st.malformed == 2);
}

TEST_CASE("extra sync bytes before the length are tolerated") {
    const auto out = parse_all({0xAA, 0xAA, 0xAA, 0xAA, 0x02, 0x05, 0x3C, 0xBE});
    REQUIRE(out.size() == 1);
}

TEST_CASE("timestamps are strictly increasing") {
    std::vector<std::uint8_t> bytes;
    for (int i = 0; i < 5; ++i) {
        const auto p = encode_esense_packet(0, i, 10 * i);
        bytes.insert(bytes.end(), p.begin(), p.end());
    }
    ThinkGearState st;
    st.origin = 3.0;
    const auto out = parse_thinkgear(bytes, st);
    REQUIRE(out.size() == 5);
    CHECK(out[0].timestamp == 3.0);
    for (std::size_t i = 1; i < out.size(); ++i) CHECK(out[i].timestamp > out[i - 1].timestamp);
}

TEST_CASE("chunk invariance over random partitions") {
    std::mt19937_64 rng(7);
    std::vector<std::uint8_t> stream;
    for (int i = 0; i < 200; ++i) {
        auto p = encode_esense_packet(static_cast<int>(rng() % 201), static_cast<int>(rng() % 101),
                                      static_cast<int>(rng() % 101));
        if (rng() % 5 == 0) p.back() ^= 0x5A;  // corrupt checksum
        stream.insert(stream.end(), p.begin(), p.end());
        for (int g = static_cast<int>(rng() % 4); g > 0; --g) stream.push_back(static_cast<std::uint8_t>(rng()));
    }
    ThinkGearState whole_state;
    const auto whole = parse_thinkgear(stream, whole_state);
    CHECK(whole.size() > 100);

    for (int trial = 0; trial < 50; ++trial) {
        ThinkGearState st;
        std::vector<EsenseSample> pieces;
        std::size_t at = 0;
        while (at < stream.size()) {
            const std::size_t n = std::min<std::size_t>(1 + rng() % 13, stream.size() - at);
            const auto got = parse_thinkgear(std::span(stream).subspan(at, n), st);
            pieces.insert(pieces.end(), got.begin(), got.end());
            at += n;
        }
        REQUIRE(pieces == whole);
        CHECK(st == whole_state);
    }
}

TEST_CASE("fuzzed bytes never produce out-of-range samples") {
    std::mt19937_64 rng(99);
    ThinkGearState st;
    std::vector<std::uint8_t> buf(4096);
    for (int round = 0; round < 64; ++round) {
        for (auto& b : buf) b = (rng() % 4 == 0) ? 0xAA : static_cast<std::uint8_t>(rng());
        for (const auto& s : parse_thinkgear(buf, st)) {
            CHECK(s.meditation >= 0);
            CHECK(s.meditation <= 100);
            CHECK(s.attention <= 100);
            CHECK(s.poor_signal <= 200);
        }
    }
}

// ---------------------------------------------------------------------------

TEST_CASE("simulator profiles") {
    SignalProfile constant{SignalProfile::Kind::kConstant, 70};
    CHECK(simulate(constant, 5.0).meditation == 70);

    SignalProfile sine;
    sine.kind = SignalProfile::Kind::kSinusoid;
    sine.level = 50;
    sine.amplitude = 50;
    sine.period = 60;
    CHECK(simulate(sine, 0.0).meditation == 50);
    CHECK(simulate(sine, 15.0).meditation == 100);
    CHECK(simulate(sine, 45.0).meditation == 0);

    SignalProfile ramp;
    ramp.kind = SignalProfile::Kind::kLinearRamp;
    ramp.level = 0;
    ramp.target = 100;
    ramp.period = 10;
    CHECK(simulate(ramp, 0.0).meditation == 0);
    CHECK(simulate(ramp, 5.0).meditation == 50);
    CHECK(simulate(ramp, 20.0).meditation == 100);

    SignalProfile loud{SignalProfile::Kind::kConstant, 250};
    CHECK(simulate(loud, 1.0).meditation == 100);

    CHECK_THROWS_AS(simulate(constant, -1.0), std::invalid_argument);
}

TEST_CASE("random walk is reproducible and bounded") {
    SignalProfile walk;
    walk.kind = SignalProfile::Kind::kRandomWalk;
    walk.seed = 42;
    walk.level = 50;
    walk.amplitude = 20;
    CHECK(simulate(walk, 17.0) == simulate(walk, 17.0));
    CHECK(simulate(walk, 17.2).meditation == simulate(walk, 17.9).meditation);

    SignalProfile other = walk;
    other.seed = 43;
    int differ = 0;
    for (int k = 0; k < 200; ++k) {
        const auto s = simulate(walk, k);
        CHECK(s.meditation >= 0);
        CHECK(s.meditation <= 100);
        differ += s.meditation != simulate(other, k).meditation;
    }
    CHECK(differ > 0);
}

TEST_CASE("profile names round-trip") {
    for (auto k : {SignalProfile::Kind::kConstant, SignalProfile::Kind::kLinearRamp,
                   SignalProfile::Kind::kSinusoid, SignalProfile::Kind::kRandomWalk}) {
        CHECK(parse_profile_kind(to_string(k)) == k);
    }
    CHECK_THROWS(parse_profile_kind("square"));
}

// ---------------------------------------------------------------------------

TEST_CASE("normalize") {
    CHECK(normalize(0) == 0.0);
    CHECK(normalize(100) == 1.0);
    CHECK(normalize(55) == 0.55);
    CHECK_THROWS_AS(normalize(-1), RangeError);
    CHECK_THROWS_AS(normalize(101), RangeError);
}

TEST_CASE("smoothing") {
    SmoothedSignal s;
    s.m = 0.0;
    s.time_constant = 1.0;
    CHECK(smooth_step(s, 1.0, 1.0).m == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
    CHECK(std::abs(smooth_step(s, 1.0, 1.0).m - 0.6321205588) < 1e-9);

    s.m = 0.5;
    CHECK(smooth_step(s, 0.5, 3.7).m == 0.5);

    s.m = 0.1;
    const auto once = smooth_step(s, 0.9, 0.8);
    const auto twice = smooth_step(smooth_step(s, 0.9, 0.4), 0.9, 0.4);
    CHECK(std::abs(once.m - twice.m) < 1e-12);

    s.time_constant = 0.0;
    CHECK(smooth_step(s, 0.73, 0.01).m == 0.73);
}

TEST_CASE("smoothing stays in range and approaches the target monotonically") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SmoothedSignal s;
    s.time_constant = 0.7;
    for (int i = 0; i < 10000; ++i) {
        const double target = u(rng);
        const auto next = smooth_step(s, target, u(rng), 0.001 + u(rng));
        CHECK(next.m >= 0.0);
        CHECK(next.m <= 1.0);
        CHECK(std::abs(next.m - target) <= std::abs(s.m - target) + 1e-15);
        s = next;
    }
}
