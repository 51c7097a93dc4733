#include "mandala/session.hpp"

#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <fstream>
#include <mutex>
#include <sstream>

using namespace mandala;
using nlohmann::json;

namespace {

SessionConfig manual_session(double m) {
    SessionConfig c;
    c.source.kind = SourceConfig::Kind::kManual;
    c.source.manual_m = m;
    c.time_constant = 0.0;
    c.mandala = MandalaConfig::uniform(6, 1.0, 0.25, 0.4, 2.0, 1.1, 0.35, 3);
    return c;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path write_capture(const std::filesystem::path& dir, int seconds) {
    std::vector<std::uint8_t> bytes;
    for (int i = 0; i < seconds; ++i) {
        const auto p = encode_esense_packet(i == 3 ? 150 : 0, 40, (i * 29 + 5) % 101);
        bytes.insert(bytes.end(), p.begin(), p.end());
    }
    const auto path = dir / "capture.bin";
    std::ofstream(path, std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()),
                                                 static_cast<std::streamsize>(bytes.size()));
    return path;
}

}  // namespace

TEST_CASE("frame and status JSON shapes") {
    ParticleFrame f{1.5, 0.25, {{0.5, -0.5}, {1.0, 0.0}}};
    const auto j = json::parse(frame_json(f));
    CHECK(j["type"] == "frame");
    CHECK(j["t"] == 1.5);
    CHECK(j["m"] == 0.25);
    CHECK(j["positions"].size() == 2);
    CHECK(j["positions"][0][1] == -0.5);

    const auto s = json::parse(status_json({"replay", 200, Direction::kReverse, 0.4, true, 12}));
    CHECK(s["type"] == "status");
    CHECK(s["source"] == "replay");
    CHECK(s["poorSignal"] == 200);
    CHECK(s["mode"] == "reverse");
    CHECK(s["degraded"] == true);
    CHECK(s["frames"] == 12);
}

TEST_CASE("live session streams frames and takes UI commands") {
    auto c = manual_session(0.5);
    c.websocket_port = test::free_port();

    Session session(c);
    session.start();
    test::WsClient client(session.websocket_port());
    REQUIRE(client.handshake());

    const auto status = client.next_text_containing("\"status\"");
    REQUIRE(status.has_value());
    CHECK(json::parse(*status)["source"] == "manual");

    const auto frame = client.next_text_containing("\"frame\"");
    REQUIRE(frame.has_value());
    CHECK(json::parse(*frame)["positions"].size() == 6);

    client.send_text(R"({"type":"setM","value":0.9})");
    client.send_text(R"({"type":"setMode","value":"reverse"})");
    CHECK(test::wait_until([&] { return std::abs(session.status().m - 0.1) < 1e-12; }, 3.0));
    CHECK(session.status().mode == Direction::kReverse);

    session.stop();
    CHECK_FALSE(session.running());
    CHECK(session.stats().frames > 0);
}

TEST_CASE("OSC fan-out and inbound control") {
    std::mutex mu;
    std::vector<osc::Message> got;
    osc::Server receiver(0, [&](const osc::Message& m, const osc::Endpoint&) {
        std::lock_guard l(mu);
        got.push_back(m);
    });
    receiver.start();

    auto c = manual_session(0.3);
    c.osc_out = {{"127.0.0.1", receiver.port()}};
    c.osc_in_port = test::free_port(SOCK_DGRAM);
    Session session(c);
    session.start();

    auto saw = [&](const std::string& addr, auto pred) {
        std::lock_guard l(mu);
        for (const auto& m : got) {
            if (m.address == addr && pred(m)) return true;
        }
        return false;
    };
    CHECK(test::wait_until([&] { return saw(address::kMode, [](const osc::Message&) { return true; }); }, 3.0));
    CHECK(test::wait_until(
        [&] {
            return saw(address::kMeditation,
                       [](const osc::Message& m) { return std::get<float>(m.args[0]) == 0.3f; });
        },
        3.0));

    osc::Sender control({"127.0.0.1", session.osc_in_port()});
    control.send(osc::Message(address::kSetM, {0.8f}));
    CHECK(test::wait_until([&] { return std::abs(session.status().m - 0.8) < 1e-6; }, 3.0));
    control.send(osc::Message(address::kSetMode, {std::string("reverse")}));
    CHECK(test::wait_until([&] { return session.status().mode == Direction::kReverse; }, 3.0));
    session.stop();
    CHECK(session.stats().osc_sent > 0);
}

TEST_CASE("startup errors are reported before running") {
    auto c = manual_session(0.5);
    c.audio.mode = AudioConfig::Mode::kCrossfade;
    c.audio.track1 = "/nonexistent/a.wav";
    c.audio.track2 = "/nonexistent/b.wav";
    CHECK_THROWS(Session(c));

    SessionConfig replay;
    replay.source.kind = SourceConfig::Kind::kReplay;
    replay.source.path = "/nonexistent/capture.bin";
    CHECK_THROWS(Session(replay));

    SessionConfig device;
    device.source.kind = SourceConfig::Kind::kDevice;
    device.source.path = "/dev/nonexistent-headset";
    CHECK_THROWS(Session(device));
}

TEST_CASE("live session records audio and trace") {
    const auto dir = test::temp_dir("session_rec");
    write_wav(dir / "t1.wav", test::sine_track(1.0, 220.0), WavFormat::kFloat32);
    write_wav(dir / "t2.wav", test::noise_track(1.0, 4), WavFormat::kFloat32);
    auto c = manual_session(1.0);
    c.audio.mode = AudioConfig::Mode::kCrossfade;
    c.audio.track1 = (dir / "t1.wav").string();
    c.audio.track2 = (dir / "t2.wav").string();
    c.audio.record_path = (dir / "out.wav").string();
    c.trace_out = (dir / "trace.csv").string();
    {
        Session session(c);
        session.start();
        std::this_thread::sleep_for(std::chrono::milliseconds(500));
        session.stop();
        CHECK(session.stats().audio_blocks > 10);
    }
    const auto rec = read_wav(dir / "out.wav");
    CHECK(rec.frames() > 4800);
    // m == 1 throughout: the output is T1 looping.
    const auto t1 = read_wav(dir / "t1.wav");
    for (std::size_t i = 0; i < std::min<std::size_t>(rec.frames(), 48000); ++i) {
        REQUIRE(rec.channels[0][i] == t1.channels[0][i]);
    }
    const auto trace = read_trace_csv(dir / "trace.csv");
    CHECK(trace.points().size() > 10);
    std::filesystem::remove_all(dir);
}

TEST_CASE("lockstep replay sessions are reproducible") {
    const auto dir = test::temp_dir("session_lockstep");
    const auto capture = write_capture(dir, 8);
    write_wav(dir / "src.wav", test::noise_track(2.0, 9), WavFormat::kFloat32);
    auto run = [&](const std::string& tag) {
        SessionConfig c;
        c.source.kind = SourceConfig::Kind::kReplay;
        c.source.path = capture.string();
        c.apply_seed(17);
        c.audio.mode = AudioConfig::Mode::kGranular;
        c.audio.track1 = (dir / "src.wav").string();
        c.audio.record_path = (dir / (tag + ".wav")).string();
        c.frames_out = (dir / (tag + ".csv")).string();
        Session s(c);
        s.run_lockstep(6.0);
        CHECK(s.stats().frames == 361);
    };
    run("a");
    run("b");
    const auto a = slurp(dir / "a.csv");
    CHECK(!a.empty());
    CHECK(a == slurp(dir / "b.csv"));
    CHECK(slurp(dir / "a.wav") == slurp(dir / "b.wav"));
    CHECK(read_wav(dir / "a.wav").frames() == 6 * 48000 + 800);
    std::filesystem::remove_all(dir);
}
