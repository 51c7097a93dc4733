#include "mandala/config.hpp"

#include "mandala/csv.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mandala {

Direction parse_direction(const std::string& text) {
    if (text == "forward") return Direction::kForward;
    if (text == "reverse") return Direction::kReverse;
    throw std::invalid_argument("mapping must be 'forward' or 'reverse', got '" + text + "'");
}

std::string to_string(Direction d) { return d == Direction::kForward ? "forward" : "reverse"; }

SourceConfig::Kind parse_source_kind(const std::string& text) {
    if (text == "device") return SourceConfig::Kind::kDevice;
    if (text == "replay") return SourceConfig::Kind::kReplay;
    if (text == "simulated") return SourceConfig::Kind::kSimulated;
    if (text == "manual") return SourceConfig::Kind::kManual;
    throw std::invalid_argument("unknown source '" + text + "' (device|replay|simulated|manual)");
}

std::string to_string(SourceConfig::Kind kind) {
    switch (kind) {
        case SourceConfig::Kind::kDevice: return "device";
        case SourceConfig::Kind::kReplay: return "replay";
        case SourceConfig::Kind::kSimulated: return "simulated";
        case SourceConfig::Kind::kManual: return "manual";
    }
    return "simulated";
}

AudioConfig::Mode parse_audio_mode(const std::string& text) {
    if (text == "off") return AudioConfig::Mode::kOff;
    if (text == "crossfade") return AudioConfig::Mode::kCrossfade;
    if (text == "granular") return AudioConfig::Mode::kGranular;
    throw std::invalid_argument("audio mode must be off|crossfade|granular, got '" + text + "'");
}

void SessionConfig::apply_seed(std::uint64_t s) {
    seed = s;
    mandala.seed = s;
    audio.granular.seed = s;
    source.profile.seed = s;
}

void SessionConfig::validate() const {
    if (!(frame_rate >= 1.0 && frame_rate <= 240.0)) {
        throw std::invalid_argument("frame_rate must be within [1, 240] Hz");
    }
    mandala.validate();
    if (audio.mode != AudioConfig::Mode::kOff) {
        audio.granular.validate();
        if (audio.track1.empty()) throw std::invalid_argument("audio: track path missing");
        if (audio.mode == AudioConfig::Mode::kCrossfade && audio.track2.empty()) {
            throw std::invalid_argument("audio: crossfade needs two tracks");
        }
    }
    if ((source.kind == SourceConfig::Kind::kDevice || source.kind == SourceConfig::Kind::kReplay) &&
        source.path.empty()) {
        throw std::invalid_argument("source '" + to_string(source.kind) + "' needs a path");
    }
    if (!(source.manual_m >= 0.0 && source.manual_m <= 1.0)) {
        throw std::invalid_argument("manual_m must be within [0, 1]");
    }
    if (!(time_constant >= 0.0)) throw std::invalid_argument("time_constant must be >= 0");
    if (!(osc_rate > 0.0)) throw std::invalid_argument("osc_rate must be > 0");
    if (source.kind == SourceConfig::Kind::kSimulated && source.profile.kind == SignalProfile::Kind::kSinusoid &&
        !(source.profile.period > 0.0)) {
        throw std::invalid_argument("sinusoid period must be > 0");
    }
}

// ---------------------------------------------------------------------------

namespace {

std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s, int line) {
    if (s.size() < 2 || s.front() != '"' || s.back() != '"') {
        throw std::runtime_error("config line " + std::to_string(line) + ": expected a quoted string");
    }
    return s.substr(1, s.size() - 2);
}

ConfigFile::Value parse_value(const std::string& text, int line) {
    if (text.empty()) throw std::runtime_error("config line " + std::to_string(line) + ": missing value");
    if (text.front() == '"') return unquote(text, line);
    if (text == "true") return true;
    if (text == "false") return false;
    if (text.front() == '[') {
        if (text.back() != ']') {
            throw std::runtime_error("config line " + std::to_string(line) + ": unterminated array");
        }
        std::vector<std::string> items;
        std::stringstream body(text.substr(1, text.size() - 2));
        std::string item;
        while (std::getline(body, item, ',')) {
            item = trim(item);
            if (!item.empty()) items.push_back(unquote(item, line));
        }
        return items;
    }
    try {
        return parse_double(text);
    } catch (const std::exception&) {
        throw std::runtime_error("config line " + std::to_string(line) + ": cannot parse value '" + text + "'");
    }
}

[[noreturn]] void type_error(const std::string& key, const char* expected) {
    throw std::runtime_error("config key '" + key + "' must be " + expected);
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& in) {
    ConfigFile file;
    std::string section;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw std::runtime_error("config line " + std::to_string(line_no) + ": bad section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string full = section.empty() ? key : section + "." + key;
        file.values_[full] = parse_value(trim(line.substr(eq + 1)), line_no);
    }
    return file;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    return parse(in);
}

const ConfigFile::Value* ConfigFile::find(const std::string& key) const {
    const auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
}

std::string ConfigFile::get_string(const std::string& key, const std::string& fallback) const {
    const auto* v = find(key);
    if (v == nullptr) return fallback;
    if (const auto* s = std::get_if<std::string>(v)) return *s;
    type_error(key, "a string");
}

double ConfigFile::get_number(const std::string& key, double fallback) const {
    const auto* v = find(key);
    if (v == nullptr) return fallback;
    if (const auto* d = std::get_if<double>(v)) return *d;
    type_error(key, "a number");
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) const {
    const auto* v = find(key);
    if (v == nullptr) return fallback;
    if (const auto* b = std::get_if<bool>(v)) return *b;
    type_error(key, "true or false");
}

std::vector<std::string> ConfigFile::get_strings(const std::string& key) const {
    const auto* v = find(key);
    if (v == nullptr) return {};
    if (const auto* s = std::get_if<std::string>(v)) return {*s};
    if (const auto* a = std::get_if<std::vector<std::string>>(v)) return *a;
    type_error(key, "a string or array of strings");
}

namespace {

const std::set<std::string> kKnownKeys = {
    "session.source", "session.mapping", "session.frame_rate", "session.seed",
    "session.time_constant", "session.osc_rate", "session.starvation_timeout",
    "session.emit_particles", "session.trace_out", "session.frames_out",
    "network.osc_out", "network.osc_in_port", "network.websocket_port",
    "network.websocket_host", "network.ui_dir",
    "source.path", "source.baud", "source.profile", "source.level", "source.target",
    "source.amplitude", "source.period", "source.seed", "source.manual_m",
    "mandala.particles", "mandala.outer_radius", "mandala.R", "mandala.inner_radius", "mandala.r",
    "mandala.omega", "mandala.Omega", "mandala.noise_amplitude", "mandala.noise_frequency",
    "mandala.seed",
    "audio.mode", "audio.track1", "audio.track2", "audio.track", "audio.base_rate", "audio.alpha",
    "audio.grain_duration", "audio.grain_overlap", "audio.seed", "audio.block_seconds",
    "audio.record",
};

std::uint64_t as_seed(double v) {
    if (!(v >= 0.0) || v != std::floor(v)) throw std::invalid_argument("seed must be a non-negative integer");
    return static_cast<std::uint64_t>(v);
}

std::uint16_t as_port(double v, const char* key) {
    if (!(v >= 0.0 && v <= 65535.0) || v != std::floor(v)) {
        throw std::invalid_argument(std::string(key) + " must be a port number");
    }
    return static_cast<std::uint16_t>(v);
}

}  // namespace

SessionConfig session_config_from(const ConfigFile& f) {
    for (const auto& [key, value] : f.values()) {
        if (!kKnownKeys.contains(key)) throw std::invalid_argument("unknown config key: " + key);
    }

    SessionConfig c;
    c.apply_seed(as_seed(f.get_number("session.seed", 0.0)));
    c.source.kind = parse_source_kind(f.get_string("session.source", "simulated"));
    c.direction = parse_direction(f.get_string("session.mapping", "forward"));
    c.frame_rate = f.get_number("session.frame_rate", c.frame_rate);
    c.time_constant = f.get_number("session.time_constant", c.time_constant);
    c.osc_rate = f.get_number("session.osc_rate", c.osc_rate);
    c.starvation_timeout = f.get_number("session.starvation_timeout", c.starvation_timeout);
    c.emit_particles = f.get_bool("session.emit_particles", c.emit_particles);
    c.trace_out = f.get_string("session.trace_out", "");
    c.frames_out = f.get_string("session.frames_out", "");

    for (const auto& ep : f.get_strings("network.osc_out")) c.osc_out.push_back(osc::Endpoint::parse(ep));
    c.osc_in_port = as_port(f.get_number("network.osc_in_port", 0), "osc_in_port");
    c.websocket_port = as_port(f.get_number("network.websocket_port", 0), "websocket_port");
    c.websocket_host = f.get_string("network.websocket_host", c.websocket_host);
    c.ui_dir = f.get_string("network.ui_dir", "");

    auto& src = c.source;
    src.path = f.get_string("source.path", "");
    src.baud = static_cast<int>(f.get_number("source.baud", src.baud));
    src.profile.kind = parse_profile_kind(f.get_string("source.profile", "sinusoid"));
    src.profile.level = f.get_number("source.level", src.profile.level);
    src.profile.target = f.get_number("source.target", src.profile.target);
    src.profile.amplitude = f.get_number("source.amplitude", src.profile.amplitude);
    src.profile.period = f.get_number("source.period", src.profile.period);
    if (f.has("source.seed")) src.profile.seed = as_seed(f.get_number("source.seed", 0));
    src.manual_m = f.get_number("source.manual_m", src.manual_m);

    const double particles = f.get_number("mandala.particles", 96);
    if (!(particles >= 1.0) || particles != std::floor(particles)) {
        throw std::invalid_argument("mandala.particles must be a positive integer");
    }
    const double outer = f.get_number("mandala.outer_radius", f.get_number("mandala.R", 1.0));
    const double inner = f.get_number("mandala.inner_radius", f.get_number("mandala.r", 0.25));
    c.mandala = MandalaConfig::uniform(static_cast<std::size_t>(particles), outer, inner,
                                       f.get_number("mandala.omega", 0.4),
                                       f.get_number("mandala.Omega", 2.0),
                                       f.get_number("mandala.noise_amplitude", 1.1),
                                       f.get_number("mandala.noise_frequency", 0.35), c.seed);
    if (f.has("mandala.seed")) c.mandala.seed = as_seed(f.get_number("mandala.seed", 0));

    auto& audio = c.audio;
    audio.mode = parse_audio_mode(f.get_string("audio.mode", "off"));
    audio.track1 = f.get_string("audio.track1", f.get_string("audio.track", ""));
    audio.track2 = f.get_string("audio.track2", "");
    audio.granular.base_rate = f.get_number("audio.base_rate", audio.granular.base_rate);
    audio.granular.alpha = f.get_number("audio.alpha", audio.granular.alpha);
    audio.granular.grain_duration = f.get_number("audio.grain_duration", audio.granular.grain_duration);
    audio.granular.grain_overlap = f.get_number("audio.grain_overlap", audio.granular.grain_overlap);
    if (f.has("audio.seed")) audio.granular.seed = as_seed(f.get_number("audio.seed", 0));
    audio.block_seconds = f.get_number("audio.block_seconds", audio.block_seconds);
    audio.record_path = f.get_string("audio.record", "");

    c.validate();
    return c;
}

SessionConfig load_session_config(const std::filesystem::path& path) {
    return session_config_from(ConfigFile::load(path));
}

}  // namespace mandala
