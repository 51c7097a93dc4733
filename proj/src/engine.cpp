#include "mandala/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mandala {

Engine::Engine(SessionConfig config, std::unique_ptr<SignalSource> source)
    : config_(std::move(config)), source_(std::move(source)), mandala_(config_.mandala) {
    config_.validate();
    if (!source_) throw std::invalid_argument("engine needs a signal source");
    state_.signal.time_constant = config_.time_constant;
    state_.frame.positions.resize(config_.mandala.particle_count);
}

void Engine::ingest(double now) {
    for (const Reading& r : source_->poll(now)) {
        ++state_.counters.samples;
        state_.last_sample_time = now;
        state_.poor_signal = r.poor_signal;
        if (r.poor_signal > kPoorSignalThreshold) {
            ++state_.counters.held_samples;
            state_.holding = true;
            continue;
        }
        state_.holding = false;
        state_.raw_meditation = r.raw_meditation;
        state_.target_m = r.m;
        state_.target_a = r.a;
        if (!state_.have_sample) {
            // First good reading: start there instead of ramping up from 0.
            state_.signal.m = r.m;
            state_.signal.a = r.a;
            state_.have_sample = true;
        }
    }
    state_.counters.parse_errors = source_->parse_errors();
}

TickOutput Engine::tick(double now) {
    if (started_ && now < state_.clock) throw std::invalid_argument("engine clock must not run backwards");
    const double dt = started_ ? now - state_.clock : 0.0;
    if (!started_) state_.last_sample_time = now;
    started_ = true;
    state_.clock = now;

    ingest(now);

    state_.degraded = source_->can_starve() && now - state_.last_sample_time > config_.starvation_timeout;
    const bool hold = state_.degraded || state_.holding || !state_.have_sample;
    if (!hold) {
        if (state_.signal.time_constant <= 0.0 || dt > 0.0) {
            state_.signal = smooth_step(state_.signal, state_.target_m, state_.target_a, dt);
        }
    }
    state_.signal.last_update = now;

    const double m = apply_direction(config_.direction, state_.signal.m);
    state_.effective_m = m;

    state_.frame.t = now;
    state_.frame.m = m;
    step_frame_into(mandala_.config(), mandala_.noise(), now, m, state_.frame.positions);
    ++state_.counters.frames;

    TickOutput out;
    out.frame = &state_.frame;
    out.audio.m = m;
    out.audio.gains = crossfade_gains(m);
    const auto gp = granular_params(m, config_.audio.granular, 1.0);
    out.audio.rate = gp.rate;
    out.audio.jitter_bound = gp.delta_tau;

    const auto slot = static_cast<long long>(std::floor(now * config_.osc_rate));
    if (slot != last_osc_slot_) {
        last_osc_slot_ = slot;
        out.osc.emplace_back(address::kMeditation, std::vector<osc::Arg>{static_cast<float>(m)});
        out.osc.emplace_back(address::kAttention,
                             std::vector<osc::Arg>{static_cast<float>(state_.signal.a)});
        out.osc.emplace_back(address::kRaw, std::vector<osc::Arg>{std::int32_t{state_.raw_meditation}});
    }
    if (mode_dirty_) {
        mode_dirty_ = false;
        out.osc.emplace_back(address::kMode, std::vector<osc::Arg>{to_string(config_.direction)});
    }
    if (config_.emit_particles) {
        const auto& pos = state_.frame.positions;
        for (std::size_t q = 0; q < pos.size(); ++q) {
            out.osc.emplace_back(address::kParticle,
                                 std::vector<osc::Arg>{static_cast<std::int32_t>(q),
                                                       static_cast<float>(pos[q].x),
                                                       static_cast<float>(pos[q].y)});
        }
    }
    return out;
}

void Engine::set_direction(Direction d) {
    if (d != config_.direction) mode_dirty_ = true;
    config_.direction = d;
}

bool Engine::set_manual_m(double m) {
    if (!(m >= 0.0 && m <= 1.0) || !source_->set_manual(m)) {
        ++state_.counters.rejected_commands;
        return false;
    }
    return true;
}

const std::vector<std::string>& Engine::param_whitelist() {
    static const std::vector<std::string> names = {
        "noise_amplitude", "noise_frequency", "outer_radius", "inner_radius", "omega",
        "Omega", "time_constant", "alpha", "base_rate",
    };
    return names;
}

bool Engine::set_param(const std::string& name, double value) {
    const auto& wl = param_whitelist();
    if (std::find(wl.begin(), wl.end(), name) == wl.end() || !std::isfinite(value)) {
        ++state_.counters.rejected_commands;
        return false;
    }

    try {
        if (name == "time_constant" || name == "alpha" || name == "base_rate") {
            SessionConfig next = config_;
            if (name == "time_constant") next.time_constant = value;
            if (name == "alpha") next.audio.granular.alpha = value;
            if (name == "base_rate") next.audio.granular.base_rate = value;
            next.validate();
            next.audio.granular.validate();
            config_ = std::move(next);
            state_.signal.time_constant = config_.time_constant;
            return true;
        }

        MandalaConfig mc = config_.mandala;
        if (name == "noise_amplitude") mc.noise_amplitude = value;
        if (name == "noise_frequency") mc.noise_frequency = value;
        if (name == "outer_radius") mc.outer_radius = value;
        if (name == "inner_radius") mc.inner_radius = value;
        if (name == "omega" || name == "Omega") {
            // Keep particles evenly spread when the outer speed changes.
            const auto uniform = MandalaConfig::uniform(
                mc.particle_count, mc.outer_radius, mc.inner_radius,
                name == "omega" ? value : mc.omega.front(), name == "Omega" ? value : mc.Omega.front(),
                mc.noise_amplitude, mc.noise_frequency, mc.seed);
            mc = uniform;
        }
        Mandala rebuilt(mc);
        config_.mandala = std::move(mc);
        mandala_ = std::move(rebuilt);
        return true;
    } catch (const std::invalid_argument&) {
        ++state_.counters.rejected_commands;
        return false;
    }
}

}  // namespace mandala
