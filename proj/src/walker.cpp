#include "cuelab/walker.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cuelab/error.hpp"

namespace cuelab::walker {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double min_cadence = 0.05;
} // namespace

void WalkerParams::validate() const {
    if (!(baseline_cadence > 0.0)) throw config_error("walker: baseline_cadence must be > 0");
    if (cue_follow_gain < 0.0 || baseline_pull_gain < 0.0) throw config_error("walker: gains must be >= 0");
    if (follow_probability < 0.0 || follow_probability > 1.0) throw config_error("walker: follow_probability must be in [0,1]");
    if (cadence_noise_std < 0.0) throw config_error("walker: cadence_noise_std must be >= 0");
    if (!(noise_correlation_time > 0.0)) throw config_error("walker: noise_correlation_time must be > 0");
    if (memory_halflife < 0.0) throw config_error("walker: memory_halflife must be >= 0");
    if (baseline_jitter < 0.0) throw config_error("walker: baseline_jitter must be >= 0");
    if (signal_harmonics.empty()) throw config_error("walker: at least one signal harmonic required");
}

double WalkerState::cadence() const { return std::max(min_cadence, true_cadence + noise); }

WalkerState initial_state(const WalkerParams& params) {
    params.validate();
    WalkerState s;
    s.true_cadence = params.baseline_cadence;
    return s;
}

double effective_baseline(const WalkerState& state, const WalkerParams& params) {
    if (!state.remembered_target || params.memory_halflife <= 0.0) return params.baseline_cadence;
    const double age = state.time - state.memory_since;
    const double weight = std::exp2(-age / params.memory_halflife);
    return params.baseline_cadence + (*state.remembered_target - params.baseline_cadence) * weight;
}

bool begin_burst(WalkerState& state, const WalkerParams& params, std::mt19937_64& rng) {
    std::bernoulli_distribution follow(params.follow_probability);
    state.cue_accepted = follow(rng);
    return state.cue_accepted;
}

double signal_at(const WalkerParams& params, double phase) {
    double y = 0.0;
    for (std::size_t h = 0; h < params.signal_harmonics.size(); ++h) {
        const auto& harm = params.signal_harmonics[h];
        y += harm.amplitude * std::sin(static_cast<double>(h + 1) * phase + harm.phase);
    }
    return y;
}

double step(WalkerState& state, const WalkerParams& params, std::optional<double> active_cue, double dt,
            std::mt19937_64& rng) {
    if (!(dt > 0.0)) throw input_error("walker: dt must be > 0");

    // an accepted burst just ended: remember its pace
    if (!active_cue && state.last_cue && state.cue_accepted) {
        state.remembered_target = *state.last_cue;
        state.memory_since = state.time;
        state.cue_accepted = false;
    }
    state.last_cue = active_cue;

    // exact solution of the linear ODE for a target held over the step
    double target = effective_baseline(state, params);
    double gain = params.baseline_pull_gain;
    if (active_cue && state.cue_accepted) {
        target = *active_cue;
        gain = params.cue_follow_gain;
    }
    state.true_cadence = target + (state.true_cadence - target) * std::exp(-gain * dt);

    if (params.cadence_noise_std > 0.0) {
        std::normal_distribution<double> normal(0.0, 1.0);
        const double decay = std::exp(-dt / params.noise_correlation_time);
        state.noise = state.noise * decay + params.cadence_noise_std * std::sqrt(1.0 - decay * decay) * normal(rng);
    }

    state.true_phase = std::fmod(state.true_phase + two_pi * state.cadence() * dt, two_pi);
    state.time += dt;
    return signal_at(params, state.true_phase);
}

std::vector<std::string> persona_names() { return {"compliant", "baseline-puller", "inconsistent"}; }

WalkerParams persona(const std::string& name) {
    WalkerParams p;
    p.name = name;
    p.baseline_cadence = 1.67;
    p.baseline_jitter = 0.05;
    if (name == "compliant") {
        p.cue_follow_gain = 1.5;
        p.baseline_pull_gain = 0.03;
        p.follow_probability = 1.0;
        p.cadence_noise_std = 0.01;
        p.memory_halflife = 60.0;
    } else if (name == "baseline-puller") {
        p.cue_follow_gain = 0.3;
        p.baseline_pull_gain = 0.6;
        p.follow_probability = 0.95;
        p.cadence_noise_std = 0.01;
        p.memory_halflife = 3.0;
    } else if (name == "inconsistent") {
        p.cue_follow_gain = 0.8;
        p.baseline_pull_gain = 0.15;
        p.follow_probability = 0.6;
        p.cadence_noise_std = 0.02;
        p.memory_halflife = 10.0;
    } else {
        throw config_error("unknown persona '" + name + "'");
    }
    return p;
}

WalkerParams participant(const WalkerParams& persona, std::uint64_t seed) {
    WalkerParams p = persona;
    if (p.baseline_jitter > 0.0) {
        std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
        std::normal_distribution<double> normal(0.0, 1.0);
        const double z = std::clamp(normal(rng), -2.0, 2.0);
        p.baseline_cadence *= 1.0 + p.baseline_jitter * z;
    }
    return p;
}

} // namespace cuelab::walker
