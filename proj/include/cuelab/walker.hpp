#pragma once

// Parametric simulated walker. Cadence follows first-order linear dynamics:
// toward an accepted cue while a burst plays, otherwise back toward an
// effective baseline that blends a remembered cue pace into the natural
// baseline with a fixed half-life. The emitted sample is a harmonic series in
// the gait phase, scaled like a thigh gyroscope trace in deg/s.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace cuelab::walker {

struct Harmonic {
    double amplitude = 0.0; // signal units
    double phase = 0.0;     // rad
};

struct WalkerParams {
    std::string name = "custom";
    double baseline_cadence = 1.67;  // Hz
    double cue_follow_gain = 1.0;    // 1/s
    double baseline_pull_gain = 0.1; // 1/s
    double follow_probability = 1.0;
    double cadence_noise_std = 0.0;  // Hz, stationary std of the cadence jitter
    double noise_correlation_time = 2.0; // s
    double memory_halflife = 10.0;   // s, 0 disables cue memory
    double baseline_jitter = 0.0;    // fractional spread of the baseline across seeds
    std::vector<Harmonic> signal_harmonics{{120.0, 0.0}, {40.0, 0.8}, {15.0, 2.0}};

    void validate() const;
};

struct WalkerState {
    double true_cadence = 0.0; // Hz, noise-free component
    double noise = 0.0;        // Hz, OU jitter added on top
    double true_phase = 0.0;   // rad in [0, 2pi)
    std::optional<double> remembered_target;
    double memory_since = 0.0; // s
    double time = 0.0;         // s
    bool cue_accepted = false; // for the current burst
    std::optional<double> last_cue;

    double cadence() const;
};

WalkerState initial_state(const WalkerParams& params);

/// Baseline the walker relaxes to at its current time.
double effective_baseline(const WalkerState& state, const WalkerParams& params);

/// Draws the once-per-burst acceptance; returns whether the walker follows it.
bool begin_burst(WalkerState& state, const WalkerParams& params, std::mt19937_64& rng);

/// Advances the walker by dt and returns the emitted signal sample.
double step(WalkerState& state, const WalkerParams& params, std::optional<double> active_cue, double dt,
            std::mt19937_64& rng);

/// Signal value at a gait phase.
double signal_at(const WalkerParams& params, double phase);

/// compliant, baseline-puller, inconsistent.
std::vector<std::string> persona_names();
/// Throws cuelab::Error(config) for an unknown name.
WalkerParams persona(const std::string& name);

/// Per-seed participant: persona with its baseline jittered by baseline_jitter.
WalkerParams participant(const WalkerParams& persona, std::uint64_t seed);

} // namespace cuelab::walker
