#pragma once

// Canonical dynamical system: an adaptive oscillator that learns the phase,
// frequency and Fourier-series shape of a periodic signal one sample at a time.

#include <cstdint>
#include <numbers>
#include <vector>

namespace cuelab::cds {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

struct CdsConfig {
    int harmonic_count = 7;
    double freq_learn_rate = 0.1;
    double coeff_learn_rate = 1.0;
    double sample_period = 1.0 / 285.0; // s
    double initial_phase = 0.0;         // rad
    double initial_frequency = two_pi * 4.0 / 5.0; // rad/s

    /// Throws cuelab::Error(config) when an invariant is violated.
    void validate() const;
};

struct CdsState {
    double phase = 0.0;     // [0, 2pi)
    double frequency = 0.0; // rad/s, never negative
    std::vector<double> sin_coeffs; // alpha_0..alpha_M
    std::vector<double> cos_coeffs; // beta_0..beta_M
    double last_prediction = 0.0;
    std::uint64_t stride_count = 0;

    int harmonic_count() const { return static_cast<int>(sin_coeffs.size()) - 1; }

    bool operator==(const CdsState&) const = default;
};

CdsState initial_state(const CdsConfig& config);

/// Model output at the current phase: sum over m of alpha_m sin(m phi) + beta_m cos(m phi).
double predict(const CdsState& state);

/// One learning step. Throws cuelab::Error(input) on a non-finite sample,
/// leaving the caller's state untouched.
CdsState update(const CdsState& state, double sample, const CdsConfig& config);

/// Estimated signal frequency in Hz.
inline double cadence(const CdsState& state) { return state.frequency / two_pi; }

/// Stateful convenience wrapper around update().
class Estimator {
public:
    explicit Estimator(CdsConfig config = {});

    /// Returns true when this sample completed a stride (phase wrapped).
    bool push(double sample);

    const CdsState& state() const { return state_; }
    const CdsConfig& config() const { return config_; }
    double cadence_hz() const { return cds::cadence(state_); }

private:
    CdsConfig config_;
    CdsState state_;
};

} // namespace cuelab::cds
