#include "cuelab/cds.hpp"

#include <cmath>
#include <string>

#include "cuelab/error.hpp"

namespace cuelab::cds {

void CdsConfig::validate() const {
    if (harmonic_count < 1) throw config_error("cds: harmonic_count must be >= 1");
    if (!(freq_learn_rate > 0.0)) throw config_error("cds: freq_learn_rate must be > 0");
    if (!(coeff_learn_rate > 0.0)) throw config_error("cds: coeff_learn_rate must be > 0");
    if (!(sample_period > 0.0)) throw config_error("cds: sample_period must be > 0");
    if (!(initial_frequency > 0.0)) throw config_error("cds: initial_frequency must be > 0");
    if (!std::isfinite(initial_phase)) throw config_error("cds: initial_phase must be finite");
}

namespace {

double wrap_phase(double phase) {
    double wrapped = std::fmod(phase, two_pi);
    if (wrapped < 0.0) wrapped += two_pi;
    // fmod of a tiny negative value can round back up to exactly 2pi
    if (wrapped >= two_pi) wrapped = 0.0;
    return wrapped;
}

} // namespace

CdsState initial_state(const CdsConfig& config) {
    config.validate();
    CdsState state;
    state.phase = wrap_phase(config.initial_phase);
    state.frequency = config.initial_frequency;
    state.sin_coeffs.assign(static_cast<std::size_t>(config.harmonic_count) + 1, 0.0);
    state.cos_coeffs.assign(static_cast<std::size_t>(config.harmonic_count) + 1, 0.0);
    state.last_prediction = predict(state);
    return state;
}

double predict(const CdsState& state) {
    double sum = 0.0;
    for (std::size_t m = 0; m < state.sin_coeffs.size(); ++m) {
        const double arg = static_cast<double>(m) * state.phase;
        sum += state.sin_coeffs[m] * std::sin(arg) + state.cos_coeffs[m] * std::cos(arg);
    }
    return sum;
}

namespace {

void step_in_place(CdsState& state, double sample, const CdsConfig& config) {
    if (!std::isfinite(sample)) throw input_error("cds: non-finite sample");

    const double T = config.sample_period;
    const double error = sample - predict(state);
    const double old_phase = state.phase;
    const double coupling = config.freq_learn_rate * error * std::sin(old_phase);

    // Coefficient steps follow the gradient of the squared error of predict():
    // alpha multiplies sin(m phi), beta multiplies cos(m phi).
    const double gain = T * config.coeff_learn_rate * error;
    for (std::size_t m = 0; m < state.sin_coeffs.size(); ++m) {
        const double arg = static_cast<double>(m) * old_phase;
        state.sin_coeffs[m] += gain * std::sin(arg);
        state.cos_coeffs[m] += gain * std::cos(arg);
    }

    state.phase = wrap_phase(old_phase + T * (state.frequency - coupling));
    state.frequency = std::abs(state.frequency - T * coupling);
    if (state.phase < old_phase) ++state.stride_count;
    state.last_prediction = predict(state);
}

} // namespace

CdsState update(const CdsState& state, double sample, const CdsConfig& config) {
    CdsState next = state;
    step_in_place(next, sample, config);
    return next;
}

Estimator::Estimator(CdsConfig config) : config_(config), state_(initial_state(config_)) {}

bool Estimator::push(double sample) {
    const auto before = state_.stride_count;
    step_in_place(state_, sample, config_);
    return state_.stride_count != before;
}

} // namespace cuelab::cds
