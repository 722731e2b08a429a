#pragma once

#include <cstdint>
#include <string_view>

#include "cuelab/gp.hpp"

namespace cuelab::opt {

struct CueBounds {
    double lower = 0.0;
    double upper = 0.0;
    double baseline = 0.0;

    /// [0.65, 1.35] x baseline.
    static CueBounds from_baseline(double baseline);

    bool contains(double cue) const { return cue >= lower && cue <= upper; }
    double clamp(double cue) const;
    void validate() const;
};

enum class PhaseLabel { exploration, converged };

std::string_view to_string(PhaseLabel label);

struct CueDecision {
    double cue = 0.0;             // Hz, inside the bounds
    PhaseLabel phase_label = PhaseLabel::exploration;
    double objective_value = 0.0; // Hz^2
    int iterations = 0;
};

struct OptimizerSettings {
    double optimality_tolerance = 1e-6; // |dJ/dc| below this at the random start -> exploration
    int max_iterations = 200;
    int multistart_count = 64;          // extra evenly spaced starts for the converged phase
    double step_tolerance = 1e-10;      // Hz
};

/// Squared gap between the target and the model's predicted next cadence.
double objective(const gp::GpPosterior& model, double current_cadence, double cue, double target);

/// Picks the cue minimizing (target - predicted next cadence)^2 within bounds.
/// A uniform random start whose objective gradient is below the optimality
/// tolerance is returned as-is and labelled exploration; otherwise projected
/// gradient descent with backtracking runs from the random start and from an
/// evenly spaced set of starts, and the best stationary point is returned.
/// A null model (no data yet) always yields an exploration draw.
CueDecision select_cue(const gp::GpPosterior* model, double current_cadence, double target,
                       const CueBounds& bounds, std::uint64_t seed, const OptimizerSettings& settings = {});

/// Convenience overload that fits the basis and factorizes the dataset.
CueDecision select_cue(const gp::ResponseDataset& dataset, const gp::GpHyperparams& hp, double current_cadence,
                       double target, const CueBounds& bounds, std::uint64_t seed,
                       const OptimizerSettings& settings = {});

inline constexpr double exploration_window_s = 70.0;

/// Time-based stratification used by the analysis (independent of the
/// optimizer's own label): exploration iff t < 70 s.
PhaseLabel classify_phase(double trial_time_s);

} // namespace cuelab::opt
