#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "cuelab/gp.hpp"
#include "cuelab/optimizer.hpp"

namespace cuelab::strategy {

enum class Kind { control, fixed, proportional, adaptive };

struct StrategyKind {
    Kind kind = Kind::fixed;
    double p_gain = 0.5; // proportional only

    void validate() const;
    bool operator==(const StrategyKind&) const = default;
};

std::string_view to_string(Kind kind);
/// Accepts control, fixed, proportional, adaptive.
Kind parse_kind(std::string_view name);

/// Label attached to a burst in the logs.
enum class CueLabel { fixed, proportional, exploration, converged };
std::string_view to_string(CueLabel label);
CueLabel parse_cue_label(std::string_view name);

struct CueCommand {
    double frequency = 0.0; // Hz
    int beat_count = 8;
    double issued_at = 0.0; // s
    CueLabel label = CueLabel::fixed;

    double duration() const { return static_cast<double>(beat_count) / frequency; }
};

inline constexpr double acceptance_band = 0.01;

/// True when the cadence sits outside the closed +/-1% band around the target.
bool gate(double current_cadence, double target, double band = acceptance_band);

struct DecisionContext {
    double current_cadence = 0.0;
    double target = 0.0;
    double baseline = 0.0;
    opt::CueBounds bounds;
    const gp::GpPosterior* model = nullptr; // adaptive only, may be null
    std::uint64_t seed = 0;
    double time = 0.0;
    int beat_count = 8;
    opt::OptimizerSettings optimizer;
};

/// Returns nullopt for the control pseudo-strategy (never cues).
std::optional<CueCommand> decide(const StrategyKind& kind, const DecisionContext& ctx);

} // namespace cuelab::strategy
