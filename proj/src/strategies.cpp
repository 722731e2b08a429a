#include "cuelab/strategies.hpp"

#include <cmath>
#include <string>

#include "cuelab/error.hpp"

namespace cuelab::strategy {

void StrategyKind::validate() const {
    if (kind == Kind::proportional && !(p_gain > 0.0)) throw config_error("p_gain must be > 0");
}

std::string_view to_string(Kind kind) {
    switch (kind) {
    case Kind::control: return "control";
    case Kind::fixed: return "fixed";
    case Kind::proportional: return "proportional";
    case Kind::adaptive: return "adaptive";
    }
    return "?";
}

Kind parse_kind(std::string_view name) {
    if (name == "control") return Kind::control;
    if (name == "fixed") return Kind::fixed;
    if (name == "proportional") return Kind::proportional;
    if (name == "adaptive") return Kind::adaptive;
    throw input_error("unknown strategy '" + std::string(name) + "'");
}

std::string_view to_string(CueLabel label) {
    switch (label) {
    case CueLabel::fixed: return "fixed";
    case CueLabel::proportional: return "proportional";
    case CueLabel::exploration: return "exploration";
    case CueLabel::converged: return "converged";
    }
    return "?";
}

CueLabel parse_cue_label(std::string_view name) {
    if (name == "fixed") return CueLabel::fixed;
    if (name == "proportional") return CueLabel::proportional;
    if (name == "exploration") return CueLabel::exploration;
    if (name == "converged") return CueLabel::converged;
    throw input_error("unknown cue label '" + std::string(name) + "'");
}

bool gate(double current_cadence, double target, double band) {
    if (!(target > 0.0)) throw input_error("gate: target must be > 0");
    return std::abs(current_cadence - target) > band * target;
}

std::optional<CueCommand> decide(const StrategyKind& kind, const DecisionContext& ctx) {
    kind.validate();
    ctx.bounds.validate();
    if (!(ctx.target > 0.0)) throw input_error("decide: target must be > 0");
    if (ctx.beat_count <= 0) throw input_error("decide: beat_count must be positive");

    CueCommand cmd;
    cmd.beat_count = ctx.beat_count;
    cmd.issued_at = ctx.time;
    switch (kind.kind) {
    case Kind::control:
        return std::nullopt;
    case Kind::fixed:
        if (!ctx.bounds.contains(ctx.target)) throw config_error("fixed cue target lies outside the cue bounds");
        cmd.frequency = ctx.target;
        cmd.label = CueLabel::fixed;
        break;
    case Kind::proportional:
        cmd.frequency = ctx.bounds.clamp(ctx.current_cadence + kind.p_gain * (ctx.target - ctx.current_cadence));
        cmd.label = CueLabel::proportional;
        break;
    case Kind::adaptive: {
        const auto d = opt::select_cue(ctx.model, ctx.current_cadence, ctx.target, ctx.bounds, ctx.seed, ctx.optimizer);
        cmd.frequency = d.cue;
        cmd.label = d.phase_label == opt::PhaseLabel::exploration ? CueLabel::exploration : CueLabel::converged;
        break;
    }
    }
    return cmd;
}

} // namespace cuelab::strategy
