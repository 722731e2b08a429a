#include "cuelab/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "cuelab/error.hpp"

namespace cuelab::opt {

CueBounds CueBounds::from_baseline(double baseline) {
    CueBounds b{0.65 * baseline, 1.35 * baseline, baseline};
    b.validate();
    return b;
}

double CueBounds::clamp(double cue) const { return std::clamp(cue, lower, upper); }

void CueBounds::validate() const {
    if (!std::isfinite(lower) || !std::isfinite(upper) || !(lower < upper) || !(lower >= 0.0)) {
        throw input_error("cue bounds must satisfy 0 <= lower < upper");
    }
}

std::string_view to_string(PhaseLabel label) {
    return label == PhaseLabel::exploration ? "exploration" : "converged";
}

PhaseLabel classify_phase(double trial_time_s) {
    if (trial_time_s < 0.0) throw input_error("trial time must be non-negative");
    return trial_time_s < exploration_window_s ? PhaseLabel::exploration : PhaseLabel::converged;
}

double objective(const gp::GpPosterior& model, double current_cadence, double cue, double target) {
    const double gap = target - model.mean({current_cadence, cue});
    return gap * gap;
}

namespace {

struct Evaluation {
    double value;
    double gradient;
};

Evaluation evaluate(const gp::GpPosterior& model, double current, double cue, double target) {
    const gp::ResponseInput q{current, cue};
    const double gap = target - model.mean(q);
    return {gap * gap, -2.0 * gap * model.mean_cue_derivative(q)};
}

struct Descent {
    double cue;
    double value;
    int iterations;
};

// Projected gradient descent with Armijo backtracking on the box.
Descent descend(const gp::GpPosterior& model, double current, double target, const CueBounds& bounds,
                double start, const OptimizerSettings& settings) {
    double x = bounds.clamp(start);
    Evaluation e = evaluate(model, current, x, target);
    double step = 0.1 * (bounds.upper - bounds.lower) / std::max(std::abs(e.gradient), 1e-12);
    int it = 0;
    for (; it < settings.max_iterations; ++it) {
        if (std::abs(e.gradient) < 1e-14) break;
        bool accepted = false;
        double trial_step = step;
        for (int bt = 0; bt < 60; ++bt) {
            const double cand = bounds.clamp(x - trial_step * e.gradient);
            const double moved = cand - x;
            if (std::abs(moved) < settings.step_tolerance) break;
            const Evaluation ce = evaluate(model, current, cand, target);
            // sufficient decrease along the projected direction
            if (ce.value <= e.value + 1e-4 * e.gradient * moved) {
                x = cand;
                e = ce;
                accepted = true;
                step = trial_step * 2.0;
                break;
            }
            trial_step *= 0.5;
        }
        if (!accepted) break;
    }
    return {x, e.value, it};
}

} // namespace

CueDecision select_cue(const gp::GpPosterior* model, double current_cadence, double target,
                       const CueBounds& bounds, std::uint64_t seed, const OptimizerSettings& settings) {
    bounds.validate();
    if (!(target > 0.0) || !std::isfinite(target)) throw input_error("target cadence must be > 0");
    if (!std::isfinite(current_cadence) || current_cadence < 0.0) throw input_error("current cadence must be >= 0");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> draw(bounds.lower, bounds.upper);
    const double start = bounds.clamp(draw(rng));

    if (model == nullptr || model->dataset().empty()) {
        // no model: predicted next cadence defaults to the current one
        const double gap = target - current_cadence;
        return {start, PhaseLabel::exploration, gap * gap, 0};
    }

    const Evaluation at_start = evaluate(*model, current_cadence, start, target);
    if (std::abs(at_start.gradient) < settings.optimality_tolerance) {
        return {start, PhaseLabel::exploration, at_start.value, 0};
    }

    Descent best = descend(*model, current_cadence, target, bounds, start, settings);
    int total_iterations = best.iterations;
    const int n = std::max(settings.multistart_count, 2);
    for (int i = 0; i < n; ++i) {
        const double s = bounds.lower + (bounds.upper - bounds.lower) * static_cast<double>(i) / (n - 1);
        const Descent d = descend(*model, current_cadence, target, bounds, s, settings);
        total_iterations += d.iterations;
        const bool better = d.value < best.value - 1e-15;
        const bool tie = std::abs(d.value - best.value) <= 1e-15 && d.cue < best.cue;
        if (better || tie) best = d;
    }
    return {bounds.clamp(best.cue), PhaseLabel::converged, best.value, total_iterations};
}

CueDecision select_cue(const gp::ResponseDataset& dataset, const gp::GpHyperparams& hp, double current_cadence,
                       double target, const CueBounds& bounds, std::uint64_t seed,
                       const OptimizerSettings& settings) {
    if (dataset.empty()) return select_cue(nullptr, current_cadence, target, bounds, seed, settings);
    const auto fitted = gp::fit_basis(dataset, hp);
    const gp::GpPosterior model(dataset, fitted);
    return select_cue(&model, current_cadence, target, bounds, seed, settings);
}

} // namespace cuelab::opt
