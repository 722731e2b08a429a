#pragma once

// Outcome metrics over a trial log: target MAE, intermediate (silent-only)
// MAE, post-cue exponential decay rate, and percent of the cueing window
// spent playing beats. Undefined metrics are std::nullopt, never zero.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cuelab/gp.hpp"
#include "cuelab/strategies.hpp"

namespace cuelab::metrics {

enum class Direction { up, down, none };
std::string_view to_string(Direction d);
Direction parse_direction(std::string_view name);

struct TrialSample {
    double t = 0.0;            // s
    double est_cadence = 0.0;  // Hz
    bool cue_active = false;
    std::optional<double> cue_hz;
};

struct CueEvent {
    double issued_at = 0.0; // s
    double frequency = 0.0; // Hz
    int beat_count = 8;
    double current_cadence = 0.0; // estimated cadence when issued
    strategy::CueLabel label = strategy::CueLabel::fixed;
};

struct TrialRecord {
    std::vector<TrialSample> samples;
    std::vector<CueEvent> cues;
    double target = 0.0;   // Hz
    double baseline = 0.0; // Hz
    strategy::StrategyKind strategy;
    Direction direction = Direction::none;
    std::uint64_t seed = 0;
    double cueing_end = 360.0;  // s
    double session_end = 420.0; // s
    // in-memory only, not part of the CSV log
    gp::ResponseDataset dataset;         // adaptive trials
    std::vector<double> increment_times; // s, every completed 4-stride check

    /// Throws cuelab::Error(input) unless timestamps strictly increase and no
    /// cue is active after the cueing window.
    void validate() const;
};

/// Time window [start, end) or [start, end] when closed.
struct Window {
    double start = 0.0;
    double end = 360.0;
    bool closed = true;

    bool contains(double t) const { return t >= start && (closed ? t <= end : t < end); }
    double length() const { return end - start; }
};

Window cueing_window(const TrialRecord& record);

double target_mae(const TrialRecord& record);
double target_mae(const TrialRecord& record, const Window& window);

/// nullopt when the window holds no silent samples.
std::optional<double> intermediate_mae(const TrialRecord& record);
std::optional<double> intermediate_mae(const TrialRecord& record, const Window& window);

/// Seconds with beats playing inside the window divided by its length. Each
/// sample holds until the next timestamp.
double percent_on(const TrialRecord& record);
double percent_on(const TrialRecord& record, const Window& window);

struct DecayFit {
    double rate = 0.0; // 1/s, >= 0
    double offset = 0.0;    // a
    double amplitude = 0.0; // b
    double residual_rms = 0.0;
    bool flat = false;
    std::size_t tail_samples = 0;
};

/// Least-squares fit of c(t) = a + b exp(-rate (t - t0)) to (t, c) points,
/// t0 being the first time. Throws cuelab::Error(input) with fewer than 10 points.
DecayFit fit_exponential_decay(const std::vector<double>& t, const std::vector<double>& c);

/// Decay after the final cue ends. nullopt when the record has no cue or the
/// tail is shorter than 10 samples.
std::optional<DecayFit> decay_rate(const TrialRecord& record);

/// Median |cue - estimated cadence at issue| over the trial's bursts.
std::optional<double> median_cue_distance(const TrialRecord& record);

struct TrialMetrics {
    double target_mae = 0.0;
    std::optional<double> intermediate_mae;
    std::optional<double> decay_rate;
    double percent_on = 0.0;
};

TrialMetrics compute(const TrialRecord& record);

struct Summary {
    std::size_t defined = 0;
    double mean = 0.0;
    double stddev = 0.0; // sample standard deviation, 0 when defined < 2
};

Summary summarize(const std::vector<std::optional<double>>& values);

struct GroupRow {
    std::string group; // fixed, proportional, adaptive-exp, adaptive-cvg
    Direction direction = Direction::none;
    std::size_t records = 0;
    Summary target_mae;
    Summary intermediate_mae;
    Summary decay_rate;
    Summary percent_on;
};

/// Groups non-control records by strategy (adaptive split at 70 s) and
/// direction. Row order is fixed: direction UP then DOWN, then fixed,
/// proportional, adaptive-exp, adaptive-cvg; empty groups are omitted.
std::vector<GroupRow> stratify(const std::vector<TrialRecord>& records);

} // namespace cuelab::metrics
