#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cuelab/metrics.hpp"

namespace cuelab::io {

struct SignalTrace {
    std::vector<double> timestamps; // s, strictly increasing
    std::vector<double> values;
    double nominal_rate = 0.0;      // Hz
    std::vector<std::string> warnings;

    std::size_t size() const { return values.size(); }
};

/// Reads a (t_s, gyro_y) CSV. Errors on parse failure, fewer than two rows,
/// or non-increasing time. A measured rate more than 5% off the expected one,
/// and gaps longer than three nominal periods, become warnings.
SignalTrace read_trace(std::istream& in, double expected_rate);
SignalTrace load_trace(const std::filesystem::path& path, double expected_rate);

void write_trace(const SignalTrace& trace, std::ostream& out);

/// Linear interpolation onto a uniform grid from the first timestamp, step
/// 1/rate, not past the last timestamp.
SignalTrace resample(const SignalTrace& trace, double rate);

// Trial log columns:
// t_s,est_cadence_hz,cue_active,cue_hz,strategy,direction,seed,target_hz,baseline_hz
void write_trial(const metrics::TrialRecord& record, std::ostream& out);
metrics::TrialRecord read_trial(std::istream& in);

// Burst sidecar columns: issued_at_s,cue_hz,beat_count,current_cadence_hz,label
void write_cues(const metrics::TrialRecord& record, std::ostream& out);
std::vector<metrics::CueEvent> read_cues(std::istream& in);

void save_trial(const metrics::TrialRecord& record, const std::filesystem::path& log_path);
/// Loads a trial log and, when present, its ".cues.csv" sidecar.
metrics::TrialRecord load_trial(const std::filesystem::path& log_path);

std::filesystem::path cues_path_for(const std::filesystem::path& log_path);

} // namespace cuelab::io
