#pragma once

// Closed-loop protocol runs: walker -> CDS estimator -> 4-stride check ->
// strategy -> cue burst -> walker, plus the control session used to measure
// each simulated participant's baseline cadence.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cuelab/cds.hpp"
#include "cuelab/error.hpp"
#include "cuelab/gp.hpp"
#include "cuelab/metrics.hpp"
#include "cuelab/optimizer.hpp"
#include "cuelab/strategies.hpp"
#include "cuelab/walker.hpp"

namespace cuelab::runner {

struct ProtocolConfig {
    double session_duration = 420.0; // s
    double cueing_duration = 360.0;  // s
    double target_offset = 0.20;     // fraction of baseline
    int check_interval = 4;          // strides
    double acceptance_band = 0.01;   // fraction of target
    int beat_count = 8;
    double sample_rate = 285.0;      // Hz
    double warmup = 60.0;            // s, estimator settling before any session
    int log_decimation = 15;         // log every n-th sample
    double divergence_low = 0.1;     // Hz
    double divergence_high = 5.0;    // Hz
    std::vector<std::uint64_t> seeds{1};
    int threads = 1;

    void validate() const;
};

struct ExperimentConfig {
    ProtocolConfig protocol;
    cds::CdsConfig cds;
    gp::GpHyperparams gp;
    bool gp_refit = false;
    int gp_refit_every = 10;
    opt::OptimizerSettings optimizer;
    walker::WalkerParams walker = walker::persona("baseline-puller");
    std::vector<strategy::StrategyKind> strategies{
        {strategy::Kind::fixed, 0.5}, {strategy::Kind::proportional, 0.5}, {strategy::Kind::adaptive, 0.5}};

    /// CDS settings with the sample period tied to the protocol rate.
    cds::CdsConfig cds_config() const;
    void validate() const;
};

/// Thrown when the estimated cadence leaves the plausible range; the message
/// carries the tail of the cadence trace.
class DivergenceError : public Error {
public:
    explicit DivergenceError(const std::string& what) : Error(ErrorCode::divergence, what) {}
};

struct ControlResult {
    double baseline = 0.0; // Hz
    metrics::TrialRecord record;
};

/// 420 s uncued walk from a cold estimator; baseline is the mean estimated
/// cadence after the warm-up period.
ControlResult run_control_trial(const ExperimentConfig& config, std::uint64_t walker_seed);
double run_control(const ExperimentConfig& config, std::uint64_t walker_seed);

metrics::TrialRecord run_condition(const ExperimentConfig& config, const strategy::StrategyKind& strategy,
                                   metrics::Direction direction, double baseline, std::uint64_t walker_seed);

/// Target for a direction: baseline x (1 +/- target_offset).
double target_for(const ProtocolConfig& protocol, metrics::Direction direction, double baseline);

struct ConditionId {
    strategy::StrategyKind strategy;
    metrics::Direction direction = metrics::Direction::up;
};

struct TrialFailure {
    std::uint64_t seed = 0;
    std::string condition;
    std::string message;
    ErrorCode code = ErrorCode::numerical;
};

struct SuiteResult {
    std::vector<metrics::TrialRecord> records; // per seed: control then conditions in run order
    std::vector<std::pair<std::uint64_t, double>> baselines;
    std::vector<std::pair<std::uint64_t, std::vector<std::string>>> condition_order;
    std::vector<TrialFailure> failures;
    std::vector<metrics::GroupRow> summary;
};

/// Control plus every (strategy x direction) condition per seed, in an
/// order shuffled per seed. Trials that throw are reported in failures and
/// skipped. When out_dir is set, per-trial logs and the metric tables are
/// written there.
SuiteResult run_suite(const ExperimentConfig& config, const std::optional<std::filesystem::path>& out_dir = {});

std::string trial_name(std::uint64_t seed, const metrics::TrialRecord& record);

/// metrics.csv, summary.csv and summary.json for a set of records.
void write_reports(const std::vector<metrics::TrialRecord>& records, const std::vector<metrics::GroupRow>& rows,
                   const std::filesystem::path& dir);

/// Loads every trial log in a directory (sorted by name) and rebuilds the tables.
SuiteResult report_from_logs(const std::filesystem::path& logs_dir, const std::optional<std::filesystem::path>& out_dir);

/// Derived 64-bit seed for an independent stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

} // namespace cuelab::runner
