#include "cuelab/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <fstream>
#include <mutex>
#include <random>
#include <thread>

#include <nlohmann/json.hpp>

#include "cuelab/signal_io.hpp"
#include "text.hpp"

namespace cuelab::runner {

using metrics::Direction;
using metrics::TrialRecord;
using strategy::Kind;
using strategy::StrategyKind;

void ProtocolConfig::validate() const {
    if (!(sample_rate > 0.0)) throw config_error("protocol: sample_rate must be > 0");
    if (!(session_duration > 0.0)) throw config_error("protocol: session_duration must be > 0");
    if (!(cueing_duration > 0.0) || !(cueing_duration < session_duration)) {
        throw config_error("protocol: cueing_duration must be in (0, session_duration)");
    }
    if (!(target_offset > 0.0) || target_offset >= 0.35) {
        throw config_error("protocol: target_offset must lie in (0, 0.35) so targets stay inside the cue bounds");
    }
    if (check_interval < 1) throw config_error("protocol: check_interval must be >= 1 stride");
    if (!(acceptance_band >= 0.0)) throw config_error("protocol: acceptance_band must be >= 0");
    if (beat_count < 1) throw config_error("protocol: beat_count must be >= 1");
    if (warmup < 0.0 || warmup >= session_duration) throw config_error("protocol: warmup must be in [0, session_duration)");
    if (log_decimation < 1) throw config_error("protocol: log_decimation must be >= 1");
    if (!(divergence_low < divergence_high)) throw config_error("protocol: divergence bounds out of order");
    if (seeds.empty()) throw config_error("protocol: at least one seed required");
    if (threads < 1) throw config_error("protocol: threads must be >= 1");
}

cds::CdsConfig ExperimentConfig::cds_config() const {
    cds::CdsConfig c = cds;
    c.sample_period = 1.0 / protocol.sample_rate;
    return c;
}

void ExperimentConfig::validate() const {
    protocol.validate();
    cds_config().validate();
    gp.validate();
    walker.validate();
    if (gp_refit_every < 1) throw config_error("gp: refit_every must be >= 1");
    if (!(optimizer.optimality_tolerance > 0.0)) throw config_error("optimizer: optimality_tolerance must be > 0");
    if (optimizer.max_iterations < 1) throw config_error("optimizer: max_iterations must be >= 1");
    if (strategies.empty()) throw config_error("strategies: list is empty");
    for (const auto& s : strategies) s.validate();
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    std::uint64_t h = mix(seed);
    h = mix(h ^ a);
    h = mix(h ^ b);
    return mix(h ^ c);
}

double target_for(const ProtocolConfig& protocol, Direction direction, double baseline) {
    switch (direction) {
    case Direction::up: return baseline * (1.0 + protocol.target_offset);
    case Direction::down: return baseline * (1.0 - protocol.target_offset);
    case Direction::none: return baseline;
    }
    return baseline;
}

namespace {

constexpr std::uint64_t stream_walker = 1;
constexpr std::uint64_t stream_decision = 2;
constexpr std::uint64_t stream_order = 3;

std::uint64_t condition_code(const StrategyKind& s, Direction d) {
    return static_cast<std::uint64_t>(s.kind) * 4 + static_cast<std::uint64_t>(d) + 1;
}

struct Burst {
    double frequency = 0.0;
    double ends_at = 0.0;
};

struct SessionSetup {
    const ExperimentConfig* config = nullptr;
    walker::WalkerParams walker;
    std::optional<StrategyKind> strategy; // empty for control
    Direction direction = Direction::none;
    double target = 0.0;
    double baseline = 0.0;
    std::uint64_t seed = 0;
    bool cold_start = false; // control: estimator starts cold inside the session
};

[[noreturn]] void diverged(double t, double cadence, const std::deque<std::pair<double, double>>& tail) {
    std::string msg = "estimated cadence " + detail::num(cadence) + " Hz left the plausible range at t=" +
                      detail::num(t) + " s; recent trace (t_s,cadence_hz):";
    for (const auto& [tt, c] : tail) msg += " " + detail::num(tt) + "," + detail::num(c);
    throw DivergenceError(msg);
}

TrialRecord run_session(const SessionSetup& setup) {
    const ExperimentConfig& config = *setup.config;
    const ProtocolConfig& p = config.protocol;
    const double dt = 1.0 / p.sample_rate;
    const std::uint64_t code = setup.strategy ? condition_code(*setup.strategy, setup.direction) : 0;

    std::mt19937_64 rng(derive_seed(setup.seed, stream_walker, code));
    walker::WalkerState walker = walker::initial_state(setup.walker);
    cds::Estimator estimator(config.cds_config());

    if (!setup.cold_start && p.warmup > 0.0) {
        // pre-roll: the walker is already walking when the session clock starts
        const auto n = static_cast<long>(std::llround(p.warmup * p.sample_rate));
        for (long i = 0; i < n; ++i) estimator.push(walker::step(walker, setup.walker, std::nullopt, dt, rng));
        walker.time = 0.0;
    }

    TrialRecord record;
    record.target = setup.target;
    record.baseline = setup.baseline;
    record.strategy = setup.strategy.value_or(StrategyKind{Kind::control, 0.5});
    record.direction = setup.direction;
    record.seed = setup.seed;
    record.cueing_end = p.cueing_duration;
    record.session_end = p.session_duration;

    const bool adaptive = setup.strategy && setup.strategy->kind == Kind::adaptive;
    const bool cueing = setup.strategy && setup.strategy->kind != Kind::control;
    std::optional<opt::CueBounds> bounds;
    if (cueing) {
        bounds = opt::CueBounds::from_baseline(setup.baseline);
        if (!bounds->contains(setup.target)) throw config_error("target cadence lies outside the cue bounds");
    }
    gp::GpHyperparams hp = config.gp;

    std::optional<Burst> burst;
    auto burst_active = [&](double t) { return burst && t < burst->ends_at && t < p.cueing_duration; };

    double prev_cadence = estimator.cadence_hz();
    double prev_cue = 0.0;
    std::uint64_t strides = 0;
    std::uint64_t increment = 0;
    std::deque<std::pair<double, double>> tail;

    auto log = [&](double t) {
        metrics::TrialSample s;
        s.t = t;
        s.est_cadence = estimator.cadence_hz();
        s.cue_active = burst_active(t);
        if (s.cue_active) s.cue_hz = burst->frequency;
        record.samples.push_back(s);
        tail.emplace_back(t, s.est_cadence);
        if (tail.size() > 20) tail.pop_front();
    };

    auto on_increment = [&](double t, double cadence) {
        ++increment;
        record.increment_times.push_back(t);
        if (adaptive && t <= p.cueing_duration) record.dataset.append(prev_cadence, prev_cue, cadence);

        if (cueing && t < p.cueing_duration && !burst_active(t) && strategy::gate(cadence, setup.target, p.acceptance_band)) {
            std::optional<gp::GpPosterior> model;
            if (adaptive && !record.dataset.empty()) {
                if (config.gp_refit && increment % static_cast<std::uint64_t>(config.gp_refit_every) == 0) {
                    hp = gp::refit_hyperparams(record.dataset, hp);
                }
                model.emplace(record.dataset, gp::fit_basis(record.dataset, hp));
            }
            strategy::DecisionContext ctx;
            ctx.current_cadence = cadence;
            ctx.target = setup.target;
            ctx.baseline = setup.baseline;
            ctx.bounds = *bounds;
            ctx.model = model ? &*model : nullptr;
            ctx.seed = derive_seed(setup.seed, stream_decision, code, increment);
            ctx.time = t;
            ctx.beat_count = p.beat_count;
            ctx.optimizer = config.optimizer;
            if (const auto cmd = strategy::decide(*setup.strategy, ctx)) {
                burst = Burst{cmd->frequency, t + cmd->duration()};
                walker::begin_burst(walker, setup.walker, rng);
                record.cues.push_back({t, cmd->frequency, cmd->beat_count, cadence, cmd->label});
            }
        }
        prev_cadence = cadence;
        prev_cue = burst_active(t) ? burst->frequency : 0.0;
    };

    const auto total = static_cast<long>(std::llround(p.session_duration * p.sample_rate));
    log(0.0);
    for (long i = 1; i <= total; ++i) {
        const double t_prev = static_cast<double>(i - 1) * dt;
        std::optional<double> cue;
        if (burst_active(t_prev)) cue = burst->frequency;
        const bool wrapped = estimator.push(walker::step(walker, setup.walker, cue, dt, rng));
        const double t = static_cast<double>(i) * dt;
        const double cadence = estimator.cadence_hz();

        if ((!setup.cold_start || t >= p.warmup) && (cadence < p.divergence_low || cadence > p.divergence_high)) {
            diverged(t, cadence, tail);
        }
        if (wrapped && ++strides % static_cast<std::uint64_t>(p.check_interval) == 0) on_increment(t, cadence);
        if (i % p.log_decimation == 0) log(t);
    }
    return record;
}

} // namespace

ControlResult run_control_trial(const ExperimentConfig& config, std::uint64_t walker_seed) {
    config.validate();
    SessionSetup setup;
    setup.config = &config;
    setup.walker = walker::participant(config.walker, walker_seed);
    setup.seed = walker_seed;
    setup.cold_start = true;
    ControlResult result;
    result.record = run_session(setup);

    // mean over every logged sample after the warm-up
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : result.record.samples) {
        if (s.t < config.protocol.warmup) continue;
        sum += s.est_cadence;
        ++n;
    }
    if (n == 0) throw numerical_error("control session produced no post-warm-up samples");
    result.baseline = sum / static_cast<double>(n);
    result.record.baseline = result.baseline;
    result.record.target = result.baseline;
    return result;
}

double run_control(const ExperimentConfig& config, std::uint64_t walker_seed) {
    return run_control_trial(config, walker_seed).baseline;
}

TrialRecord run_condition(const ExperimentConfig& config, const StrategyKind& strategy, Direction direction,
                          double baseline, std::uint64_t walker_seed) {
    config.validate();
    strategy.validate();
    if (!(baseline > 0.0) || !std::isfinite(baseline)) throw input_error("baseline must be > 0");
    SessionSetup setup;
    setup.config = &config;
    setup.walker = walker::participant(config.walker, walker_seed);
    setup.strategy = strategy;
    setup.direction = strategy.kind == Kind::control ? Direction::none : direction;
    setup.baseline = baseline;
    setup.target = target_for(config.protocol, setup.direction, baseline);
    setup.seed = walker_seed;
    return run_session(setup);
}

std::string trial_name(std::uint64_t seed, const TrialRecord& record) {
    std::string name = "trial_seed" + std::to_string(seed) + "_" + std::string(strategy::to_string(record.strategy.kind));
    if (record.strategy.kind != Kind::control) {
        std::string dir(metrics::to_string(record.direction));
        std::transform(dir.begin(), dir.end(), dir.begin(), [](unsigned char c) { return std::tolower(c); });
        name += "_" + dir;
    }
    return name;
}

namespace {

struct SeedOutcome {
    std::vector<TrialRecord> records;
    std::optional<double> baseline;
    std::vector<std::string> order;
    std::vector<TrialFailure> failures;
};

std::string condition_label(const ConditionId& c) {
    std::string s(strategy::to_string(c.strategy.kind));
    return s + "-" + std::string(metrics::to_string(c.direction));
}

SeedOutcome run_seed(const ExperimentConfig& config, std::uint64_t seed) {
    SeedOutcome out;
    try {
        auto control = run_control_trial(config, seed);
        out.baseline = control.baseline;
        out.records.push_back(std::move(control.record));
    } catch (const Error& e) {
        out.failures.push_back({seed, "control", e.what(), e.code()});
        return out;
    }

    std::vector<ConditionId> conditions;
    for (const auto& s : config.strategies) {
        if (s.kind == Kind::control) continue;
        for (const Direction d : {Direction::up, Direction::down}) conditions.push_back({s, d});
    }
    std::mt19937_64 order_rng(derive_seed(seed, stream_order));
    std::shuffle(conditions.begin(), conditions.end(), order_rng);

    for (const auto& c : conditions) {
        out.order.push_back(condition_label(c));
        try {
            out.records.push_back(run_condition(config, c.strategy, c.direction, *out.baseline, seed));
        } catch (const Error& e) {
            out.failures.push_back({seed, condition_label(c), e.what(), e.code()});
        }
    }
    return out;
}

std::string opt_num(const std::optional<double>& v) { return v ? detail::num(*v) : std::string("NA"); }

nlohmann::json summary_json(const metrics::Summary& s) {
    nlohmann::json j;
    j["n"] = s.defined;
    if (s.defined > 0) {
        j["mean"] = s.mean;
        j["std"] = s.stddev;
    } else {
        j["mean"] = nullptr;
        j["std"] = nullptr;
    }
    return j;
}

} // namespace

void write_reports(const std::vector<TrialRecord>& records, const std::vector<metrics::GroupRow>& rows,
                   const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "metrics.csv");
        if (!out) throw io_error("cannot write " + (dir / "metrics.csv").string());
        out << "trial,seed,strategy,direction,target_hz,baseline_hz,target_mae_hz,intermediate_mae_hz,"
               "decay_rate_per_s,percent_on,cue_count,median_cue_distance_hz\n";
        for (const auto& r : records) {
            if (r.strategy.kind == Kind::control) continue;
            const auto m = metrics::compute(r);
            out << trial_name(r.seed, r) << ',' << r.seed << ',' << strategy::to_string(r.strategy.kind) << ','
                << metrics::to_string(r.direction) << ',' << detail::num(r.target) << ',' << detail::num(r.baseline)
                << ',' << detail::num(m.target_mae) << ',' << opt_num(m.intermediate_mae) << ','
                << opt_num(m.decay_rate) << ',' << detail::num(m.percent_on) << ',' << r.cues.size() << ','
                << opt_num(metrics::median_cue_distance(r)) << '\n';
        }
    }
    {
        std::ofstream out(dir / "summary.csv");
        if (!out) throw io_error("cannot write " + (dir / "summary.csv").string());
        out << "group,direction,records";
        for (const char* m : {"target_mae_hz", "intermediate_mae_hz", "decay_rate_per_s", "percent_on"}) {
            out << ',' << m << "_mean," << m << "_std," << m << "_n";
        }
        out << '\n';
        auto cell = [&](const metrics::Summary& s) {
            if (s.defined == 0) {
                out << ",NA,NA,0";
            } else {
                out << ',' << detail::num(s.mean) << ',' << detail::num(s.stddev) << ',' << s.defined;
            }
        };
        for (const auto& row : rows) {
            out << row.group << ',' << metrics::to_string(row.direction) << ',' << row.records;
            cell(row.target_mae);
            cell(row.intermediate_mae);
            cell(row.decay_rate);
            cell(row.percent_on);
            out << '\n';
        }
    }
    {
        nlohmann::json j;
        j["trials"] = records.size();
        j["groups"] = nlohmann::json::array();
        for (const auto& row : rows) {
            j["groups"].push_back({{"group", row.group},
                                   {"direction", std::string(metrics::to_string(row.direction))},
                                   {"records", row.records},
                                   {"target_mae_hz", summary_json(row.target_mae)},
                                   {"intermediate_mae_hz", summary_json(row.intermediate_mae)},
                                   {"decay_rate_per_s", summary_json(row.decay_rate)},
                                   {"percent_on", summary_json(row.percent_on)}});
        }
        std::ofstream out(dir / "summary.json");
        if (!out) throw io_error("cannot write " + (dir / "summary.json").string());
        out << j.dump(2) << '\n';
    }
}

SuiteResult run_suite(const ExperimentConfig& config, const std::optional<std::filesystem::path>& out_dir) {
    config.validate();
    const auto& seeds = config.protocol.seeds;
    std::vector<SeedOutcome> outcomes(seeds.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) outcomes[i] = run_seed(config, seeds[i]);
    };
    const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(config.protocol.threads), seeds.size());
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    SuiteResult result;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        auto& o = outcomes[i];
        if (o.baseline) result.baselines.emplace_back(seeds[i], *o.baseline);
        result.condition_order.emplace_back(seeds[i], o.order);
        for (auto& f : o.failures) result.failures.push_back(std::move(f));
        for (auto& r : o.records) result.records.push_back(std::move(r));
    }
    result.summary = metrics::stratify(result.records);

    if (out_dir) {
        std::filesystem::create_directories(*out_dir);
        for (const auto& r : result.records) io::save_trial(r, *out_dir / (trial_name(r.seed, r) + ".csv"));
        write_reports(result.records, result.summary, *out_dir);
        nlohmann::json run;
        run["baselines_hz"] = nlohmann::json::array();
        for (const auto& [seed, b] : result.baselines) run["baselines_hz"].push_back({{"seed", seed}, {"baseline", b}});
        run["condition_order"] = nlohmann::json::array();
        for (const auto& [seed, order] : result.condition_order) {
            run["condition_order"].push_back({{"seed", seed}, {"order", order}});
        }
        run["failures"] = nlohmann::json::array();
        for (const auto& f : result.failures) {
            run["failures"].push_back({{"seed", f.seed}, {"condition", f.condition}, {"message", f.message}});
        }
        std::ofstream out(*out_dir / "run.json");
        if (!out) throw io_error("cannot write run.json");
        out << run.dump(2) << '\n';
    }
    return result;
}

SuiteResult report_from_logs(const std::filesystem::path& logs_dir, const std::optional<std::filesystem::path>& out_dir) {
    if (!std::filesystem::is_directory(logs_dir)) throw io_error(logs_dir.string() + " is not a directory");
    std::vector<std::filesystem::path> paths;
    for (const auto& entry : std::filesystem::directory_iterator(logs_dir)) {
        const auto name = entry.path().filename().string();
        if (!entry.is_regular_file() || name.rfind("trial_", 0) != 0) continue;
        if (name.size() < 4 || name.substr(name.size() - 4) != ".csv") continue;
        if (name.size() >= 9 && name.substr(name.size() - 9) == ".cues.csv") continue;
        paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw io_error("no trial logs found in " + logs_dir.string());

    SuiteResult result;
    for (const auto& path : paths) result.records.push_back(io::load_trial(path));
    result.summary = metrics::stratify(result.records);
    write_reports(result.records, result.summary, out_dir.value_or(logs_dir));
    return result;
}

} // namespace cuelab::runner
