#include "cuelab/cuelab.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <new>
#include <optional>
#include <string>

#include "cuelab/cds.hpp"
#include "cuelab/config.hpp"
#include "cuelab/error.hpp"
#include "cuelab/gp.hpp"
#include "cuelab/metrics.hpp"
#include "cuelab/optimizer.hpp"
#include "cuelab/runner.hpp"
#include "cuelab/signal_io.hpp"
#include "cuelab/strategies.hpp"
#include "text.hpp"

struct cuelab_cds {
    cuelab::cds::Estimator estimator;
};

struct cuelab_gp {
    cuelab::gp::ResponseDataset dataset;
    cuelab::gp::GpHyperparams hp;
};

struct cuelab_experiment {
    cuelab::runner::ExperimentConfig config;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_warnings;

cuelab_status to_status(cuelab::ErrorCode code) {
    using cuelab::ErrorCode;
    switch (code) {
    case ErrorCode::input: return CUELAB_ERR_INPUT;
    case ErrorCode::config: return CUELAB_ERR_CONFIG;
    case ErrorCode::numerical: return CUELAB_ERR_NUMERICAL;
    case ErrorCode::io: return CUELAB_ERR_IO;
    case ErrorCode::insufficient_data: return CUELAB_ERR_INSUFFICIENT_DATA;
    case ErrorCode::divergence: return CUELAB_ERR_DIVERGENCE;
    }
    return CUELAB_ERR_INTERNAL;
}

// Runs fn, translating exceptions into status codes and the thread-local message.
template <class Fn>
cuelab_status guarded(Fn&& fn) {
    last_error.clear();
    last_warnings.clear();
    try {
        fn();
        return CUELAB_OK;
    } catch (const cuelab::Error& e) {
        last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
    } catch (const std::exception& e) {
        last_error = e.what();
    } catch (...) {
        last_error = "unknown error";
    }
    return CUELAB_ERR_INTERNAL;
}

cuelab_status null_arg(const char* what) {
    last_error = std::string("null argument: ") + what;
    return CUELAB_ERR_NULL_ARG;
}

cuelab::cds::CdsConfig from_c(const cuelab_cds_config& c) {
    cuelab::cds::CdsConfig out;
    out.harmonic_count = c.harmonic_count;
    out.freq_learn_rate = c.freq_learn_rate;
    out.coeff_learn_rate = c.coeff_learn_rate;
    out.sample_period = c.sample_period;
    out.initial_phase = c.initial_phase;
    out.initial_frequency = c.initial_frequency;
    return out;
}

cuelab::gp::GpHyperparams from_c(const cuelab_gp_params& p) {
    cuelab::gp::GpHyperparams hp;
    hp.length_scales = {p.length_scale_cadence, p.length_scale_cue};
    hp.signal_variance = p.signal_variance;
    hp.noise_variance = p.noise_variance;
    hp.basis_coefficient = p.basis_coefficient;
    hp.jitter = p.jitter;
    return hp;
}

cuelab_gp_params to_c(const cuelab::gp::GpHyperparams& hp) {
    return {hp.length_scales[0], hp.length_scales[1], hp.signal_variance, hp.noise_variance, hp.basis_coefficient,
            hp.jitter};
}

cuelab_trial_metrics to_c(const cuelab::metrics::TrialRecord& r) {
    const auto m = cuelab::metrics::compute(r);
    cuelab_trial_metrics out{};
    out.target_mae = m.target_mae;
    out.intermediate_defined = m.intermediate_mae.has_value();
    out.intermediate_mae = m.intermediate_mae.value_or(std::nan(""));
    out.decay_defined = m.decay_rate.has_value();
    out.decay_rate = m.decay_rate.value_or(std::nan(""));
    out.percent_on = m.percent_on;
    out.cue_count = r.cues.size();
    return out;
}

cuelab_run_summary to_c(const cuelab::runner::SuiteResult& r) {
    return {r.records.size(), r.failures.size(), r.summary.size()};
}

} // namespace

extern "C" {

const char* cuelab_last_error(void) { return last_error.c_str(); }
const char* cuelab_last_warnings(void) { return last_warnings.c_str(); }
const char* cuelab_version(void) { return "0.1.0"; }

cuelab_cds_config cuelab_cds_default_config(void) {
    const cuelab::cds::CdsConfig d;
    return {d.harmonic_count, d.freq_learn_rate, d.coeff_learn_rate, d.sample_period, d.initial_phase,
            d.initial_frequency};
}

cuelab_status cuelab_cds_create(const cuelab_cds_config* config, cuelab_cds** out) {
    if (!out) return null_arg("out");
    return guarded([&] {
        *out = new cuelab_cds{cuelab::cds::Estimator(config ? from_c(*config) : cuelab::cds::CdsConfig{})};
    });
}

void cuelab_cds_destroy(cuelab_cds* cds) { delete cds; }

cuelab_status cuelab_cds_update(cuelab_cds* cds, double sample, int* stride_completed) {
    if (!cds) return null_arg("cds");
    return guarded([&] {
        const bool wrapped = cds->estimator.push(sample);
        if (stride_completed) *stride_completed = wrapped ? 1 : 0;
    });
}

cuelab_status cuelab_cds_snapshot_get(const cuelab_cds* cds, cuelab_cds_snapshot* out) {
    if (!cds) return null_arg("cds");
    if (!out) return null_arg("out");
    const auto& s = cds->estimator.state();
    *out = {s.phase, s.frequency, cuelab::cds::cadence(s), s.last_prediction, s.stride_count};
    return CUELAB_OK;
}

cuelab_status cuelab_cds_coefficients(const cuelab_cds* cds, double* sin_coeffs, double* cos_coeffs,
                                      size_t capacity, size_t* count) {
    if (!cds) return null_arg("cds");
    const auto& s = cds->estimator.state();
    const size_t n = s.sin_coeffs.size();
    if (count) *count = n;
    for (size_t i = 0; i < n && i < capacity; ++i) {
        if (sin_coeffs) sin_coeffs[i] = s.sin_coeffs[i];
        if (cos_coeffs) cos_coeffs[i] = s.cos_coeffs[i];
    }
    return CUELAB_OK;
}

cuelab_gp_params cuelab_gp_default_params(void) { return to_c(cuelab::gp::GpHyperparams{}); }

cuelab_status cuelab_gp_create(const cuelab_gp_params* params, cuelab_gp** out) {
    if (!out) return null_arg("out");
    return guarded([&] {
        auto hp = params ? from_c(*params) : cuelab::gp::GpHyperparams{};
        hp.validate();
        *out = new cuelab_gp{{}, hp};
    });
}

void cuelab_gp_destroy(cuelab_gp* gp) { delete gp; }

cuelab_status cuelab_gp_append(cuelab_gp* gp, double prev_cadence, double cue, double next_cadence) {
    if (!gp) return null_arg("gp");
    return guarded([&] { gp->dataset.append(prev_cadence, cue, next_cadence); });
}

size_t cuelab_gp_size(const cuelab_gp* gp) { return gp ? gp->dataset.size() : 0; }

cuelab_status cuelab_gp_fit_basis(cuelab_gp* gp, double* beta) {
    if (!gp) return null_arg("gp");
    return guarded([&] {
        gp->hp = cuelab::gp::fit_basis(gp->dataset, gp->hp);
        if (beta) *beta = gp->hp.basis_coefficient;
    });
}

cuelab_status cuelab_gp_predict(const cuelab_gp* gp, double prev_cadence, double cue, double* mean, double* variance) {
    if (!gp) return null_arg("gp");
    return guarded([&] {
        const auto p = cuelab::gp::predict(gp->dataset, gp->hp, {prev_cadence, cue});
        if (mean) *mean = p.mean;
        if (variance) *variance = p.variance;
    });
}

cuelab_status cuelab_gp_params_get(const cuelab_gp* gp, cuelab_gp_params* out) {
    if (!gp) return null_arg("gp");
    if (!out) return null_arg("out");
    *out = to_c(gp->hp);
    return CUELAB_OK;
}

cuelab_status cuelab_gp_save_csv(const cuelab_gp* gp, const char* path) {
    if (!gp) return null_arg("gp");
    if (!path) return null_arg("path");
    return guarded([&] { cuelab::gp::save_csv(gp->dataset, path); });
}

cuelab_status cuelab_gp_load_csv(const char* path, const cuelab_gp_params* params, cuelab_gp** out) {
    if (!path) return null_arg("path");
    if (!out) return null_arg("out");
    return guarded([&] {
        auto hp = params ? from_c(*params) : cuelab::gp::GpHyperparams{};
        hp.validate();
        *out = new cuelab_gp{cuelab::gp::load_csv(path), hp};
    });
}

cuelab_status cuelab_select_cue(const cuelab_gp* gp, double current_cadence, double target, double baseline,
                                uint64_t seed, cuelab_cue_decision* out) {
    if (!out) return null_arg("out");
    return guarded([&] {
        const auto bounds = cuelab::opt::CueBounds::from_baseline(baseline);
        const auto d = gp ? cuelab::opt::select_cue(gp->dataset, gp->hp, current_cadence, target, bounds, seed)
                          : cuelab::opt::select_cue(nullptr, current_cadence, target, bounds, seed);
        *out = {d.cue, d.phase_label == cuelab::opt::PhaseLabel::converged ? 1 : 0, d.objective_value, d.iterations};
    });
}

cuelab_status cuelab_gate(double current_cadence, double target, int* needs_cue) {
    if (!needs_cue) return null_arg("needs_cue");
    return guarded([&] { *needs_cue = cuelab::strategy::gate(current_cadence, target) ? 1 : 0; });
}

cuelab_status cuelab_trial_metrics_from_file(const char* log_path, cuelab_trial_metrics* out) {
    if (!log_path) return null_arg("log_path");
    if (!out) return null_arg("out");
    return guarded([&] { *out = to_c(cuelab::io::load_trial(log_path)); });
}

cuelab_status cuelab_experiment_default(cuelab_experiment** out) {
    if (!out) return null_arg("out");
    return guarded([&] { *out = new cuelab_experiment{}; });
}

cuelab_status cuelab_experiment_load(const char* config_path, cuelab_experiment** out) {
    if (!config_path) return null_arg("config_path");
    if (!out) return null_arg("out");
    return guarded([&] { *out = new cuelab_experiment{cuelab::config::load(config_path)}; });
}

void cuelab_experiment_destroy(cuelab_experiment* exp) { delete exp; }

cuelab_status cuelab_experiment_set_persona(cuelab_experiment* exp, const char* persona) {
    if (!exp) return null_arg("exp");
    if (!persona) return null_arg("persona");
    return guarded([&] { exp->config.walker = cuelab::walker::persona(persona); });
}

cuelab_status cuelab_experiment_set_seeds(cuelab_experiment* exp, const uint64_t* seeds, size_t count) {
    if (!exp) return null_arg("exp");
    if (!seeds && count > 0) return null_arg("seeds");
    return guarded([&] {
        if (count == 0) throw cuelab::config_error("at least one seed required");
        exp->config.protocol.seeds.assign(seeds, seeds + count);
    });
}

cuelab_status cuelab_experiment_set_threads(cuelab_experiment* exp, int threads) {
    if (!exp) return null_arg("exp");
    return guarded([&] {
        if (threads < 1) throw cuelab::config_error("threads must be >= 1");
        exp->config.protocol.threads = threads;
    });
}

cuelab_status cuelab_experiment_run(const cuelab_experiment* exp, const char* out_dir, cuelab_run_summary* out) {
    if (!exp) return null_arg("exp");
    if (!out_dir) return null_arg("out_dir");
    return guarded([&] {
        const auto result = cuelab::runner::run_suite(exp->config, std::filesystem::path(out_dir));
        for (const auto& f : result.failures) {
            last_warnings += "seed " + std::to_string(f.seed) + " " + f.condition + ": " + f.message + "\n";
        }
        if (out) *out = to_c(result);
    });
}

cuelab_status cuelab_experiment_report(const char* logs_dir, const char* out_dir, cuelab_run_summary* out) {
    if (!logs_dir) return null_arg("logs_dir");
    return guarded([&] {
        std::optional<std::filesystem::path> dest;
        if (out_dir) dest = std::filesystem::path(out_dir);
        const auto result = cuelab::runner::report_from_logs(logs_dir, dest);
        if (out) *out = to_c(result);
    });
}

cuelab_status cuelab_simulate(const cuelab_experiment* exp, const char* strategy, const char* direction, uint64_t seed,
                              const char* log_path, cuelab_simulation* out) {
    if (!exp) return null_arg("exp");
    if (!strategy) return null_arg("strategy");
    if (!direction) return null_arg("direction");
    return guarded([&] {
        const auto& cfg = exp->config;
        cuelab::strategy::StrategyKind kind{cuelab::strategy::parse_kind(strategy), 0.5};
        for (const auto& s : cfg.strategies) {
            if (s.kind == cuelab::strategy::Kind::proportional) kind.p_gain = s.p_gain;
        }
        const auto dir = cuelab::metrics::parse_direction(direction);
        const double baseline = cuelab::runner::run_control(cfg, seed);
        const auto record = cuelab::runner::run_condition(cfg, kind, dir, baseline, seed);
        if (log_path) cuelab::io::save_trial(record, log_path);
        if (out) {
            out->baseline = baseline;
            out->target = record.target;
            out->metrics = to_c(record);
            out->exploration_cues = 0;
            out->converged_cues = 0;
            for (const auto& c : record.cues) {
                if (c.label == cuelab::strategy::CueLabel::exploration) ++out->exploration_cues;
                if (c.label == cuelab::strategy::CueLabel::converged) ++out->converged_cues;
            }
        }
    });
}

cuelab_status cuelab_estimate_file(const char* input_path, double rate, const char* output_path,
                                   cuelab_estimate_summary* out) {
    if (!input_path) return null_arg("input_path");
    return guarded([&] {
        auto trace = cuelab::io::load_trace(input_path, rate);
        std::string warnings;
        for (const auto& w : trace.warnings) warnings += w + "\n";

        bool uniform = true;
        for (size_t i = 1; i < trace.size() && uniform; ++i) {
            const double gap = trace.timestamps[i] - trace.timestamps[i - 1];
            uniform = std::abs(gap * rate - 1.0) < 1e-6;
        }
        if (!uniform) trace = cuelab::io::resample(trace, rate);

        cuelab::cds::CdsConfig cfg;
        cfg.sample_period = 1.0 / rate;
        cuelab::cds::Estimator est(cfg);

        std::ofstream file;
        const bool to_stdout = output_path == nullptr || std::strcmp(output_path, "-") == 0;
        if (!to_stdout) {
            file.open(output_path);
            if (!file) throw cuelab::io_error(std::string("cannot open ") + output_path + " for writing");
        }
        std::ostream& os = to_stdout ? std::cout : file;
        using cuelab::detail::num;
        os << "t_s,cadence_hz,phase_rad,prediction,stride_count\n";
        for (size_t i = 0; i < trace.size(); ++i) {
            est.push(trace.values[i]);
            const auto& s = est.state();
            os << num(trace.timestamps[i]) << ',' << num(est.cadence_hz()) << ',' << num(s.phase) << ','
               << num(s.last_prediction) << ',' << s.stride_count << '\n';
        }
        os.flush();
        if (out) *out = {trace.size(), est.cadence_hz(), est.state().stride_count, trace.warnings.size()};
        last_warnings = warnings;
    });
}

} // extern "C"
