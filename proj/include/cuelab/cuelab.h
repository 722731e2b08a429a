/*
 * cuelab C API.
 *
 * Every object is an opaque handle created by a *_create / *_load function and
 * released by the matching *_destroy. Functions return a cuelab_status; on
 * failure cuelab_last_error() holds a message for the calling thread.
 * Frequencies are in Hz, times in seconds.
 */
#ifndef CUELAB_H
#define CUELAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CUELAB_BUILDING)
#    define CUELAB_API __declspec(dllexport)
#  else
#    define CUELAB_API __declspec(dllimport)
#  endif
#else
#  define CUELAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cuelab_status {
    CUELAB_OK = 0,
    CUELAB_ERR_INPUT = 1,
    CUELAB_ERR_CONFIG = 2,
    CUELAB_ERR_NUMERICAL = 3,
    CUELAB_ERR_IO = 4,
    CUELAB_ERR_INSUFFICIENT_DATA = 5,
    CUELAB_ERR_DIVERGENCE = 6,
    CUELAB_ERR_UNDEFINED = 7, /* metric has no defined value */
    CUELAB_ERR_NULL_ARG = 8,
    CUELAB_ERR_INTERNAL = 99
} cuelab_status;

CUELAB_API const char* cuelab_last_error(void);
/* Warnings raised by the last call on this thread, newline separated. */
CUELAB_API const char* cuelab_last_warnings(void);
CUELAB_API const char* cuelab_version(void);

/* ---- online gait estimator ------------------------------------------- */

typedef struct cuelab_cds_config {
    int harmonic_count;
    double freq_learn_rate;
    double coeff_learn_rate;
    double sample_period;     /* s */
    double initial_phase;     /* rad */
    double initial_frequency; /* rad/s */
} cuelab_cds_config;

typedef struct cuelab_cds_snapshot {
    double phase;      /* rad, [0, 2pi) */
    double frequency;  /* rad/s */
    double cadence_hz;
    double prediction;
    uint64_t stride_count;
} cuelab_cds_snapshot;

typedef struct cuelab_cds cuelab_cds;

CUELAB_API cuelab_cds_config cuelab_cds_default_config(void);
/* config may be NULL for the defaults. */
CUELAB_API cuelab_status cuelab_cds_create(const cuelab_cds_config* config, cuelab_cds** out);
CUELAB_API void cuelab_cds_destroy(cuelab_cds* cds);
/* stride_completed may be NULL. A non-finite sample is rejected and the state kept. */
CUELAB_API cuelab_status cuelab_cds_update(cuelab_cds* cds, double sample, int* stride_completed);
CUELAB_API cuelab_status cuelab_cds_snapshot_get(const cuelab_cds* cds, cuelab_cds_snapshot* out);
/* Copies up to capacity alpha (sin) and beta (cos) coefficients; count receives M+1. */
CUELAB_API cuelab_status cuelab_cds_coefficients(const cuelab_cds* cds, double* sin_coeffs, double* cos_coeffs,
                                                 size_t capacity, size_t* count);

/* ---- cue response model ---------------------------------------------- */

typedef struct cuelab_gp_params {
    double length_scale_cadence; /* Hz */
    double length_scale_cue;     /* Hz */
    double signal_variance;      /* Hz^2 */
    double noise_variance;       /* Hz^2 */
    double basis_coefficient;    /* Hz */
    double jitter;
} cuelab_gp_params;

typedef struct cuelab_gp cuelab_gp;

CUELAB_API cuelab_gp_params cuelab_gp_default_params(void);
/* params may be NULL for the defaults. */
CUELAB_API cuelab_status cuelab_gp_create(const cuelab_gp_params* params, cuelab_gp** out);
CUELAB_API void cuelab_gp_destroy(cuelab_gp* gp);
/* cue = 0 means no cue was playing. */
CUELAB_API cuelab_status cuelab_gp_append(cuelab_gp* gp, double prev_cadence, double cue, double next_cadence);
CUELAB_API size_t cuelab_gp_size(const cuelab_gp* gp);
/* GLS fit of the constant basis; stored in the handle and written to beta if non-NULL. */
CUELAB_API cuelab_status cuelab_gp_fit_basis(cuelab_gp* gp, double* beta);
CUELAB_API cuelab_status cuelab_gp_predict(const cuelab_gp* gp, double prev_cadence, double cue, double* mean,
                                           double* variance);
CUELAB_API cuelab_status cuelab_gp_params_get(const cuelab_gp* gp, cuelab_gp_params* out);
CUELAB_API cuelab_status cuelab_gp_save_csv(const cuelab_gp* gp, const char* path);
CUELAB_API cuelab_status cuelab_gp_load_csv(const char* path, const cuelab_gp_params* params, cuelab_gp** out);

/* ---- cue selection ----------------------------------------------------- */

typedef struct cuelab_cue_decision {
    double cue;       /* Hz, inside [0.65, 1.35] x baseline */
    int converged;    /* 0 = exploration draw, 1 = converged */
    double objective; /* Hz^2 */
    int iterations;
} cuelab_cue_decision;

/* gp may be NULL (no data yet). The basis is refitted before optimizing. */
CUELAB_API cuelab_status cuelab_select_cue(const cuelab_gp* gp, double current_cadence, double target,
                                           double baseline, uint64_t seed, cuelab_cue_decision* out);
/* needs_cue = 1 when |current - target| > 1% of target. */
CUELAB_API cuelab_status cuelab_gate(double current_cadence, double target, int* needs_cue);

/* ---- metrics ------------------------------------------------------------ */

typedef struct cuelab_trial_metrics {
    double target_mae;       /* Hz */
    double intermediate_mae; /* Hz, valid when intermediate_defined */
    int intermediate_defined;
    double decay_rate;       /* 1/s, valid when decay_defined */
    int decay_defined;
    double percent_on;       /* fraction of the cueing window */
    size_t cue_count;
} cuelab_trial_metrics;

CUELAB_API cuelab_status cuelab_trial_metrics_from_file(const char* log_path, cuelab_trial_metrics* out);

/* ---- experiments -------------------------------------------------------- */

typedef struct cuelab_experiment cuelab_experiment;

CUELAB_API cuelab_status cuelab_experiment_default(cuelab_experiment** out);
CUELAB_API cuelab_status cuelab_experiment_load(const char* config_path, cuelab_experiment** out);
CUELAB_API void cuelab_experiment_destroy(cuelab_experiment* exp);
CUELAB_API cuelab_status cuelab_experiment_set_persona(cuelab_experiment* exp, const char* persona);
CUELAB_API cuelab_status cuelab_experiment_set_seeds(cuelab_experiment* exp, const uint64_t* seeds, size_t count);
CUELAB_API cuelab_status cuelab_experiment_set_threads(cuelab_experiment* exp, int threads);

typedef struct cuelab_run_summary {
    size_t trials;
    size_t failures;
    size_t summary_rows;
} cuelab_run_summary;

/* Control + 6 conditions per seed; writes trial logs, metrics.csv, summary.csv,
 * summary.json and run.json into out_dir. Failed trials are counted, not fatal. */
CUELAB_API cuelab_status cuelab_experiment_run(const cuelab_experiment* exp, const char* out_dir,
                                               cuelab_run_summary* out);
/* Rebuilds metrics.csv / summary.csv / summary.json from trial logs; out_dir NULL = logs_dir. */
CUELAB_API cuelab_status cuelab_experiment_report(const char* logs_dir, const char* out_dir, cuelab_run_summary* out);

typedef struct cuelab_simulation {
    double baseline; /* Hz, from the control session */
    double target;   /* Hz */
    cuelab_trial_metrics metrics;
    size_t exploration_cues;
    size_t converged_cues;
} cuelab_simulation;

/* One control session plus one condition. strategy: control|fixed|proportional|adaptive,
 * direction: up|down. log_path may be NULL; otherwise the trial log is written there. */
CUELAB_API cuelab_status cuelab_simulate(const cuelab_experiment* exp, const char* strategy, const char* direction,
                                         uint64_t seed, const char* log_path, cuelab_simulation* out);

typedef struct cuelab_estimate_summary {
    size_t samples;
    double final_cadence_hz;
    uint64_t strides;
    size_t warnings;
} cuelab_estimate_summary;

/* Runs the estimator over a (t_s, gyro_y) CSV, resampled to rate if the input is
 * not uniform at that rate, and writes t_s,cadence_hz,phase_rad,prediction,stride_count
 * to output_path ("-" or NULL = stdout). */
CUELAB_API cuelab_status cuelab_estimate_file(const char* input_path, double rate, const char* output_path,
                                              cuelab_estimate_summary* out);

#ifdef __cplusplus
}
#endif

#endif /* CUELAB_H */
