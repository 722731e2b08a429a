// cuelab command line front end. Talks to the library only through the C API.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "cuelab/cuelab.h"

namespace {

// Exit codes: 0 success, 1 other failure, 2 config error, 3 numerical failure.
int exit_code(cuelab_status s) {
    switch (s) {
    case CUELAB_OK: return 0;
    case CUELAB_ERR_CONFIG: return 2;
    case CUELAB_ERR_NUMERICAL:
    case CUELAB_ERR_DIVERGENCE:
    case CUELAB_ERR_INSUFFICIENT_DATA: return 3;
    default: return 1;
    }
}

int fail(cuelab_status s) {
    std::cerr << "error: " << cuelab_last_error() << '\n';
    return exit_code(s);
}

void print_warnings() {
    const std::string w = cuelab_last_warnings();
    if (!w.empty()) std::cerr << "warning: " << w;
}

struct ExperimentDeleter {
    void operator()(cuelab_experiment* e) const { cuelab_experiment_destroy(e); }
};
using ExperimentPtr = std::unique_ptr<cuelab_experiment, ExperimentDeleter>;

void print_file(const std::string& path) {
    std::ifstream in(path);
    std::cout << in.rdbuf();
}

std::string format_optional(int defined, double value) { return defined ? std::to_string(value) : "NA"; }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cuelab: adaptive rhythmic cueing laboratory"};
    app.require_subcommand(1);

    auto* experiment = app.add_subcommand("experiment", "Run or report a full protocol suite");
    experiment->require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int threads = 0;
    auto* run = experiment->add_subcommand("run", "Control + 6 conditions per seed");
    run->add_option("--config", config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory")->required();
    run->add_option("--threads", threads, "Worker threads (overrides the config)");

    std::string logs_dir;
    std::string report_out;
    auto* report = experiment->add_subcommand("report", "Rebuild metric tables from trial logs");
    report->add_option("--logs", logs_dir, "Directory with trial_*.csv logs")->required()->check(CLI::ExistingDirectory);
    report->add_option("--out", report_out, "Where to write the tables (default: the logs directory)");

    std::string input_path;
    double rate = 285.0;
    std::string estimate_out = "-";
    auto* estimate = app.add_subcommand("estimate", "Offline cadence estimation over a gyroscope CSV (t_s,gyro_y)");
    estimate->add_option("--input", input_path, "Input CSV")->required()->check(CLI::ExistingFile);
    estimate->add_option("--rate", rate, "Sample rate in Hz")->check(CLI::PositiveNumber);
    estimate->add_option("--out", estimate_out, "Output CSV, '-' for stdout");

    std::string persona = "baseline-puller";
    std::string strategy = "adaptive";
    std::string direction = "up";
    std::uint64_t seed = 1;
    std::string sim_config;
    std::string sim_log;
    auto* simulate = app.add_subcommand("simulate", "Single control + condition run for inspection");
    simulate->add_option("--persona", persona, "compliant | baseline-puller | inconsistent");
    simulate->add_option("--strategy", strategy, "control | fixed | proportional | adaptive");
    simulate->add_option("--direction", direction, "up | down");
    simulate->add_option("--seed", seed, "Walker seed");
    simulate->add_option("--config", sim_config, "Optional config file")->check(CLI::ExistingFile);
    simulate->add_option("--log", sim_log, "Write the trial log here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    if (run->parsed()) {
        cuelab_experiment* raw = nullptr;
        if (auto s = cuelab_experiment_load(config_path.c_str(), &raw); s != CUELAB_OK) return fail(s);
        ExperimentPtr exp(raw);
        if (threads > 0) {
            if (auto s = cuelab_experiment_set_threads(exp.get(), threads); s != CUELAB_OK) return fail(s);
        }
        cuelab_run_summary summary{};
        if (auto s = cuelab_experiment_run(exp.get(), out_dir.c_str(), &summary); s != CUELAB_OK) return fail(s);
        print_warnings();
        std::cout << "trials: " << summary.trials << "  failures: " << summary.failures << "  summary rows: "
                  << summary.summary_rows << '\n';
        print_file(out_dir + "/summary.csv");
        return summary.failures == 0 ? 0 : 3;
    }

    if (report->parsed()) {
        cuelab_run_summary summary{};
        const char* dest = report_out.empty() ? nullptr : report_out.c_str();
        if (auto s = cuelab_experiment_report(logs_dir.c_str(), dest, &summary); s != CUELAB_OK) return fail(s);
        print_file((report_out.empty() ? logs_dir : report_out) + "/summary.csv");
        return 0;
    }

    if (estimate->parsed()) {
        cuelab_estimate_summary summary{};
        if (auto s = cuelab_estimate_file(input_path.c_str(), rate, estimate_out.c_str(), &summary); s != CUELAB_OK) {
            return fail(s);
        }
        print_warnings();
        std::cerr << "samples: " << summary.samples << "  strides: " << summary.strides
                  << "  final cadence: " << summary.final_cadence_hz << " Hz\n";
        return 0;
    }

    if (simulate->parsed()) {
        cuelab_experiment* raw = nullptr;
        auto s = sim_config.empty() ? cuelab_experiment_default(&raw) : cuelab_experiment_load(sim_config.c_str(), &raw);
        if (s != CUELAB_OK) return fail(s);
        ExperimentPtr exp(raw);
        if (sim_config.empty() || simulate->count("--persona") > 0) {
            if (s = cuelab_experiment_set_persona(exp.get(), persona.c_str()); s != CUELAB_OK) return fail(s);
        }
        cuelab_simulation sim{};
        const char* log = sim_log.empty() ? nullptr : sim_log.c_str();
        if (s = cuelab_simulate(exp.get(), strategy.c_str(), direction.c_str(), seed, log, &sim); s != CUELAB_OK) {
            return fail(s);
        }
        std::cout << "baseline_hz,target_hz,target_mae_hz,intermediate_mae_hz,decay_rate_per_s,percent_on,cues,"
                     "exploration_cues,converged_cues\n"
                  << sim.baseline << ',' << sim.target << ',' << sim.metrics.target_mae << ','
                  << format_optional(sim.metrics.intermediate_defined, sim.metrics.intermediate_mae) << ','
                  << format_optional(sim.metrics.decay_defined, sim.metrics.decay_rate) << ','
                  << sim.metrics.percent_on << ',' << sim.metrics.cue_count << ',' << sim.exploration_cues << ','
                  << sim.converged_cues << '\n';
        return 0;
    }
    return 1;
}
