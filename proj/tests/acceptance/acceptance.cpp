// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
//   cuelab_acceptance --cli <path to cuelab_cli> --workdir <scratch dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/core.h>

#include "cuelab/cds.hpp"
#include "cuelab/config.hpp"
#include "cuelab/gp.hpp"
#include "cuelab/metrics.hpp"
#include "cuelab/optimizer.hpp"
#include "cuelab/runner.hpp"
#include "cuelab/signal_io.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace cuelab;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o) {
    if (!o.pass) ++failures;
    std::cout << fmt::format("{} criterion {}: {} ({})", o.pass ? "PASS" : "FAIL", id, name, o.detail) << std::endl;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// 1 ---------------------------------------------------------------------------

Outcome cds_convergence() {
    const cds::CdsConfig cfg;
    bool pass = true;
    std::string detail;
    for (double f : {0.6, 1.0, 1.6, 2.0}) {
        const auto t0 = Clock::now();
        auto s = cds::initial_state(cfg);
        const auto n = static_cast<long>(std::llround(4.0 / f / cfg.sample_period));
        for (long i = 0; i < n; ++i) {
            // thigh gyroscope scale, deg/s
            s = cds::update(s, 120.0 * std::sin(2 * std::numbers::pi * f * i * cfg.sample_period), cfg);
        }
        const double elapsed = seconds_since(t0);
        const double err = std::abs(cds::cadence(s) - f) / f;
        pass = pass && err < 0.05 && elapsed < 1.0;
        detail += fmt::format("{}{:.1f} Hz err {:.3f} in {:.3f}s", detail.empty() ? "" : ", ", f, err, elapsed);
    }
    return {pass, detail};
}

// 2 ---------------------------------------------------------------------------

Outcome gp_oracle() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_mean = 0.0, worst_var = 0.0;
    bool nonneg = true, monotone = true;
    for (int ds = 0; ds < 100; ++ds) {
        gp::GpHyperparams hp;
        hp.length_scales = {0.1 + 0.5 * u(rng), 0.1 + 0.5 * u(rng)};
        hp.signal_variance = 0.01 + 0.1 * u(rng);
        hp.noise_variance = 0.001 + 0.01 * u(rng);
        const int k = 1 + static_cast<int>(199 * u(rng));
        gp::ResponseDataset d;
        for (int i = 0; i < k; ++i) {
            const double prev = 1.1 + 1.1 * u(rng);
            const double cue = u(rng) < 0.3 ? 0.0 : 1.0 + 1.3 * u(rng);
            d.append(prev, cue, prev + 0.3 * (cue > 0 ? cue - prev : 0.0) + 0.05 * (u(rng) - 0.5));
        }
        hp = gp::fit_basis(d, hp);
        const gp::GpPosterior model(d, hp);
        std::vector<oracle::Point> x;
        for (const auto& in : d.inputs()) x.push_back({in.prev_cadence, in.cue});
        const oracle::GpSpec spec{hp.length_scales[0], hp.length_scales[1], hp.signal_variance, hp.noise_variance,
                                  hp.jitter};
        const oracle::DenseGp dense(x, d.outputs(), spec, nullptr);
        worst_mean = std::max(worst_mean, std::abs(hp.basis_coefficient - static_cast<double>(dense.beta())) /
                                              std::abs(static_cast<double>(dense.beta())));

        // the previous dataset with the same basis, for the information check
        std::optional<gp::GpPosterior> smaller;
        if (k > 1) {
            gp::ResponseDataset d2;
            for (int i = 0; i + 1 < k; ++i) d2.append(d.inputs()[i].prev_cadence, d.inputs()[i].cue, d.outputs()[i]);
            smaller.emplace(d2, hp);
        }
        for (int q = 0; q < 6; ++q) {
            const gp::ResponseInput query = q < 2 ? d.inputs()[static_cast<std::size_t>(u(rng) * k) % k]
                                                  : gp::ResponseInput{1.1 + 1.1 * u(rng), q % 2 ? 0.0 : 1.0 + 1.3 * u(rng)};
            const auto p = model.predict(query);
            const double m_o = static_cast<double>(dense.mean({query.prev_cadence, query.cue}));
            const double v_o = static_cast<double>(dense.variance({query.prev_cadence, query.cue}));
            worst_mean = std::max(worst_mean, std::abs(p.mean - m_o) / std::max(std::abs(m_o), 1e-12));
            // relative, floored at 1e-6 of the prior variance
            worst_var = std::max(worst_var, std::abs(p.variance - v_o) / std::max(v_o, 1e-6 * hp.signal_variance));
            nonneg = nonneg && p.variance >= 0.0;
            if (smaller) monotone = monotone && p.variance <= smaller->predict(query).variance + 1e-12;
        }
    }
    const bool pass = worst_mean <= 1e-8 && worst_var <= 1e-8 && nonneg && monotone;
    return {pass, fmt::format("100 datasets, worst rel mean {:.2e}, worst rel var {:.2e}, nonneg {}, monotone {}",
                              worst_mean, worst_var, nonneg, monotone)};
}

// 3 ---------------------------------------------------------------------------

Outcome optimizer_grid(const runner::SuiteResult& suite) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int converged = 0;
    double worst_gap = -1e300;
    bool bounded = true;
    for (int m = 0; m < 50; ++m) {
        const double base = 1.3 + 0.6 * u(rng);
        const auto b = opt::CueBounds::from_baseline(base);
        gp::ResponseDataset d;
        const int n = 5 + static_cast<int>(80 * u(rng));
        const double slope = 0.1 + 0.9 * u(rng);
        const double wiggle = 0.1 * u(rng);
        for (int i = 0; i < n; ++i) {
            const double prev = base * (0.8 + 0.4 * u(rng));
            const double c = u(rng) < 0.2 ? 0.0 : b.lower + (b.upper - b.lower) * u(rng);
            const double eff = c > 0 ? c : base;
            d.append(prev, c, prev + slope * (eff - prev) + wiggle * std::sin(7 * eff) + 0.02 * (u(rng) - 0.5));
        }
        const auto hp = gp::fit_basis(d, {});
        const gp::GpPosterior model(d, hp);
        const double current = base * (0.85 + 0.3 * u(rng));
        const double target = base * (u(rng) < 0.5 ? 1.2 : 0.8);
        const auto dec = opt::select_cue(&model, current, target, b, 5000 + m);
        bounded = bounded && dec.cue >= b.lower && dec.cue <= b.upper;
        if (dec.phase_label != opt::PhaseLabel::converged) continue;
        ++converged;
        std::vector<oracle::Point> x;
        for (const auto& in : d.inputs()) x.push_back({in.prev_cadence, in.cue});
        const double beta = hp.basis_coefficient;
        const oracle::DenseGp dense(x, d.outputs(),
                                    {hp.length_scales[0], hp.length_scales[1], hp.signal_variance, hp.noise_variance,
                                     hp.jitter},
                                    &beta);
        worst_gap = std::max(worst_gap, dec.objective_value - oracle::grid_min(dense, current, target, b.lower, b.upper));
    }
    std::size_t suite_cues = 0;
    for (const auto& r : suite.records) {
        const auto b = opt::CueBounds::from_baseline(r.baseline);
        for (const auto& c : r.cues) {
            ++suite_cues;
            bounded = bounded && c.frequency >= b.lower && c.frequency <= b.upper;
        }
    }
    const bool pass = converged > 0 && worst_gap <= 1e-6 && bounded;
    return {pass, fmt::format("{}/50 converged, worst objective - grid min {:.2e} Hz^2, {} suite cues, bounds {}",
                              converged, worst_gap, suite_cues, bounded ? "respected" : "VIOLATED")};
}

// 4 ---------------------------------------------------------------------------

Outcome variance_drop(const runner::ExperimentConfig& cfg, const runner::SuiteResult& suite, double runtime) {
    std::vector<double> sum(6, 0.0);
    std::vector<int> count(6, 0);
    int trials = 0;
    for (const auto& r : suite.records) {
        if (r.strategy.kind != strategy::Kind::adaptive || r.dataset.size() < 6) continue;
        ++trials;
        const auto trace = gp::error_variance_trace(r.dataset, cfg.gp);
        for (std::size_t k = 0; k < 6; ++k) {
            sum[k] += trace[k].variance;
            ++count[k];
        }
    }
    if (trials == 0) return {false, "no adaptive trials"};
    std::vector<double> avg(6);
    for (std::size_t k = 0; k < 6; ++k) avg[k] = sum[k] / count[k];
    const double best = *std::min_element(avg.begin() + 1, avg.end());
    const double drop = 1.0 - best / avg[0];
    const bool pass = trials >= 20 && drop >= 0.5 && runtime < 300.0;
    return {pass, fmt::format("{} adaptive trials, variance k=0 {:.4f} -> min k<=5 {:.4f} (drop {:.0f}%), suite {:.0f}s",
                              trials, avg[0], best, 100 * drop, runtime)};
}

// 5 ---------------------------------------------------------------------------

Outcome strategy_ordering(const runner::SuiteResult& suite) {
    std::map<std::pair<std::string, metrics::Direction>, const metrics::GroupRow*> rows;
    for (const auto& r : suite.summary) rows[{r.group, r.direction}] = &r;
    bool pass = true;
    std::string detail;
    for (auto dir : {metrics::Direction::up, metrics::Direction::down}) {
        auto get = [&](const char* g) -> const metrics::GroupRow* {
            auto it = rows.find({g, dir});
            return it == rows.end() ? nullptr : it->second;
        };
        const auto *cvg = get("adaptive-cvg"), *fixed = get("fixed"), *prop = get("proportional"),
                   *exp = get("adaptive-exp");
        if (!cvg || !fixed || !prop || !exp) return {false, "missing summary rows"};
        const bool mae_order = cvg->target_mae.mean < fixed->target_mae.mean && fixed->target_mae.mean < prop->target_mae.mean;
        const bool on_order = exp->percent_on.mean > fixed->percent_on.mean;
        pass = pass && mae_order && on_order;
        detail += fmt::format("{}{} MAE cvg {:.4f} / fixed {:.4f} / prop {:.4f}, on exp {:.3f} / fixed {:.3f}",
                              detail.empty() ? "" : "; ", metrics::to_string(dir), cvg->target_mae.mean,
                              fixed->target_mae.mean, prop->target_mae.mean, exp->percent_on.mean,
                              fixed->percent_on.mean);
    }
    return {pass, detail};
}

// 6 ---------------------------------------------------------------------------

Outcome cue_distance(const runner::SuiteResult& suite) {
    // (seed, direction) -> strategy -> median distance
    std::map<std::pair<std::uint64_t, metrics::Direction>, std::map<strategy::Kind, double>> table;
    for (const auto& r : suite.records) {
        if (r.strategy.kind == strategy::Kind::control) continue;
        if (const auto m = metrics::median_cue_distance(r)) table[{r.seed, r.direction}][r.strategy.kind] = *m;
    }
    int ok = 0, total = 0;
    for (const auto& [key, per] : table) {
        ++total;
        const auto p = per.find(strategy::Kind::proportional);
        if (p == per.end()) continue;
        bool smallest = per.size() == 3;
        for (const auto& [kind, v] : per) {
            if (kind != strategy::Kind::proportional) smallest = smallest && p->second < v;
        }
        ok += smallest;
    }
    return {total == 40 && ok == total, fmt::format("proportional smallest in {}/{} seed x direction cells", ok, total)};
}

// 7 ---------------------------------------------------------------------------

Outcome metrics_oracles(const fs::path& out_dir) {
    std::vector<fs::path> logs;
    for (const auto& e : fs::directory_iterator(out_dir)) {
        const auto name = e.path().filename().string();
        if (name.rfind("trial_", 0) == 0 && name.find(".cues.") == std::string::npos) logs.push_back(e.path());
    }
    std::sort(logs.begin(), logs.end());
    double worst = 0.0;
    bool defined_ok = true;
    for (const auto& path : logs) {
        const auto rec = io::load_trial(path);
        const auto m = metrics::compute(rec);
        const auto o = oracle::metrics_from_log(path.string(), rec.cueing_end);
        auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
        worst = std::max(worst, rel(m.target_mae, o.target_mae));
        worst = std::max(worst, rel(m.percent_on, o.percent_on));
        defined_ok = defined_ok && m.intermediate_mae.has_value() == o.has_intermediate;
        if (m.intermediate_mae && o.has_intermediate) worst = std::max(worst, rel(*m.intermediate_mae, o.intermediate_mae));
    }

    double worst_rate = 0.0;
    for (double rate : {0.05, 0.1, 0.3}) {
        std::vector<double> t, c;
        for (int i = 0; i * (15.0 / 285.0) <= 60.0; ++i) {
            t.push_back(360.0 + i * (15.0 / 285.0));
            c.push_back(1.67 + 0.33 * std::exp(-rate * (t.back() - 360.0)));
        }
        const auto fit = metrics::fit_exponential_decay(t, c);
        worst_rate = std::max(worst_rate, std::abs(fit.rate - rate) / rate);
    }
    const bool pass = !logs.empty() && worst <= 1e-9 && defined_ok && worst_rate < 0.1;
    return {pass, fmt::format("{} logs, worst deviation {:.2e}; decay lambda worst rel error {:.2e}", logs.size(), worst,
                              worst_rate)};
}

// 8 ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome determinism(const std::string& cli, const fs::path& work) {
    runner::ExperimentConfig cfg;
    cfg.protocol.seeds = {3, 4};
    cfg.protocol.threads = 2;
    const auto cfg_path = work / "determinism.ini";
    std::ofstream(cfg_path) << config::render(cfg);
    for (const char* run : {"run_a", "run_b"}) {
        fs::remove_all(work / run);
        const std::string cmd = fmt::format("\"{}\" experiment run --config \"{}\" --out \"{}\" > \"{}\" 2>&1", cli,
                                            cfg_path.string(), (work / run).string(),
                                            (work / (std::string(run) + ".log")).string());
        if (std::system(cmd.c_str()) != 0) return {false, fmt::format("command failed: {}", cmd)};
    }
    const auto a = slurp(work / "run_a" / "metrics.csv");
    const auto b = slurp(work / "run_b" / "metrics.csv");
    const bool pass = !a.empty() && a == b;
    return {pass, fmt::format("metrics.csv {} bytes, {}", a.size(), a == b ? "identical" : "DIFFERENT")};
}

} // namespace

int main(int argc, char** argv) {
    std::string cli;
    fs::path work = fs::temp_directory_path() / "cuelab_acceptance";
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string flag = argv[i];
        if (flag == "--cli") {
            cli = argv[i + 1];
        } else if (flag == "--workdir") {
            work = argv[i + 1];
        } else {
            std::cerr << "unknown option " << flag << "\n";
            return 2;
        }
    }
    if (cli.empty()) {
        std::cerr << "usage: cuelab_acceptance --cli <cuelab_cli> [--workdir <dir>]\n";
        return 2;
    }
    fs::remove_all(work);
    fs::create_directories(work);

    try {
        report(1, "CDS converges within 4 periods", cds_convergence());
        report(2, "GP posterior matches the dense oracle", gp_oracle());

        runner::ExperimentConfig cfg;
        cfg.walker = walker::persona("baseline-puller");
        cfg.protocol.seeds.clear();
        for (std::uint64_t s = 1; s <= 20; ++s) cfg.protocol.seeds.push_back(s);
        cfg.protocol.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        const auto t0 = Clock::now();
        const auto suite = runner::run_suite(cfg, work / "suite");
        const double runtime = seconds_since(t0);
        if (!suite.failures.empty()) {
            std::cout << fmt::format("note: {} trials failed in the 20-seed suite", suite.failures.size()) << std::endl;
        }

        report(3, "optimizer matches grid search within bounds", optimizer_grid(suite));
        report(4, "posterior variance halves within 5 increments", variance_drop(cfg, suite, runtime));
        report(5, "strategy ordering on baseline-puller", strategy_ordering(suite));
        report(6, "proportional cue distance is smallest", cue_distance(suite));
        report(7, "metrics match brute-force oracles", metrics_oracles(work / "suite"));
        report(8, "experiment run is deterministic", determinism(cli, work));
    } catch (const std::exception& e) {
        std::cout << "FAIL acceptance aborted: " << e.what() << std::endl;
        return 1;
    }
    std::cout << fmt::format("{} of 8 criteria failed", failures) << std::endl;
    return failures == 0 ? 0 : 1;
}
