#include "cuelab/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "cuelab/error.hpp"

namespace cuelab::metrics {

std::string_view to_string(Direction d) {
    switch (d) {
    case Direction::up: return "UP";
    case Direction::down: return "DOWN";
    case Direction::none: return "NONE";
    }
    return "?";
}

Direction parse_direction(std::string_view name) {
    if (name == "UP" || name == "up") return Direction::up;
    if (name == "DOWN" || name == "down") return Direction::down;
    if (name == "NONE" || name == "none") return Direction::none;
    throw input_error("unknown direction '" + std::string(name) + "'");
}

void TrialRecord::validate() const {
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (!(samples[i].t > samples[i - 1].t)) throw input_error("trial record: timestamps must strictly increase");
    }
    for (const auto& s : samples) {
        if (s.cue_active && s.t > cueing_end) throw input_error("trial record: cue active after the cueing window");
    }
    for (const auto& c : cues) {
        if (c.issued_at > cueing_end) throw input_error("trial record: cue issued after the cueing window");
    }
}

Window cueing_window(const TrialRecord& record) { return {0.0, record.cueing_end, true}; }

namespace {

void require_samples(const TrialRecord& record) {
    if (record.samples.empty()) throw input_error("trial record has no samples");
}

} // namespace

double target_mae(const TrialRecord& record) { return target_mae(record, cueing_window(record)); }

double target_mae(const TrialRecord& record, const Window& window) {
    require_samples(record);
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : record.samples) {
        if (!window.contains(s.t)) continue;
        sum += std::abs(s.est_cadence - record.target);
        ++n;
    }
    if (n == 0) throw input_error("trial record has no samples inside the window");
    return sum / static_cast<double>(n);
}

std::optional<double> intermediate_mae(const TrialRecord& record) {
    return intermediate_mae(record, cueing_window(record));
}

std::optional<double> intermediate_mae(const TrialRecord& record, const Window& window) {
    require_samples(record);
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : record.samples) {
        if (s.cue_active || !window.contains(s.t)) continue;
        sum += std::abs(s.est_cadence - record.target);
        ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

double percent_on(const TrialRecord& record) { return percent_on(record, cueing_window(record)); }

double percent_on(const TrialRecord& record, const Window& window) {
    require_samples(record);
    const auto& s = record.samples;
    double on = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s[i].cue_active) continue;
        double next = s[i].t;
        if (i + 1 < s.size()) {
            next = s[i + 1].t;
        } else if (i > 0) {
            next = s[i].t + (s[i].t - s[i - 1].t);
        }
        const double lo = std::max(s[i].t, window.start);
        const double hi = std::min(next, window.end);
        if (hi > lo) on += hi - lo;
    }
    return on / window.length();
}

namespace {

struct FitResult {
    double a, b, rate, sse;
};

double sse_of(const std::vector<double>& tau, const std::vector<double>& c, double a, double b, double rate) {
    double sse = 0.0;
    for (std::size_t i = 0; i < tau.size(); ++i) {
        const double r = a + b * std::exp(-rate * tau[i]) - c[i];
        sse += r * r;
    }
    return sse;
}

// Levenberg-Marquardt on (a, b, rate) with rate projected onto [0, inf).
FitResult levenberg_marquardt(const std::vector<double>& tau, const std::vector<double>& c, double a, double b,
                              double rate) {
    double sse = sse_of(tau, c, a, b, rate);
    double damping = 1e-3;
    for (int it = 0; it < 500; ++it) {
        Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
        Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
        for (std::size_t i = 0; i < tau.size(); ++i) {
            const double e = std::exp(-rate * tau[i]);
            const double r = a + b * e - c[i];
            const Eigen::Vector3d j(1.0, e, -b * tau[i] * e);
            jtj += j * j.transpose();
            jtr += j * r;
        }
        bool improved = false;
        for (int tries = 0; tries < 30; ++tries) {
            Eigen::Matrix3d lhs = jtj;
            for (int d = 0; d < 3; ++d) lhs(d, d) += damping * std::max(jtj(d, d), 1e-12);
            const Eigen::Vector3d delta = lhs.ldlt().solve(-jtr);
            if (!delta.allFinite()) {
                damping *= 10.0;
                continue;
            }
            const double na = a + delta(0);
            const double nb = b + delta(1);
            const double nrate = std::max(0.0, rate + delta(2));
            const double nsse = sse_of(tau, c, na, nb, nrate);
            if (nsse < sse) {
                const double rel = (sse - nsse) / std::max(sse, 1e-300);
                a = na;
                b = nb;
                rate = nrate;
                sse = nsse;
                damping = std::max(damping * 0.3, 1e-12);
                improved = true;
                if (rel < 1e-14) return {a, b, rate, sse};
                break;
            }
            damping *= 10.0;
        }
        if (!improved) break;
    }
    return {a, b, rate, sse};
}

} // namespace

DecayFit fit_exponential_decay(const std::vector<double>& t, const std::vector<double>& c) {
    if (t.size() != c.size()) throw input_error("decay fit: time and value lengths differ");
    if (t.size() < 10) throw input_error("decay fit: need at least 10 tail samples");

    std::vector<double> tau(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) tau[i] = t[i] - t.front();
    const double span = tau.back();

    const double a0 = c.back();
    const double b0 = c.front() - a0;
    FitResult best{a0, 0.0, 0.0, sse_of(tau, c, a0, 0.0, 0.0)};
    for (double rate0 : {0.01, 0.05, 0.2}) {
        const FitResult r = levenberg_marquardt(tau, c, a0, b0, rate0);
        if (r.sse < best.sse) best = r;
    }

    DecayFit fit;
    fit.tail_samples = t.size();
    fit.offset = best.a;
    fit.amplitude = best.b;
    fit.rate = best.rate;
    fit.residual_rms = std::sqrt(best.sse / static_cast<double>(t.size()));

    // no visible decay across the tail: report a flat fit
    const double visible = std::abs(best.b) * (1.0 - std::exp(-best.rate * span));
    if (visible < 1e-6 || best.rate == 0.0) {
        double mean = 0.0;
        for (double v : c) mean += v;
        mean /= static_cast<double>(c.size());
        fit.flat = true;
        fit.rate = 0.0;
        fit.amplitude = 0.0;
        fit.offset = mean;
        fit.residual_rms = std::sqrt(sse_of(tau, c, mean, 0.0, 0.0) / static_cast<double>(c.size()));
    }
    return fit;
}

std::optional<DecayFit> decay_rate(const TrialRecord& record) {
    require_samples(record);
    const auto& s = record.samples;
    std::size_t last_on = s.size();
    for (std::size_t i = s.size(); i-- > 0;) {
        if (s[i].cue_active) {
            last_on = i;
            break;
        }
    }
    if (last_on == s.size()) return std::nullopt;
    std::vector<double> t;
    std::vector<double> c;
    for (std::size_t i = last_on + 1; i < s.size(); ++i) {
        t.push_back(s[i].t);
        c.push_back(s[i].est_cadence);
    }
    if (t.size() < 10) return std::nullopt;
    return fit_exponential_decay(t, c);
}

std::optional<double> median_cue_distance(const TrialRecord& record) {
    if (record.cues.empty()) return std::nullopt;
    std::vector<double> d;
    d.reserve(record.cues.size());
    for (const auto& c : record.cues) d.push_back(std::abs(c.frequency - c.current_cadence));
    std::sort(d.begin(), d.end());
    const std::size_t n = d.size();
    return n % 2 == 1 ? d[n / 2] : 0.5 * (d[n / 2 - 1] + d[n / 2]);
}

TrialMetrics compute(const TrialRecord& record) {
    TrialMetrics m;
    m.target_mae = target_mae(record);
    m.intermediate_mae = intermediate_mae(record);
    if (const auto fit = decay_rate(record)) m.decay_rate = fit->rate;
    m.percent_on = percent_on(record);
    return m;
}

Summary summarize(const std::vector<std::optional<double>>& values) {
    Summary s;
    double sum = 0.0;
    for (const auto& v : values) {
        if (!v) continue;
        sum += *v;
        ++s.defined;
    }
    if (s.defined == 0) return s;
    s.mean = sum / static_cast<double>(s.defined);
    if (s.defined > 1) {
        double ss = 0.0;
        for (const auto& v : values) {
            if (v) ss += (*v - s.mean) * (*v - s.mean);
        }
        s.stddev = std::sqrt(ss / static_cast<double>(s.defined - 1));
    }
    return s;
}

namespace {

struct GroupSpec {
    const char* name;
    strategy::Kind kind;
    std::optional<Window> window; // adaptive split
};

} // namespace

std::vector<GroupRow> stratify(const std::vector<TrialRecord>& records) {
    std::vector<GroupRow> rows;
    for (const Direction dir : {Direction::up, Direction::down}) {
        const double split = opt::exploration_window_s;
        const std::array<GroupSpec, 4> specs{{
            {"fixed", strategy::Kind::fixed, std::nullopt},
            {"proportional", strategy::Kind::proportional, std::nullopt},
            {"adaptive-exp", strategy::Kind::adaptive, Window{0.0, split, false}},
            {"adaptive-cvg", strategy::Kind::adaptive, Window{split, 0.0, true}},
        }};
        for (const auto& spec : specs) {
            std::vector<std::optional<double>> mae, inter, decay, on;
            for (const auto& r : records) {
                if (r.direction != dir || r.strategy.kind != spec.kind) continue;
                Window w = cueing_window(r);
                const bool is_exp = spec.window && !spec.window->closed;
                if (spec.window) {
                    w = *spec.window;
                    if (!is_exp) w.end = r.cueing_end;
                }
                mae.push_back(target_mae(r, w));
                inter.push_back(intermediate_mae(r, w));
                on.push_back(percent_on(r, w));
                if (is_exp) {
                    decay.push_back(std::nullopt);
                } else {
                    const auto fit = decay_rate(r);
                    decay.push_back(fit ? std::optional<double>(fit->rate) : std::nullopt);
                }
            }
            if (mae.empty()) continue;
            GroupRow row;
            row.group = spec.name;
            row.direction = dir;
            row.records = mae.size();
            row.target_mae = summarize(mae);
            row.intermediate_mae = summarize(inter);
            row.decay_rate = summarize(decay);
            row.percent_on = summarize(on);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

} // namespace cuelab::metrics
