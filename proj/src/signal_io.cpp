#include "cuelab/signal_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "cuelab/error.hpp"
#include "text.hpp"

namespace cuelab::io {

using detail::num;
using detail::parse_double;
using detail::split_csv_line;

SignalTrace read_trace(std::istream& in, double expected_rate) {
    if (!(expected_rate > 0.0)) throw input_error("expected rate must be > 0");
    std::string line;
    if (!std::getline(in, line)) throw input_error("trace: empty file");
    const auto header = split_csv_line(line);
    if (header.size() != 2 || header[0] != "t_s" || header[1] != "gyro_y") {
        throw input_error("trace: expected header 't_s,gyro_y'");
    }
    SignalTrace trace;
    trace.nominal_rate = expected_rate;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (detail::trim(line).empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 2) throw input_error("trace: row " + std::to_string(row) + " must have 2 columns");
        const double t = parse_double(f[0], "t_s");
        const double v = parse_double(f[1], "gyro_y");
        if (!std::isfinite(t) || !std::isfinite(v)) throw input_error("trace: non-finite value in row " + std::to_string(row));
        if (!trace.timestamps.empty() && !(t > trace.timestamps.back())) {
            throw input_error("trace: timestamps not strictly increasing at row " + std::to_string(row));
        }
        trace.timestamps.push_back(t);
        trace.values.push_back(v);
    }
    if (trace.size() < 2) throw input_error("trace: need at least two samples");

    const double span = trace.timestamps.back() - trace.timestamps.front();
    const double measured = static_cast<double>(trace.size() - 1) / span;
    // small mismatches are worth a note, large ones mean a wrong rate setting
    const double mismatch = std::abs(measured - expected_rate) / expected_rate;
    if (mismatch > 0.05) {
        trace.warnings.push_back("measured rate " + num(measured) + " Hz differs from expected " + num(expected_rate) +
                                 " Hz by more than 5%");
    } else if (mismatch > 0.01) {
        trace.warnings.push_back("measured rate " + num(measured) + " Hz differs from expected " + num(expected_rate) +
                                 " Hz");
    }
    const double max_gap = 3.0 / expected_rate;
    for (std::size_t i = 1; i < trace.size(); ++i) {
        const double gap = trace.timestamps[i] - trace.timestamps[i - 1];
        if (gap > max_gap) {
            trace.warnings.push_back("gap of " + num(gap) + " s before t=" + num(trace.timestamps[i]));
        }
    }
    return trace;
}

SignalTrace load_trace(const std::filesystem::path& path, double expected_rate) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path.string());
    return read_trace(in, expected_rate);
}

void write_trace(const SignalTrace& trace, std::ostream& out) {
    out << "t_s,gyro_y\n";
    for (std::size_t i = 0; i < trace.size(); ++i) out << num(trace.timestamps[i]) << ',' << num(trace.values[i]) << '\n';
}

SignalTrace resample(const SignalTrace& trace, double rate) {
    if (!(rate > 0.0)) throw input_error("resample: rate must be > 0");
    if (trace.size() < 2) throw input_error("resample: need at least two samples");
    SignalTrace out;
    out.nominal_rate = rate;
    const double t0 = trace.timestamps.front();
    const double t1 = trace.timestamps.back();
    const double dt = 1.0 / rate;
    const auto n = static_cast<std::size_t>(std::floor((t1 - t0) * rate + 1e-9)) + 1;
    out.timestamps.reserve(n);
    out.values.reserve(n);
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = std::min(t0 + static_cast<double>(i) * dt, t1);
        while (j + 2 < trace.size() && trace.timestamps[j + 1] <= t) ++j;
        const double ta = trace.timestamps[j];
        const double tb = trace.timestamps[j + 1];
        const double w = (t - ta) / (tb - ta);
        double v = trace.values[j] + w * (trace.values[j + 1] - trace.values[j]);
        if (w == 0.0) v = trace.values[j];
        if (w == 1.0) v = trace.values[j + 1];
        out.timestamps.push_back(t);
        out.values.push_back(v);
    }
    return out;
}

namespace {

const std::vector<std::string> trial_header{"t_s", "est_cadence_hz", "cue_active", "cue_hz", "strategy",
                                            "direction", "seed", "target_hz", "baseline_hz"};
const std::vector<std::string> cues_header{"issued_at_s", "cue_hz", "beat_count", "current_cadence_hz", "label"};

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += v[i];
    }
    return s;
}

std::string strategy_label(const strategy::StrategyKind& s) {
    std::string name(strategy::to_string(s.kind));
    if (s.kind == strategy::Kind::proportional) name += ":" + num(s.p_gain);
    return name;
}

strategy::StrategyKind parse_strategy_label(const std::string& text) {
    strategy::StrategyKind s;
    const auto colon = text.find(':');
    s.kind = strategy::parse_kind(text.substr(0, colon));
    if (colon != std::string::npos) s.p_gain = parse_double(text.substr(colon + 1), "p_gain");
    return s;
}

} // namespace

void write_trial(const metrics::TrialRecord& record, std::ostream& out) {
    out << join(trial_header) << '\n';
    const std::string strat = strategy_label(record.strategy);
    const std::string dir(metrics::to_string(record.direction));
    const std::string seed = std::to_string(record.seed);
    const std::string target = num(record.target);
    const std::string baseline = num(record.baseline);
    for (const auto& s : record.samples) {
        out << num(s.t) << ',' << num(s.est_cadence) << ',' << (s.cue_active ? 1 : 0) << ','
            << (s.cue_hz ? num(*s.cue_hz) : std::string()) << ',' << strat << ',' << dir << ',' << seed << ','
            << target << ',' << baseline << '\n';
    }
}

metrics::TrialRecord read_trial(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw input_error("trial log: empty file");
    if (split_csv_line(line) != trial_header) throw input_error("trial log: unexpected header '" + line + "'");
    metrics::TrialRecord r;
    bool first = true;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != trial_header.size()) throw input_error("trial log: wrong column count in '" + line + "'");
        metrics::TrialSample s;
        s.t = parse_double(f[0], "t_s");
        s.est_cadence = parse_double(f[1], "est_cadence_hz");
        if (f[2] != "0" && f[2] != "1") throw input_error("trial log: cue_active must be 0 or 1");
        s.cue_active = f[2] == "1";
        if (!f[3].empty()) s.cue_hz = parse_double(f[3], "cue_hz");
        if (first) {
            r.strategy = parse_strategy_label(f[4]);
            r.direction = metrics::parse_direction(f[5]);
            r.seed = static_cast<std::uint64_t>(detail::parse_int(f[6], "seed"));
            r.target = parse_double(f[7], "target_hz");
            r.baseline = parse_double(f[8], "baseline_hz");
            first = false;
        }
        r.samples.push_back(s);
    }
    if (r.samples.empty()) throw input_error("trial log: no samples");
    r.validate();
    return r;
}

void write_cues(const metrics::TrialRecord& record, std::ostream& out) {
    out << join(cues_header) << '\n';
    for (const auto& c : record.cues) {
        out << num(c.issued_at) << ',' << num(c.frequency) << ',' << c.beat_count << ',' << num(c.current_cadence)
            << ',' << strategy::to_string(c.label) << '\n';
    }
}

std::vector<metrics::CueEvent> read_cues(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw input_error("cue log: empty file");
    if (split_csv_line(line) != cues_header) throw input_error("cue log: unexpected header '" + line + "'");
    std::vector<metrics::CueEvent> cues;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != cues_header.size()) throw input_error("cue log: wrong column count in '" + line + "'");
        metrics::CueEvent c;
        c.issued_at = parse_double(f[0], "issued_at_s");
        c.frequency = parse_double(f[1], "cue_hz");
        c.beat_count = static_cast<int>(detail::parse_int(f[2], "beat_count"));
        c.current_cadence = parse_double(f[3], "current_cadence_hz");
        c.label = strategy::parse_cue_label(f[4]);
        cues.push_back(c);
    }
    return cues;
}

std::filesystem::path cues_path_for(const std::filesystem::path& log_path) {
    auto p = log_path;
    p.replace_extension(".cues.csv");
    return p;
}

void save_trial(const metrics::TrialRecord& record, const std::filesystem::path& log_path) {
    {
        std::ofstream out(log_path);
        if (!out) throw io_error("cannot open " + log_path.string() + " for writing");
        write_trial(record, out);
        if (!out) throw io_error("failed writing " + log_path.string());
    }
    std::ofstream cues(cues_path_for(log_path));
    if (!cues) throw io_error("cannot open cue log next to " + log_path.string());
    write_cues(record, cues);
}

metrics::TrialRecord load_trial(const std::filesystem::path& log_path) {
    std::ifstream in(log_path);
    if (!in) throw io_error("cannot open " + log_path.string());
    auto record = read_trial(in);
    const auto cues = cues_path_for(log_path);
    if (std::filesystem::exists(cues)) {
        std::ifstream cin(cues);
        record.cues = read_cues(cin);
    }
    return record;
}

} // namespace cuelab::io
