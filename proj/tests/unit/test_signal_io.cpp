#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cuelab/signal_io.hpp"
#include "helpers.hpp"

using namespace cuelab;

namespace {

std::string trace_csv(double rate, int n, double f = 1.0) {
    std::ostringstream o;
    o.precision(17);
    o << "t_s,gyro_y\n";
    for (int i = 0; i < n; ++i) o << i / rate << ',' << std::sin(2 * std::numbers::pi * f * i / rate) << '\n';
    return o.str();
}

metrics::TrialRecord small_record() {
    metrics::TrialRecord r;
    r.target = 1.92;
    r.baseline = 1.6;
    r.strategy = {strategy::Kind::adaptive, 0.5};
    r.direction = metrics::Direction::up;
    r.seed = 17;
    for (int i = 0; i < 40; ++i) {
        const bool on = i >= 10 && i < 20;
        r.samples.push_back({i * 0.1 + 1.0 / 3.0, 1.6 + i * 1e-3 + 1e-13, on,
                             on ? std::optional<double>(1.8123456789012345) : std::nullopt});
    }
    metrics::CueEvent e;
    e.issued_at = 1.0 + 1.0 / 3.0;
    e.frequency = 1.8123456789012345;
    e.current_cadence = 1.61;
    e.label = strategy::CueLabel::exploration;
    r.cues.push_back(e);
    return r;
}

} // namespace

TEST_CASE("a clean 285 Hz trace loads without warnings") {
    std::istringstream in(trace_csv(285.0, 600));
    const auto t = io::read_trace(in, 285.0);
    CHECK(t.size() == 600);
    CHECK(t.warnings.empty());
    CHECK(t.nominal_rate == doctest::Approx(285.0));
}

TEST_CASE("a 280 Hz trace loads with a rate warning") {
    std::istringstream in(trace_csv(280.0, 600));
    const auto t = io::read_trace(in, 285.0);
    CHECK(t.size() == 600);
    CHECK_FALSE(t.warnings.empty());
}

TEST_CASE("a rate more than 5% off warns, gaps warn") {
    std::istringstream in(trace_csv(250.0, 600));
    CHECK_FALSE(io::read_trace(in, 285.0).warnings.empty());
    std::istringstream gap("t_s,gyro_y\n0,1\n0.0035,2\n0.007,3\n0.1,4\n0.1035,5\n");
    const auto t = io::read_trace(gap, 285.0);
    bool gap_warned = false;
    for (const auto& w : t.warnings) gap_warned = gap_warned || w.find("gap") != std::string::npos;
    CHECK(gap_warned);
}

TEST_CASE("malformed traces are input errors") {
    std::istringstream dup("t_s,gyro_y\n0,1\n0.1,2\n0.1,3\n");
    CHECK_ERROR_CODE(io::read_trace(dup, 285.0), ErrorCode::input);
    std::istringstream back("t_s,gyro_y\n0,1\n0.2,2\n0.1,3\n");
    CHECK_ERROR_CODE(io::read_trace(back, 285.0), ErrorCode::input);
    std::istringstream header("time,value\n0,1\n");
    CHECK_ERROR_CODE(io::read_trace(header, 285.0), ErrorCode::input);
    std::istringstream junk("t_s,gyro_y\n0,1\n0.1,abc\n");
    CHECK_ERROR_CODE(io::read_trace(junk, 285.0), ErrorCode::input);
    std::istringstream one("t_s,gyro_y\n0,1\n");
    CHECK_ERROR_CODE(io::read_trace(one, 285.0), ErrorCode::input);
    std::istringstream empty("");
    CHECK_ERROR_CODE(io::read_trace(empty, 285.0), ErrorCode::input);
    CHECK_ERROR_CODE(io::load_trace("/nonexistent/trace.csv", 285.0), ErrorCode::io);
}

TEST_CASE("trace write and read round trip") {
    std::istringstream in(trace_csv(285.0, 100, 1.3));
    const auto a = io::read_trace(in, 285.0);
    std::ostringstream out;
    io::write_trace(a, out);
    std::istringstream back(out.str());
    const auto b = io::read_trace(back, 285.0);
    CHECK(a.timestamps == b.timestamps);
    CHECK(a.values == b.values);
}

TEST_CASE("resampling at the native rate is the identity") {
    std::istringstream in(trace_csv(285.0, 300));
    const auto a = io::read_trace(in, 285.0);
    const auto b = io::resample(a, 285.0);
    REQUIRE(b.size() == a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(b.timestamps[i] == doctest::Approx(a.timestamps[i]));
        CHECK(b.values[i] == doctest::Approx(a.values[i]).epsilon(1e-9));
    }
}

TEST_CASE("resampling a sinusoid from 280 Hz to 285 Hz stays close") {
    std::istringstream in(trace_csv(280.0, 2800, 1.0));
    const auto r = io::resample(io::read_trace(in, 285.0), 285.0);
    CHECK(r.nominal_rate == 285.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        CHECK(r.timestamps[i] <= 2799.0 / 280.0 + 1e-12);
        worst = std::max(worst, std::abs(r.values[i] - std::sin(2 * std::numbers::pi * r.timestamps[i])));
    }
    // linear interpolation error bound: h^2 w^2 / 8
    CHECK(worst <= std::pow(1.0 / 280.0 * 2 * std::numbers::pi, 2) / 8 + 1e-12);
}

TEST_CASE("trial log and cue sidecar round trip exactly") {
    const auto r = small_record();
    const auto dir = testing::scratch_dir("signal_io");
    const auto path = dir / "trial.csv";
    io::save_trial(r, path);
    CHECK(std::filesystem::exists(io::cues_path_for(path)));
    const auto b = io::load_trial(path);
    REQUIRE(b.samples.size() == r.samples.size());
    for (std::size_t i = 0; i < r.samples.size(); ++i) {
        CHECK(b.samples[i].t == r.samples[i].t);
        CHECK(b.samples[i].est_cadence == r.samples[i].est_cadence);
        CHECK(b.samples[i].cue_active == r.samples[i].cue_active);
        CHECK(b.samples[i].cue_hz == r.samples[i].cue_hz);
    }
    CHECK(b.target == r.target);
    CHECK(b.baseline == r.baseline);
    CHECK(b.strategy.kind == r.strategy.kind);
    CHECK(b.direction == r.direction);
    CHECK(b.seed == r.seed);
    REQUIRE(b.cues.size() == 1);
    CHECK(b.cues[0].issued_at == r.cues[0].issued_at);
    CHECK(b.cues[0].frequency == r.cues[0].frequency);
    CHECK(b.cues[0].label == r.cues[0].label);
    CHECK(b.cues[0].beat_count == 8);
}

TEST_CASE("bad trial logs are rejected") {
    std::istringstream wrong("a,b\n1,2\n");
    CHECK_ERROR_CODE(io::read_trial(wrong), ErrorCode::input);
    std::ostringstream out;
    io::write_trial(small_record(), out);
    std::string text = out.str();
    text.replace(text.find(",1,1.81"), 3, ",7,");
    std::istringstream bad(text);
    CHECK_ERROR_CODE(io::read_trial(bad), ErrorCode::input);
    CHECK_ERROR_CODE(io::load_trial("/nonexistent/log.csv"), ErrorCode::io);
}
