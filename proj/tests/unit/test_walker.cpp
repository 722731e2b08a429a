#include <cmath>

#include "cuelab/metrics.hpp"
#include "cuelab/walker.hpp"
#include "helpers.hpp"

using namespace cuelab;

namespace {

walker::WalkerParams quiet(double baseline, double gc, double gb) {
    walker::WalkerParams p;
    p.baseline_cadence = baseline;
    p.cue_follow_gain = gc;
    p.baseline_pull_gain = gb;
    p.memory_halflife = 0.0;
    return p;
}

} // namespace

TEST_CASE("silent decay matches the closed form") {
    const auto p = quiet(1.6, 1.0, 0.2);
    auto s = walker::initial_state(p);
    s.true_cadence = 2.0;
    std::mt19937_64 rng(1);
    const double dt = 1.0 / 285.0;
    for (int i = 1; i <= 285 * 10; ++i) {
        walker::step(s, p, std::nullopt, dt, rng);
        if (i % 285 == 0) {
            const double t = i * dt;
            CHECK(s.cadence() == doctest::Approx(1.6 + 0.4 * std::exp(-0.2 * t)).epsilon(1e-4));
        }
    }
}

TEST_CASE("an accepted cue pulls cadence toward it monotonically") {
    const auto p = quiet(1.6, 1.0, 0.1);
    auto s = walker::initial_state(p);
    std::mt19937_64 rng(2);
    REQUIRE(walker::begin_burst(s, p, rng));
    const double dt = 1.0 / 285.0;
    double prev = s.cadence();
    double reached = -1.0;
    for (int i = 1; i <= 285 * 5; ++i) {
        walker::step(s, p, 2.0, dt, rng);
        CHECK(s.cadence() > prev);
        prev = s.cadence();
        if (reached < 0 && std::abs(s.cadence() - 2.0) <= 0.05 * 0.4) reached = i * dt;
    }
    REQUIRE(reached > 0);
    CHECK(reached <= 3.0);
}

TEST_CASE("zero pull gain keeps cadence constant when silent") {
    const auto p = quiet(1.6, 1.0, 0.0);
    auto s = walker::initial_state(p);
    s.true_cadence = 1.9;
    std::mt19937_64 rng(3);
    for (int i = 0; i < 5000; ++i) walker::step(s, p, std::nullopt, 1.0 / 285.0, rng);
    CHECK(s.cadence() == 1.9);
}

TEST_CASE("a rejected burst leaves the walker on its baseline path") {
    auto p = quiet(1.6, 1.0, 0.0);
    p.follow_probability = 0.0;
    auto s = walker::initial_state(p);
    std::mt19937_64 rng(4);
    CHECK_FALSE(walker::begin_burst(s, p, rng));
    for (int i = 0; i < 1000; ++i) walker::step(s, p, 2.0, 1.0 / 285.0, rng);
    CHECK(s.cadence() == 1.6);
}

TEST_CASE("cue memory shifts the effective baseline with the half-life") {
    auto p = quiet(1.6, 1.0, 0.1);
    p.memory_halflife = 10.0;
    auto s = walker::initial_state(p);
    std::mt19937_64 rng(5);
    walker::begin_burst(s, p, rng);
    const double dt = 0.01;
    for (int i = 0; i < 100; ++i) walker::step(s, p, 2.0, dt, rng);
    walker::step(s, p, std::nullopt, dt, rng);
    REQUIRE(s.remembered_target);
    CHECK(*s.remembered_target == 2.0);
    const double start = s.memory_since;
    while (s.time < start + 10.0 - 1e-9) walker::step(s, p, std::nullopt, dt, rng);
    CHECK(walker::effective_baseline(s, p) == doctest::Approx(1.8).epsilon(1e-3));
}

TEST_CASE("the decay fit recovers the walker's pull gain") {
    const auto p = quiet(1.6, 1.0, 0.1);
    auto s = walker::initial_state(p);
    s.true_cadence = 2.0;
    std::mt19937_64 rng(6);
    std::vector<double> t, c;
    for (int i = 0; i < 285 * 40; ++i) {
        walker::step(s, p, std::nullopt, 1.0 / 285.0, rng);
        if (i % 15 == 0) {
            t.push_back(s.time);
            c.push_back(s.cadence());
        }
    }
    const auto fit = metrics::fit_exponential_decay(t, c);
    CHECK(fit.rate == doctest::Approx(0.1).epsilon(0.1));
}

TEST_CASE("OU noise has the configured stationary spread") {
    auto p = quiet(1.6, 1.0, 0.0);
    p.cadence_noise_std = 0.02;
    p.noise_correlation_time = 0.5;
    auto s = walker::initial_state(p);
    std::mt19937_64 rng(7);
    double sum = 0.0, sum2 = 0.0;
    int n = 0;
    for (int i = 0; i < 285 * 2000; ++i) {
        walker::step(s, p, std::nullopt, 1.0 / 285.0, rng);
        if (i % 285 == 0) {
            sum += s.noise;
            sum2 += s.noise * s.noise;
            ++n;
        }
    }
    const double mean = sum / n;
    CHECK(std::abs(mean) < 0.003);
    CHECK(std::sqrt(sum2 / n - mean * mean) == doctest::Approx(0.02).epsilon(0.1));
}

TEST_CASE("the emitted signal follows the gait phase") {
    const auto p = quiet(1.0, 1.0, 0.0);
    auto s = walker::initial_state(p);
    std::mt19937_64 rng(8);
    const double y = walker::step(s, p, std::nullopt, 0.25, rng);
    CHECK(s.true_phase == doctest::Approx(std::numbers::pi / 2));
    CHECK(y == doctest::Approx(walker::signal_at(p, s.true_phase)));
    CHECK(walker::signal_at(p, 0.0) == doctest::Approx(40.0 * std::sin(0.8) + 15.0 * std::sin(2.0)));
}

TEST_CASE("personas are distinct, valid, and unknown names fail") {
    const auto names = walker::persona_names();
    REQUIRE(names.size() == 3);
    std::vector<walker::WalkerParams> ps;
    for (const auto& n : names) {
        ps.push_back(walker::persona(n));
        CHECK_NOTHROW(ps.back().validate());
    }
    CHECK(ps[0].cue_follow_gain != ps[1].cue_follow_gain);
    CHECK(ps[0].baseline_pull_gain < ps[1].baseline_pull_gain);
    CHECK(ps[2].follow_probability < ps[0].follow_probability);
    CHECK_ERROR_CODE(walker::persona("sprinter"), ErrorCode::config);
    auto bad = ps[0];
    bad.follow_probability = 1.5;
    CHECK_ERROR_CODE(bad.validate(), ErrorCode::config);
}

TEST_CASE("participants are deterministic per seed and stay near the persona") {
    const auto p = walker::persona("compliant");
    const auto a = walker::participant(p, 11);
    CHECK(a.baseline_cadence == walker::participant(p, 11).baseline_cadence);
    CHECK(a.baseline_cadence != walker::participant(p, 12).baseline_cadence);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const double b = walker::participant(p, seed).baseline_cadence;
        CHECK(b >= 1.67 * 0.9 - 1e-12);
        CHECK(b <= 1.67 * 1.1 + 1e-12);
    }
}

TEST_CASE("simulation is deterministic given the rng seed") {
    const auto p = walker::persona("inconsistent");
    auto a = walker::initial_state(p), b = walker::initial_state(p);
    std::mt19937_64 ra(9), rb(9);
    walker::begin_burst(a, p, ra);
    walker::begin_burst(b, p, rb);
    for (int i = 0; i < 3000; ++i) {
        const std::optional<double> cue = (i / 500) % 2 ? std::optional<double>(1.9) : std::nullopt;
        CHECK(walker::step(a, p, cue, 1.0 / 285.0, ra) == walker::step(b, p, cue, 1.0 / 285.0, rb));
    }
    CHECK(a.cadence() == b.cadence());
}
