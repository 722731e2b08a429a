#include "cuelab/strategies.hpp"
#include "helpers.hpp"

using namespace cuelab;
using strategy::Kind;

namespace {

strategy::DecisionContext context(double current, double target, double baseline) {
    strategy::DecisionContext ctx;
    ctx.current_cadence = current;
    ctx.target = target;
    ctx.baseline = baseline;
    ctx.bounds = opt::CueBounds::from_baseline(baseline);
    ctx.seed = 1;
    ctx.time = 12.5;
    return ctx;
}

} // namespace

TEST_CASE("gate uses a closed 1% band") {
    CHECK_FALSE(strategy::gate(1.92, 1.92));
    CHECK_FALSE(strategy::gate(1.93, 1.92));   // 0.52% off
    CHECK(strategy::gate(1.94, 1.92));         // 1.04% off
    CHECK(strategy::gate(1.60, 1.92));
    CHECK_FALSE(strategy::gate(2.0 * 1.01 - 1e-12, 2.0));
    CHECK(strategy::gate(2.0 * 1.01 + 1e-9, 2.0));
    CHECK_FALSE(strategy::gate(0.99 * 2.0 + 1e-12, 2.0));
}

TEST_CASE("fixed cues play at the target") {
    const auto cmd = strategy::decide({Kind::fixed}, context(1.6, 1.92, 1.6));
    REQUIRE(cmd);
    CHECK(cmd->frequency == 1.92);
    CHECK(cmd->beat_count == 8);
    CHECK(cmd->label == strategy::CueLabel::fixed);
    CHECK(cmd->issued_at == 12.5);
    CHECK(cmd->duration() == doctest::Approx(8.0 / 1.92));
}

TEST_CASE("fixed target outside the bounds is a config error") {
    CHECK_ERROR_CODE(strategy::decide({Kind::fixed}, context(1.6, 2.5, 1.6)), ErrorCode::config);
}

TEST_CASE("proportional cue lies between current cadence and target") {
    for (double current : {1.2, 1.5, 1.7, 2.1}) {
        const double target = 1.92;
        const auto cmd = strategy::decide({Kind::proportional, 0.5}, context(current, target, 1.6));
        REQUIRE(cmd);
        CHECK(cmd->frequency == doctest::Approx(current + 0.5 * (target - current)));
        CHECK(cmd->frequency >= std::min(current, target));
        CHECK(cmd->frequency <= std::max(current, target));
        CHECK(cmd->label == strategy::CueLabel::proportional);
    }
    // clamped into the bounds
    const auto far = strategy::decide({Kind::proportional, 0.5}, context(3.5, 1.92, 1.6));
    CHECK(far->frequency == opt::CueBounds::from_baseline(1.6).upper);
}

TEST_CASE("adaptive without a model explores") {
    const auto cmd = strategy::decide({Kind::adaptive}, context(1.6, 1.92, 1.6));
    REQUIRE(cmd);
    CHECK(cmd->label == strategy::CueLabel::exploration);
    CHECK(opt::CueBounds::from_baseline(1.6).contains(cmd->frequency));
}

TEST_CASE("control never cues") {
    CHECK_FALSE(strategy::decide({Kind::control}, context(1.0, 1.92, 1.6)));
}

TEST_CASE("names round trip") {
    for (auto k : {Kind::control, Kind::fixed, Kind::proportional, Kind::adaptive}) {
        CHECK(strategy::parse_kind(strategy::to_string(k)) == k);
    }
    using strategy::CueLabel;
    for (auto l : {CueLabel::fixed, CueLabel::proportional, CueLabel::exploration, CueLabel::converged}) {
        CHECK(strategy::parse_cue_label(strategy::to_string(l)) == l);
    }
    CHECK_ERROR_CODE(strategy::parse_kind("random"), ErrorCode::input);
    strategy::StrategyKind bad{Kind::proportional, -0.1};
    CHECK_ERROR_CODE(bad.validate(), ErrorCode::config);
}
