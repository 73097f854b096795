#include <catch2/catch_amalgamated.hpp>

#include "migplan/data_model.hpp"
#include "support/fixtures.hpp"

using namespace migplan;
using Catch::Matchers::WithinAbs;

TEST_CASE("simple fixture loads with the full candidate catalog") {
    auto p = load_problem(fixtures::fixture_path("simple.json"));
    REQUIRE(p.catalog.size() == 6);  // WT, PV, DE, MT, ES1, ES2
    REQUIRE(p.years == 10);
    REQUIRE(p.num_periods() == 5);
    REQUIRE_THAT(p.discount_rate, WithinAbs(0.04, 1e-12));
    REQUIRE_THAT(p.demand_forecast[0], WithinAbs(450.0, 1e-9));
    REQUIRE_THAT(p.demand_forecast[1] / p.demand_forecast[0], WithinAbs(1.08, 1e-9));
    REQUIRE_THAT(p.curtailment_penalty, WithinAbs(5.0, 1e-12));
    REQUIRE(p.catalog[4].kind == DerKind::ESS);
    REQUIRE_THAT(p.catalog[4].unit_capital(), WithinAbs(270 * 90 + 150 * 150.0, 1e-9));
}

TEST_CASE("complex fixture has fifteen candidates") {
    auto p = load_problem(fixtures::fixture_path("complex.json"));
    REQUIRE(p.catalog.size() == 15);
    REQUIRE(p.years == 12);
    REQUIRE(p.num_periods() == 4);
    REQUIRE_THAT(p.demand_forecast[0], WithinAbs(1250.0, 1e-9));
}

TEST_CASE("zero install limit is rejected by name") {
    auto p = fixtures::tiny_problem(0);
    p.catalog[0].install_limit = 0;
    try {
        p.validate();
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        REQUIRE(std::string(e.what()).find("install_limit") != std::string::npos);
    }
}

TEST_CASE("malformed problem files fail cleanly") {
    REQUIRE_THROWS_AS(load_problem("/nonexistent/file.json"), IoError);
    auto p = fixtures::tiny_problem(0);
    p.periods = {{1, 2}};  // does not cover 1..1
    REQUIRE_THROWS_AS(p.validate(), ValidationError);
    auto q = fixtures::tiny_problem(1);
    q.risk_tolerance = 1.0;
    REQUIRE_THROWS_AS(q.validate(), ValidationError);
}

TEST_CASE("present value factor") {
    auto p = fixtures::tiny_problem(0);
    p.years = 10;
    p.periods = {{1, 10}};
    p.demand_forecast.assign(10, 100.0);
    p.long_term_reserve.assign(10, 10.0);
    p.discount_rate = 0.04;
    REQUIRE_THAT(present_value_factor(p, 1), WithinAbs(1.0 / 1.04, 1e-12));
    REQUIRE_THAT(present_value_factor(p, 10), WithinAbs(0.6755641688, 1e-9));
    p.discount_rate = 0.0;
    for (int t = 1; t <= 10; ++t) REQUIRE(present_value_factor(p, t) == 1.0);
    p.discount_rate = 0.07;
    for (int t = 2; t <= 10; ++t)
        REQUIRE(present_value_factor(p, t) < present_value_factor(p, t - 1));
    REQUIRE_THROWS_AS(present_value_factor(p, 0), ValidationError);
    REQUIRE_THROWS_AS(present_value_factor(p, 11), ValidationError);
}

TEST_CASE("envelope membership") {
    EnvelopeBound b;
    b.forecast = {450, 486, 525};
    b.horizon = 0.1;
    std::vector<double> boundary(3);
    for (int i = 0; i < 3; ++i) boundary[i] = 1.1 * b.forecast[i];
    REQUIRE(envelope_contains(b, boundary));

    b.horizon = 0.0;
    REQUIRE(envelope_contains(b, b.forecast));

    b.horizon = 0.05;
    std::vector<double> spike = b.forecast;
    spike[1] *= 1.06;
    REQUIRE_FALSE(envelope_contains(b, spike));

    REQUIRE_THROWS_AS(envelope_contains(b, {450, 486}), ValidationError);
    EnvelopeBound bad;
    bad.forecast = {450, 0, 525};
    bad.horizon = 0.1;
    REQUIRE_THROWS_AS(envelope_contains(bad, {450, 1, 525}), ValidationError);
}

TEST_CASE("worst-case trajectory") {
    EnvelopeBound b;
    b.forecast = {450.0};
    b.horizon = 0.1742;
    REQUIRE_THAT(worst_case_trajectory(b)[0], WithinAbs(528.39, 1e-9));

    b.horizon = 0.0;
    REQUIRE(worst_case_trajectory(b) == b.forecast);

    // Matches the peak at a 20% horizon on a constant forecast.
    EnvelopeBound c;
    c.forecast.assign(5, 900.0);
    c.horizon = 0.2;
    for (double v : worst_case_trajectory(c)) REQUIRE_THAT(v, WithinAbs(1080.0, 1e-9));

    // Pointwise nondecreasing in the horizon, and always inside the envelope.
    EnvelopeBound d;
    d.forecast = {450, 486, 525};
    std::vector<double> prev(3, 0.0);
    for (double a : {0.0, 0.05, 0.1, 0.5, 1.0}) {
        d.horizon = a;
        auto traj = worst_case_trajectory(d);
        REQUIRE(envelope_contains(d, traj));
        for (int i = 0; i < 3; ++i) {
            REQUIRE(traj[i] >= prev[i]);
            prev[i] = traj[i];
        }
    }
}

TEST_CASE("investment plan invariants") {
    auto p = fixtures::tiny_problem(1);  // T=2, two periods, G1 limit 4
    InvestmentPlan plan;
    plan.cumulative_units = {{2, 3}, {1, 1}};
    plan.validate(p);
    REQUIRE(plan.added(0, 1) == 2);
    REQUIRE(plan.added(0, 2) == 1);

    InvestmentPlan shrink;
    shrink.cumulative_units = {{2, 1}, {1, 1}};
    REQUIRE_THROWS_AS(shrink.validate(p), ValidationError);

    InvestmentPlan over;
    over.cumulative_units = {{2, 5}, {1, 1}};
    REQUIRE_THROWS_AS(over.validate(p), ValidationError);

    auto single = fixtures::tiny_problem(4);  // one period covering both years
    InvestmentPlan drift;
    drift.cumulative_units = {{1, 2}, {0, 0}};
    REQUIRE_THROWS_AS(drift.validate(single), ValidationError);
}
