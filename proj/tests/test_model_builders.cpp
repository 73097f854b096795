#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "migplan/evaluation.hpp"
#include "support/fixtures.hpp"
#include "support/tableau_oracle.hpp"

using namespace migplan;
using Catch::Matchers::WithinAbs;

namespace {

std::vector<double> zero_reserve(const PlanningProblem& p) {
    return std::vector<double>(p.years * p.typical_days * p.hours, 0.0);
}

std::vector<double> reserve_of(const PlanningProblem& p, const NominalProfile& prof) {
    return resolve_reserve(p, prof.load_factor);
}

double solve_det_objective(const PlanningProblem& p, const std::vector<double>& traj,
                           const NominalProfile& prof) {
    auto model = build_deterministic(p, traj, prof);
    auto sol = milp::solve_mip(model, 1e-8);
    REQUIRE(sol.status == milp::SolveStatus::Optimal);
    return sol.objective;
}

// Independent IGD oracle: bisection on the deterministic model. V(alpha) is
// nondecreasing, so the largest alpha with V(alpha) <= cap is well defined.
double igd_bisection_oracle(const PlanningProblem& p, const NominalProfile& prof, double lambda0,
                            double alpha_cap = 1.0) {
    double cap = (1.0 + p.deviation_factor) * lambda0;
    auto feasible = [&](double a) {
        EnvelopeBound b{a, p.demand_forecast};
        auto traj = worst_case_trajectory(b);
        auto model = build_deterministic(p, traj, prof);
        auto sol = milp::solve_mip(model, 1e-9);
        return sol.status == milp::SolveStatus::Optimal && sol.objective <= cap + 1e-7;
    };
    if (!feasible(0.0)) return -1.0;
    double lo = 0.0, hi = alpha_cap;
    if (feasible(hi)) return hi;
    for (int i = 0; i < 26; ++i) {
        double mid = 0.5 * (lo + hi);
        (feasible(mid) ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace

TEST_CASE("deterministic model: closed-form single-DFG instance") {
    PlanningProblem p;
    p.years = 1;
    p.periods = {{1, 1}};
    p.typical_days = 1;
    p.hours = 2;
    p.discount_rate = 0.05;
    p.demand_forecast = {50.0};
    p.long_term_reserve = {5.0};
    p.annual_invest_cap = 1e9;
    p.curtailment_penalty = 5.0;
    p.dfg_min_ratio = 0.0;
    p.deviation_factor = 0.4;
    p.risk_tolerance = 0.0;
    p.short_term_reserve.fraction = 0.05;
    p.catalog = {fixtures::dfg("G1", 60, 5, 300, 20, 0.10, 3)};
    auto prof = fixtures::flat_profile(p, 0, 0, 1.0);

    // Adequacy forces X=1; dispatch runs the unit at 50 kW both hours.
    // Budget = (capital 18000 + O&M 1200 + fuel 365*2*0.10*50) / 1.05.
    double expected = (18000.0 + 1200.0 + 3650.0) / 1.05;
    auto model = build_deterministic(p, p.demand_forecast, prof);
    auto sol = milp::solve_mip(model, 1e-9);
    REQUIRE(sol.status == milp::SolveStatus::Optimal);
    REQUIRE_THAT(sol.objective, WithinAbs(expected, 1e-6 * expected));

    // Raising the curtailment penalty cannot make the optimum cheaper.
    p.curtailment_penalty = 50.0;
    auto model2 = build_deterministic(p, p.demand_forecast, prof);
    auto sol2 = milp::solve_mip(model2, 1e-9);
    REQUIRE(sol2.objective >= sol.objective - 1e-9);
}

TEST_CASE("deterministic model: null demand gives the empty plan") {
    auto p = fixtures::tiny_problem(3);
    p.demand_forecast.assign(p.years, 0.0);
    p.long_term_reserve.assign(p.years, 0.0);
    auto prof = fixtures::flat_profile(p, 0.4, 0.3, 1.0);
    auto model = build_deterministic(p, p.demand_forecast, prof);
    auto sol = milp::solve_mip(model, 1e-9);
    REQUIRE(sol.status == milp::SolveStatus::Optimal);
    REQUIRE_THAT(sol.objective, WithinAbs(0.0, 1e-9));
}

TEST_CASE("builder structure matches the closed-form counts") {
    for (int variant : {0, 1, 2, 3, 4}) {
        auto p = fixtures::tiny_problem(variant);
        auto prof = fixtures::flat_profile(p, 0.5, 0.4, 0.9);
        INFO("variant " << variant);
        int KP = static_cast<int>(p.catalog.size()) * p.num_periods();

        auto det = build_deterministic(p, p.demand_forecast, prof);
        REQUIRE(det.num_variables() == KP + dispatch_column_count(p));
        REQUIRE(det.num_constraints() ==
                investment_row_count(p) + adequacy_row_count(p) + dispatch_row_count(p));

        auto igd = build_igd(p, prof, 1000.0);
        REQUIRE(igd.num_variables() == KP + 1 + dispatch_column_count(p));
        REQUIRE(igd.num_constraints() ==
                investment_row_count(p) + adequacy_row_count(p) + dispatch_row_count(p) + 1);

        auto set = fixtures::scaled_set(p, {{0.9, 0.5}, {1.0, 0.4}}, {0.5, 0.5});
        auto mono =
            build_ccigd_monolithic(p, set, 1000.0, reserve_of(p, prof));
        REQUIRE(mono.num_variables() == KP + 1 + 2 + 2 * dispatch_column_count(p));
        REQUIRE(mono.num_constraints() == investment_row_count(p) + adequacy_row_count(p) +
                                              2 * dispatch_row_count(p) + 2 + 1);

        InvestmentPlan plan;
        plan.cumulative_units.assign(p.catalog.size(),
                                     std::vector<int>(p.years, 1));
        auto lp = build_dispatch_lp(p, plan, set.scenarios[0], 0.0, reserve_of(p, prof));
        REQUIRE(lp.num_variables() == dispatch_column_count(p));
        REQUIRE(lp.num_constraints() == dispatch_row_count(p));
        REQUIRE_FALSE(lp.has_integers());

        // The operational count follows the documented formula.
        int g = count_kind(p, DerKind::RES) + count_kind(p, DerKind::DFG);
        int s = count_kind(p, DerKind::ESS);
        int tdh = p.years * p.typical_days * p.hours;
        REQUIRE(operational_column_count(p) == (g + 3 * s + 1) * tdh);
    }
}

TEST_CASE("dispatch LP: zero load costs nothing") {
    auto p = fixtures::tiny_problem(2);  // min_output = 0
    InvestmentPlan plan;
    plan.cumulative_units = {{1, 1}, {1, 1}};
    auto s = fixtures::flat_scenario(p, 1, 1.0, 0.0, 0.0);
    auto model = build_dispatch_lp(p, plan, s, 0.0, zero_reserve(p));
    auto sol = milp::solve_lp(model);
    REQUIRE(sol.status == milp::SolveStatus::Optimal);
    REQUIRE_THAT(sol.objective, WithinAbs(0.0, 1e-9));
    for (double v : sol.primal) REQUIRE_THAT(v, WithinAbs(0.0, 1e-7));
}

TEST_CASE("dispatch LP: no generation means full curtailment at the penalty rate") {
    auto p = fixtures::tiny_problem(1);  // G1 + W1
    InvestmentPlan plan;
    plan.cumulative_units = {{0, 0}, {2, 2}};  // wind only
    double alpha = 0.05, load = 0.9;
    auto s = fixtures::flat_scenario(p, 1, 1.0, 0.0, load);  // wind unavailable
    auto model = build_dispatch_lp(p, plan, s, alpha, zero_reserve(p));
    auto sol = milp::solve_lp(model);
    REQUIRE(sol.status == milp::SolveStatus::Optimal);
    double expected = 0.0;
    for (int t = 1; t <= p.years; ++t)
        expected += p.curtailment_penalty * (365.0 / p.typical_days) *
                    present_value_factor(p, t) * (1 + alpha) * p.demand_forecast[t - 1] * load *
                    p.hours;
    REQUIRE_THAT(sol.objective, WithinAbs(expected, 1e-6 * expected));
}

TEST_CASE("dispatch LP agrees with the dense-tableau oracle") {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int variant : {0, 1, 2}) {
        auto p = fixtures::tiny_problem(variant);
        InvestmentPlan plan;
        plan.cumulative_units.assign(p.catalog.size(), std::vector<int>(p.years, 0));
        for (std::size_t k = 0; k < p.catalog.size(); ++k) {
            // Period-constant, monotone; DFGs at their limit so the reserve
            // rows stay satisfiable.
            bool is_dfg = p.catalog[k].kind == DerKind::DFG;
            for (int t = 1; t <= p.years; ++t) {
                int period = p.period_of_year(t);
                int units = is_dfg ? p.catalog[k].install_limit
                                   : std::min(p.catalog[k].install_limit, 1 + period);
                plan.cumulative_units[k][t - 1] = units;
            }
        }
        auto scen = fixtures::flat_scenario(p, 1, 1.0, unit(rng), 0.5 + 0.5 * unit(rng));
        auto prof = fixtures::flat_profile(p, 0.5, 0.5, 0.9);
        auto model = build_dispatch_lp(p, plan, scen, 0.1, reserve_of(p, prof));
        auto mine = milp::solve_lp(model);
        auto ref = oracle::solve(model);
        REQUIRE(mine.status == milp::SolveStatus::Optimal);
        REQUIRE(ref.status == oracle::Status::Optimal);
        REQUIRE(std::abs(mine.objective - ref.objective) <=
                1e-6 * std::max(1.0, std::abs(ref.objective)));
    }
}

TEST_CASE("dispatch cost is nonincreasing in the plan when min output is zero") {
    auto p = fixtures::tiny_problem(2);
    auto scen = fixtures::flat_scenario(p, 1, 1.0, 0.0, 1.0);
    auto reserve = zero_reserve(p);
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 6; ++trial) {
        InvestmentPlan small, big;
        small.cumulative_units.assign(p.catalog.size(), std::vector<int>(p.years, 0));
        big = small;
        for (std::size_t k = 0; k < p.catalog.size(); ++k)
            for (int t = 0; t < p.years; ++t) {
                int base = static_cast<int>(rng() % 2);
                int extra = static_cast<int>(rng() % 2);
                int lim = p.catalog[k].install_limit;
                // period-constant, monotone plans
                int year1 = p.periods[p.period_of_year(t + 1)].first;
                if (t + 1 != year1) {
                    small.cumulative_units[k][t] = small.cumulative_units[k][year1 - 1];
                    big.cumulative_units[k][t] = big.cumulative_units[k][year1 - 1];
                    continue;
                }
                int prev_small = t > 0 ? small.cumulative_units[k][t - 1] : 0;
                int prev_big = t > 0 ? big.cumulative_units[k][t - 1] : 0;
                small.cumulative_units[k][t] = std::min(lim, prev_small + base);
                big.cumulative_units[k][t] = std::min(lim, std::max(prev_big, prev_small + base) + extra);
            }
        auto m1 = build_dispatch_lp(p, small, scen, 0.0, reserve);
        auto m2 = build_dispatch_lp(p, big, scen, 0.0, reserve);
        double c1 = milp::solve_lp(m1).objective;
        double c2 = milp::solve_lp(m2).objective;
        REQUIRE(c2 <= c1 + 1e-7 * std::max(1.0, std::abs(c1)));
    }
}

TEST_CASE("IGD model: sigma=0 pins alpha at zero; bisection oracle agrees") {
    auto p = fixtures::tiny_problem(0);
    auto prof = fixtures::flat_profile(p, 0, 0, 1.0);
    double lambda0 = solve_det_objective(p, p.demand_forecast, prof);
    REQUIRE(lambda0 > 0);

    PlanningProblem p0 = p;
    p0.deviation_factor = 0.0;
    auto igd0 = build_igd(p0, prof, lambda0);
    auto sol0 = milp::solve_mip(igd0, 1e-9);
    REQUIRE(sol0.status == milp::SolveStatus::Optimal);
    REQUIRE(sol0.objective >= -1e-9);
    REQUIRE(sol0.objective <= 1e-5);

    for (int variant : {0, 1, 2}) {
        auto q = fixtures::tiny_problem(variant);
        auto qprof = fixtures::flat_profile(q, 0.45, 0.35, 0.9);
        double l0 = solve_det_objective(q, q.demand_forecast, qprof);
        auto igd = build_igd(q, qprof, l0);
        auto sol = milp::solve_mip(igd, 1e-9);
        REQUIRE(sol.status == milp::SolveStatus::Optimal);
        double oracle_alpha = igd_bisection_oracle(q, qprof, l0);
        INFO("variant " << variant << " igd " << sol.objective << " oracle " << oracle_alpha);
        REQUIRE_THAT(sol.objective, WithinAbs(oracle_alpha, 1e-4));
    }

    REQUIRE_THROWS_AS(build_igd(p, prof, 0.0), ValidationError);
}

TEST_CASE("monolithic CC-IGD: reduction to IGD with one nominal scenario") {
    for (int variant : {0, 2}) {
        auto p = fixtures::tiny_problem(variant);
        auto prof = fixtures::flat_profile(p, 0.45, 0.35, 0.9);
        double l0 = solve_det_objective(p, p.demand_forecast, prof);
        auto igd_sol = milp::solve_mip(build_igd(p, prof, l0), 1e-9);

        auto nominal = fixtures::flat_scenario(p, 1, 1.0, 0.45, 0.9);
        auto set = fixtures::make_set(p, {nominal});
        auto mono = build_ccigd_monolithic(p, set, l0, reserve_of(p, prof));
        auto mono_sol = milp::solve_mip(mono, 1e-9);
        REQUIRE(mono_sol.status == milp::SolveStatus::Optimal);
        INFO("variant " << variant);
        REQUIRE_THAT(mono_sol.objective, WithinAbs(igd_sol.objective, 1e-6));
    }
}

TEST_CASE("monolithic CC-IGD: epsilon=0 against a dominating scenario") {
    auto p = fixtures::tiny_problem(1);
    // Budget room matters: scenarios lie above the nominal point, so a tight
    // cap would make even alpha = 0 unaffordable for integer plans.
    p.deviation_factor = 1.2;
    auto prof = fixtures::flat_profile(p, 0.45, 0.0, 0.9);
    double l0 = solve_det_objective(p, p.demand_forecast, prof);
    auto reserve = reserve_of(p, prof);

    // Scenario 2 dominates scenario 1 (more load, less wind), so the joint
    // optimum equals the single-scenario optimum of scenario 2.
    auto s1 = fixtures::flat_scenario(p, 1, 0.5, 0.5, 0.85);
    auto s2 = fixtures::flat_scenario(p, 2, 0.5, 0.4, 1.0);
    auto joint = fixtures::make_set(p, {s1, s2});
    auto only2 = fixtures::make_set(p, {fixtures::flat_scenario(p, 1, 1.0, 0.4, 1.0)});
    auto only1 = fixtures::make_set(p, {fixtures::flat_scenario(p, 1, 1.0, 0.5, 0.85)});

    auto a_joint = milp::solve_mip(build_ccigd_monolithic(p, joint, l0, reserve), 1e-9);
    auto a_2 = milp::solve_mip(build_ccigd_monolithic(p, only2, l0, reserve), 1e-9);
    auto a_1 = milp::solve_mip(build_ccigd_monolithic(p, only1, l0, reserve), 1e-9);
    REQUIRE(a_joint.status == milp::SolveStatus::Optimal);
    double single_min = std::min(a_1.objective, a_2.objective);
    REQUIRE(a_joint.objective <= single_min + 1e-7);
    REQUIRE_THAT(a_joint.objective, WithinAbs(a_2.objective, 1e-6));
}

TEST_CASE("monolithic CC-IGD: enumeration oracle at epsilon=0.34") {
    auto p = fixtures::tiny_problem(2);
    p.risk_tolerance = 0.34;
    auto prof = fixtures::flat_profile(p, 0.0, 0.0, 0.9);
    double l0 = solve_det_objective(p, p.demand_forecast, prof);
    auto reserve = reserve_of(p, prof);
    auto set = fixtures::scaled_set(p, {{0.85, 0.0}, {1.0, 0.0}, {1.15, 0.0}},
                                    {1.0 / 3, 1.0 / 3, 1.0 / 3});
    auto mono = milp::solve_mip(build_ccigd_monolithic(p, set, l0, reserve), 1e-9);
    REQUIRE(mono.status == milp::SolveStatus::Optimal);

    BendersOptions opt;
    opt.gap_tol = 1e-9;
    auto bf = brute_force_ccigd(p, set, l0, reserve, opt);
    REQUIRE(bf.feasible);
    REQUIRE_THAT(mono.objective, WithinAbs(bf.alpha, 1e-6));
    // One scenario may be discarded; dropping the heaviest load is optimal.
    REQUIRE(bf.z == std::vector<int>{0, 0, 1});
}

TEST_CASE("monolithic with z fixed equals the row-deleted restriction") {
    auto p = fixtures::tiny_problem(2);
    p.risk_tolerance = 0.5;
    auto prof = fixtures::flat_profile(p, 0.0, 0.0, 0.9);
    double l0 = solve_det_objective(p, p.demand_forecast, prof);
    auto reserve = reserve_of(p, prof);
    auto set = fixtures::scaled_set(p, {{0.9, 0.0}, {1.1, 0.0}}, {0.5, 0.5});

    for (unsigned mask = 0; mask < 4; ++mask) {
        std::vector<int> z = {static_cast<int>(mask & 1), static_cast<int>((mask >> 1) & 1)};
        double pmass = 0.5 * (z[0] + z[1]);
        if (pmass > p.risk_tolerance + 1e-12) continue;
        auto mono = build_ccigd_monolithic(p, set, l0, reserve);
        // Pin the indicator columns.
        for (int j = 0; j < mono.num_variables(); ++j) {
            if (mono.variables[j].name == "z[n1]") {
                mono.variables[j].lower = mono.variables[j].upper = z[0];
            } else if (mono.variables[j].name == "z[n2]") {
                mono.variables[j].lower = mono.variables[j].upper = z[1];
            }
        }
        auto fixed = milp::solve_mip(mono, 1e-9);
        auto restricted = milp::solve_mip(build_ccigd_restricted(p, set, z, l0, reserve), 1e-9);
        INFO("pattern " << z[0] << z[1]);
        REQUIRE(fixed.status == restricted.status);
        if (fixed.status == milp::SolveStatus::Optimal)
            REQUIRE_THAT(fixed.objective, WithinAbs(restricted.objective, 1e-6));
    }
}

TEST_CASE("monolithic big-M and mccormick variants agree") {
    auto p = fixtures::tiny_problem(3);
    p.risk_tolerance = 0.4;
    auto prof = fixtures::flat_profile(p, 0.45, 0.35, 0.9);
    double l0 = solve_det_objective(p, p.demand_forecast, prof);
    auto reserve = reserve_of(p, prof);
    auto set = fixtures::scaled_set(p, {{0.9, 0.5}, {1.05, 0.4}, {1.2, 0.3}},
                                    {0.4, 0.3, 0.3});
    BuildOptions bigm;
    BuildOptions mcc;
    mcc.linearization = BuildOptions::Linearization::McCormick;
    auto a = milp::solve_mip(build_ccigd_monolithic(p, set, l0, reserve, bigm), 1e-9);
    auto b = milp::solve_mip(build_ccigd_monolithic(p, set, l0, reserve, mcc), 1e-9);
    REQUIRE(a.status == milp::SolveStatus::Optimal);
    REQUIRE(b.status == milp::SolveStatus::Optimal);
    REQUIRE_THAT(a.objective, WithinAbs(b.objective, 1e-6));

    BuildOptions bad;
    bad.budget_big_m = {0.0, 1.0, 1.0};
    REQUIRE_THROWS_AS(build_ccigd_monolithic(p, set, l0, reserve, bad), ValidationError);
}
