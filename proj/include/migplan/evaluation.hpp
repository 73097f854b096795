#pragma once

#include "migplan/benders.hpp"

namespace migplan {

struct EvaluationReport {
    std::string plan_id;
    double alpha = 0.0;
    std::string scenario_set_id;
    std::string weighting;  // "probability" or "uniform"
    std::vector<double> scenario_costs;
    double first_stage_cost = 0.0;
    double epb = 0.0;
    double violation_rate = 0.0;  // probability mass exceeding the cap; 0 without a cap
    double budget_cap = 0.0;      // 0 when no cap supplied
    double peak_demand_kw = 0.0;
    std::vector<std::string> warnings;
};

// Expected project budget of a plan under a scenario set, dispatching every
// scenario at demand (1+alpha)*forecast. Plan-shape violations are errors;
// adequacy at the inflated demand is only warned about, since foreign plans
// (solved at other alphas) are legitimate evaluation subjects.
inline EvaluationReport evaluate_epb(const PlanningProblem& problem, const InvestmentPlan& plan,
                                     double alpha, const ScenarioSet& scenarios,
                                     const std::vector<double>& reserve,
                                     std::optional<double> budget_cap = std::nullopt,
                                     const BendersOptions& options = {}) {
    problem.validate();
    plan.validate(problem);
    scenarios.validate();

    EvaluationReport rep;
    rep.alpha = alpha;
    rep.scenario_set_id = std::string(to_string(scenarios.provenance)) + "-seed" +
                          std::to_string(scenarios.seed) + "-n" + std::to_string(scenarios.size());

    for (int t = 1; t <= problem.years; ++t) {
        double psi = (1.0 + alpha) * problem.demand_forecast[t - 1];
        double cap_kw = 0.0, dfg_kw = 0.0, headroom = 0.0, inv = 0.0;
        for (std::size_t k = 0; k < problem.catalog.size(); ++k) {
            const auto& der = problem.catalog[k];
            double units = plan.at(static_cast<int>(k), t);
            cap_kw += der.rated_power * units;
            if (der.kind == DerKind::DFG) {
                dfg_kw += der.rated_power * units;
                headroom += (der.rated_power - der.min_output) * units;
            }
            inv += der.unit_capital() * plan.added(static_cast<int>(k), t);
        }
        if (cap_kw < psi + problem.long_term_reserve[t - 1] - 1e-6)
            rep.warnings.push_back("adequacy-peak short by " +
                                   std::to_string(psi + problem.long_term_reserve[t - 1] - cap_kw) +
                                   " kW in year " + std::to_string(t));
        if (dfg_kw < problem.dfg_min_ratio * psi - 1e-6)
            rep.warnings.push_back("adequacy-dfg short in year " + std::to_string(t));
        if (inv > problem.annual_invest_cap + 1e-6)
            rep.warnings.push_back("annual-invest-cap exceeded in year " + std::to_string(t));
        double worst_or = 0.0;
        int D = problem.typical_days, H = problem.hours;
        for (int d = 0; d < D; ++d)
            for (int h = 0; h < H; ++h)
                worst_or = std::max(worst_or, reserve[((t - 1) * D + d) * H + h]);
        if (headroom < worst_or - 1e-6)
            throw ValidationError("plan cannot satisfy the short-term reserve in year " +
                                  std::to_string(t) + "; dispatch would be infeasible");
    }

    const int N = scenarios.size();
    rep.scenario_costs.assign(N, 0.0);
    parallel_for(
        N,
        [&](std::size_t n) {
            rep.scenario_costs[n] =
                solve_sp1(problem, plan, alpha, scenarios.scenarios[n], reserve, options).cost;
        },
        options.threads);

    std::vector<double> x(problem.catalog.size() * problem.num_periods());
    for (std::size_t k = 0; k < problem.catalog.size(); ++k)
        for (int p = 0; p < problem.num_periods(); ++p)
            x[k * problem.num_periods() + p] =
                plan.at(static_cast<int>(k), problem.periods[p].first);
    rep.first_stage_cost = first_stage_cost_value(problem, x, options.build);

    bool weighted = scenarios.provenance == ScenarioProvenance::Reduced;
    rep.weighting = weighted ? "probability" : "uniform";
    double epb = rep.first_stage_cost;
    for (int n = 0; n < N; ++n) {
        double w = weighted ? scenarios.scenarios[n].probability : 1.0 / N;
        epb += w * rep.scenario_costs[n];
    }
    rep.epb = epb;
    if (budget_cap) {
        rep.budget_cap = *budget_cap;
        for (int n = 0; n < N; ++n)
            if (rep.first_stage_cost + rep.scenario_costs[n] > *budget_cap)
                rep.violation_rate += scenarios.scenarios[n].probability;
    }
    double peak = 0.0;
    for (double psi : problem.demand_forecast) peak = std::max(peak, psi);
    rep.peak_demand_kw = (1.0 + alpha) * peak;
    return rep;
}

// Restriction of the chance-constrained model to a fixed exemption pattern:
// exempt scenarios drop out entirely, kept ones are enforced in full.
inline milp::StandardFormModel build_ccigd_restricted(const PlanningProblem& problem,
                                                      const ScenarioSet& scenarios,
                                                      const std::vector<int>& z, double lambda0,
                                                      const std::vector<double>& reserve,
                                                      const BuildOptions& options = {}) {
    milp::StandardFormModel model;
    model.obj_sense = milp::ObjSense::Max;
    VariableIndex index(model);
    detail::Emitter em{model, index, problem, options};
    std::vector<double> xcost = first_stage_costs(problem, options);
    em.emit_x_columns(std::vector<double>(xcost.size(), 0.0));
    int alpha = index.add({VarRole::Alpha}, "alpha", 0.0, options.alpha_cap, false, 1.0);
    em.emit_investment_rows(reserve);
    em.emit_adequacy_rows(nullptr, alpha);
    double cap = (1.0 + problem.deviation_factor) * lambda0;
    for (int n = 0; n < scenarios.size(); ++n) {
        if (z[n]) continue;
        const Scenario& s = scenarios.scenarios[n];
        detail::DispatchConfig cfg;
        cfg.scenario_index = n;
        cfg.availability = &s.res_availability;
        cfg.load_factor = &s.load_factor;
        cfg.reserve = &reserve;
        cfg.alpha_col = alpha;
        detail::emit_dispatch(em, cfg);
        auto& budget = model.add_constraint("budget[" + detail::sub("n", n) + "]", "budget",
                                            milp::Sense::LE, cap);
        for (int k = 0; k < em.K(); ++k)
            for (int p = 0; p < em.P(); ++p) {
                double c = xcost[static_cast<std::size_t>(k) * em.P() + p];
                if (c != 0.0) budget.coeffs.emplace_back(index.at({VarRole::X, k, p}), c);
            }
        for (int j = 0; j < model.num_variables(); ++j) {
            if (model.objective[j] != 0.0 && j != alpha) {
                budget.coeffs.emplace_back(j, model.objective[j]);
                model.objective[j] = 0.0;
            }
        }
    }
    model.validate();
    return model;
}

struct BruteForceResult {
    bool feasible = false;
    double alpha = 0.0;
    std::vector<int> z;
};

// Reference solver: enumerate every admissible exemption pattern and keep the
// best restricted optimum. Pattern order (scenario 1 in the low bit) breaks
// ties, so results are reproducible.
inline BruteForceResult brute_force_ccigd(const PlanningProblem& problem,
                                          const ScenarioSet& scenarios, double lambda0,
                                          const std::vector<double>& reserve,
                                          const BendersOptions& options = {}) {
    const int N = scenarios.size();
    if (N > 12) throw ValidationError("brute_force_ccigd: enumeration capped at N <= 12");
    BruteForceResult best;
    for (unsigned mask = 0; mask < (1u << N); ++mask) {
        std::vector<int> z(N, 0);
        double pmass = 0.0;
        for (int n = 0; n < N; ++n)
            if (mask & (1u << n)) {
                z[n] = 1;
                pmass += scenarios.scenarios[n].probability;
            }
        if (pmass > problem.risk_tolerance + 1e-12) continue;
        auto model = build_ccigd_restricted(problem, scenarios, z, lambda0, reserve, options.build);
        milp::MipOptions mip;
        mip.gap_tol = options.gap_tol;
        mip.time_limit_sec = options.time_limit_sec;
        auto sol = milp::backend_from_config(options.backend).solve_mip(model, mip);
        if (sol.status != milp::SolveStatus::Optimal) continue;
        if (!best.feasible || sol.objective > best.alpha + 1e-12) {
            best.feasible = true;
            best.alpha = sol.objective;
            best.z = z;
        }
    }
    return best;
}

struct SweepRow {
    double value = 0.0;
    double alpha = 0.0;
    std::string status;
    int iterations = 0;
};

enum class SweepParameter { Sigma, Epsilon };

// One full CC-IGD solve per grid value. Solver failures land in the row's
// status; the sweep keeps going.
inline std::vector<SweepRow> sensitivity_sweep(const PlanningProblem& problem,
                                               const ScenarioSet& scenarios,
                                               SweepParameter parameter,
                                               const std::vector<double>& grid, double lambda0,
                                               const std::vector<double>& reserve,
                                               const BendersOptions& options = {}) {
    if (grid.empty()) throw ValidationError("sensitivity_sweep: grid must be nonempty");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1])
            throw ValidationError("sensitivity_sweep: grid must be sorted ascending");
    std::vector<SweepRow> rows;
    for (double v : grid) {
        PlanningProblem variant = problem;
        if (parameter == SweepParameter::Sigma)
            variant.deviation_factor = v;
        else
            variant.risk_tolerance = v;
        SweepRow row;
        row.value = v;
        try {
            BendersRun run_result =
                run(variant, scenarios, lambda0, BendersVariant::SBD, reserve, options);
            row.alpha = run_result.solution.alpha;
            row.status = run_result.solution.status;
            row.iterations = run_result.solution.iterations;
        } catch (const Error& e) {
            row.status = std::string("error: ") + e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace migplan
