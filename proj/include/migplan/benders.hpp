#pragma once

#include <chrono>
#include <span>

#include "migplan/milp/solver.hpp"
#include "migplan/model_builders.hpp"

namespace migplan {

enum class BendersVariant { SBD, OBD };

inline const char* to_string(BendersVariant v) {
    return v == BendersVariant::SBD ? "sbd" : "obd";
}

// Supporting affine underestimator of one scenario's dispatch cost,
// U(alpha, x) = phi_hat + alpha_coeff*(alpha - anchor_alpha)
//             + x_coeffs . (x - anchor_x).
struct OptimalityCut {
    int scenario = -1;
    int iteration = -1;
    double phi_hat = 0.0;
    double alpha_coeff = 0.0;
    std::vector<double> x_coeffs;  // dense over (k * P + p)
    double anchor_alpha = 0.0;
    std::vector<double> anchor_x;

    double value(double alpha, std::span<const double> x) const {
        double u = phi_hat + alpha_coeff * (alpha - anchor_alpha);
        for (std::size_t j = 0; j < x_coeffs.size(); ++j)
            u += x_coeffs[j] * (x[j] - anchor_x[j]);
        return u;
    }
};

struct IterationRecord {
    int iteration = 0;
    double master_alpha = 0.0;
    double delta = 0.0;
    double master_seconds = 0.0, sp1_seconds = 0.0, sp2_seconds = 0.0;
    int cuts_total = 0;
};

struct BendersState {
    int iteration = 0;
    std::vector<std::vector<OptimalityCut>> cut_pool;  // per scenario
    double incumbent_alpha = 0.0;
    std::vector<double> incumbent_x;
    std::vector<int> incumbent_z;
    double last_delta = milp::kInf;
    std::vector<IterationRecord> log;
};

struct BendersOptions {
    BuildOptions build;
    double gap_tol = 1e-6;        // master/monolithic MIP gap
    int max_iter = 200;
    double time_limit_sec = milp::kInf;
    unsigned threads = 0;         // SP1/evaluation parallelism; 0 = hardware
    std::string backend = "internal";
};

inline InvestmentPlan plan_from_x(const PlanningProblem& problem, std::span<const double> x) {
    int P = problem.num_periods();
    InvestmentPlan plan;
    plan.cumulative_units.assign(problem.catalog.size(), std::vector<int>(problem.years, 0));
    for (std::size_t k = 0; k < problem.catalog.size(); ++k)
        for (int t = 1; t <= problem.years; ++t)
            plan.cumulative_units[k][t - 1] =
                static_cast<int>(std::llround(x[k * P + problem.period_of_year(t)]));
    return plan;
}

inline double first_stage_cost_value(const PlanningProblem& problem,
                                     std::span<const double> x,
                                     const BuildOptions& options = {}) {
    std::vector<double> c = first_stage_costs(problem, options);
    double v = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) v += c[j] * x[j];
    return v;
}

struct Sp1Result {
    double cost = 0.0;                  // phi_hat
    OptimalityCut cut;
    std::vector<double> balance_duals;  // per (t,d,h), the mu family
};

namespace detail {

// One (t, d) day block of the dispatch LP. The blocks are independent given
// the plan, so SP1 solves them separately and sums.
inline milp::StandardFormModel build_dispatch_block(
    const PlanningProblem& problem, const InvestmentPlan& plan,
    const std::vector<std::vector<double>>& availability, const std::vector<double>& load_factor,
    const std::vector<double>& trajectory, const std::vector<double>& reserve,
    const BuildOptions& options, int t, int d, DispatchEmission& emission) {
    milp::StandardFormModel model;
    model.obj_sense = milp::ObjSense::Min;
    VariableIndex index(model);
    Emitter em{model, index, problem, options};
    DispatchConfig cfg;
    cfg.availability = &availability;
    cfg.load_factor = &load_factor;
    cfg.reserve = &reserve;
    cfg.trajectory = &trajectory;
    cfg.plan = &plan;
    cfg.t_begin = t;
    cfg.t_end = t + 1;
    cfg.d_begin = d;
    cfg.d_end = d + 1;
    emission = emit_dispatch(em, cfg);
    return model;
}

}  // namespace detail

// Economic dispatch subproblem for one scenario: optimal recourse cost plus
// the dual-based cut data anchored at (alpha, plan).
inline Sp1Result solve_sp1(const PlanningProblem& problem, const InvestmentPlan& plan,
                           double alpha, const Scenario& scenario,
                           const std::vector<double>& reserve,
                           const BendersOptions& options = {}) {
    const int P = problem.num_periods();
    const int K = static_cast<int>(problem.catalog.size());
    Sp1Result res;
    res.cut.scenario = scenario.id - 1;
    res.cut.anchor_alpha = alpha;
    res.cut.x_coeffs.assign(static_cast<std::size_t>(K) * P, 0.0);
    res.cut.anchor_x.assign(static_cast<std::size_t>(K) * P, 0.0);
    for (int k = 0; k < K; ++k)
        for (int p = 0; p < P; ++p)
            res.cut.anchor_x[static_cast<std::size_t>(k) * P + p] =
                plan.at(k, problem.periods[p].first);

    auto& backend = milp::backend_from_config(options.backend);
    std::vector<double> trajectory(problem.years);
    for (int y = 0; y < problem.years; ++y)
        trajectory[y] = (1.0 + alpha) * problem.demand_forecast[y];
    for (int t = 0; t < problem.years; ++t) {
        for (int d = 0; d < problem.typical_days; ++d) {
            DispatchEmission emission;
            auto model = detail::build_dispatch_block(problem, plan, scenario.res_availability,
                                                      scenario.load_factor, trajectory, reserve,
                                                      options.build, t, d, emission);
            milp::LpOptions lp;
            auto sol = backend.solve_lp(model, lp);
            if (sol.status != milp::SolveStatus::Optimal)
                throw InternalError("dispatch block (" + std::to_string(t + 1) + "," +
                                    std::to_string(d + 1) +
                                    ") not optimal: " + milp::to_string(sol.status));
            res.cost += sol.objective;
            for (const auto& meta : emission.rows) {
                double y = sol.duals[meta.row];
                if (y == 0.0) continue;
                res.cut.alpha_coeff += y * meta.alpha_coeff;
                for (auto [xj, coef] : meta.x_coeffs) res.cut.x_coeffs[xj] += y * coef;
            }
            for (int i = 0; i < model.num_constraints(); ++i)
                if (model.constraints[i].tag == "power-balance")
                    res.balance_duals.push_back(sol.duals[i]);
        }
    }
    res.cut.phi_hat = res.cost;
    return res;
}

// Feasibility verification: pick the scenarios to exempt, within the risk
// budget, that minimize the total remaining budget violation. Exact greedy
// for uniform probabilities, exact knapsack MIP otherwise.
struct Sp2Result {
    double delta = 0.0;
    std::vector<int> z;
};

inline Sp2Result solve_sp2(double first_stage_cost, const std::vector<double>& phis,
                           const std::vector<double>& probabilities, double cap, double epsilon,
                           const std::string& backend = "internal") {
    const int N = static_cast<int>(phis.size());
    if (static_cast<int>(probabilities.size()) != N)
        throw ValidationError("solve_sp2: probabilities/costs length mismatch");
    std::vector<double> viol(N);
    for (int n = 0; n < N; ++n) viol[n] = std::max(0.0, first_stage_cost + phis[n] - cap);

    Sp2Result out;
    out.z.assign(N, 0);
    bool uniform = true;
    for (int n = 1; n < N; ++n)
        if (std::abs(probabilities[n] - probabilities[0]) > 1e-12) uniform = false;

    if (uniform) {
        // Capacity is a unit count; discard the largest violations first.
        int capacity = static_cast<int>(std::floor(epsilon / probabilities[0] + 1e-9));
        std::vector<int> order(N);
        for (int n = 0; n < N; ++n) order[n] = n;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (viol[a] != viol[b]) return viol[a] > viol[b];
            return a < b;
        });
        for (int i = 0; i < std::min(capacity, N); ++i)
            if (viol[order[i]] > 0) out.z[order[i]] = 1;
    } else {
        milp::StandardFormModel m;
        m.obj_sense = milp::ObjSense::Max;  // covered violation
        for (int n = 0; n < N; ++n)
            m.add_variable("z" + std::to_string(n + 1), 0.0, 1.0, true, viol[n]);
        auto& knap = m.add_constraint("risk-budget", "risk-budget", milp::Sense::LE, epsilon);
        for (int n = 0; n < N; ++n) knap.coeffs.emplace_back(n, probabilities[n]);
        milp::MipOptions opt;
        opt.gap_tol = 0.0;
        auto sol = milp::backend_from_config(backend).solve_mip(m, opt);
        if (sol.status != milp::SolveStatus::Optimal)
            throw InternalError("SP2 knapsack did not solve to optimality");
        for (int n = 0; n < N; ++n)
            if (sol.primal[n] > 0.5 && viol[n] > 0) out.z[n] = 1;
    }
    for (int n = 0; n < N; ++n)
        if (!out.z[n]) out.delta += viol[n];
    return out;
}

namespace detail {

// Upper bound on any scenario's dispatch cost over the master-feasible
// region: min-output fuel everywhere plus full curtailment at the alpha cap.
inline double phi_upper_bound(const PlanningProblem& problem, const ScenarioSet& scenarios,
                              const BuildOptions& options) {
    double fbar = 0.0;
    int D = problem.typical_days, H = problem.hours;
    for (int t = 0; t < problem.years; ++t) {
        double scale = 365.0 / D * present_value_factor(problem, t + 1);
        double fuel_min = 0.0;
        for (const auto& der : problem.catalog)
            if (der.kind == DerKind::DFG)
                fuel_min += der.fuel_cost * der.min_output * der.install_limit;
        double max_load = 0.0;
        for (int d = 0; d < D; ++d)
            for (int h = 0; h < H; ++h) {
                double worst = 0.0;
                for (const auto& s : scenarios.scenarios)
                    worst = std::max(worst, s.load_factor[(t * D + d) * H + h]);
                max_load += worst;
            }
        fbar += scale * (D * H * fuel_min + problem.curtailment_penalty *
                                                (1.0 + options.alpha_cap) *
                                                problem.demand_forecast[t] * max_load);
    }
    return fbar;
}

}  // namespace detail

struct MasterSolution {
    milp::SolveStatus status = milp::SolveStatus::Infeasible;
    double alpha = 0.0;
    std::vector<double> x;  // dense (k * P + p)
    std::vector<int> z;
    std::vector<double> phis;
    double wall_seconds = 0.0;
};

// The relaxed first-stage problem with the accumulated optimality cuts. SBD
// keeps the z product on the epigraph variable; OBD carries the cut's own
// bilinear form through per-scenario McCormick columns.
inline MasterSolution solve_master(const BendersState& state, BendersVariant variant,
                                   double lambda0, const PlanningProblem& problem,
                                   const ScenarioSet& scenarios,
                                   const std::vector<double>& reserve,
                                   const BendersOptions& options = {}) {
    auto t0 = std::chrono::steady_clock::now();
    const int N = scenarios.size();
    const int P = problem.num_periods();
    const int K = static_cast<int>(problem.catalog.size());
    double cap = (1.0 + problem.deviation_factor) * lambda0;
    double phi_bar = detail::phi_upper_bound(problem, scenarios, options.build);
    std::vector<double> xcost = first_stage_costs(problem, options.build);

    milp::StandardFormModel model;
    model.obj_sense = milp::ObjSense::Max;
    VariableIndex index(model);
    detail::Emitter em{model, index, problem, options.build};
    em.emit_x_columns(std::vector<double>(xcost.size(), 0.0));
    int alpha = index.add({VarRole::Alpha}, "alpha", 0.0, options.build.alpha_cap, false, 1.0);
    std::vector<int> zc(N), phic(N);
    for (int n = 0; n < N; ++n) {
        std::string ns = detail::sub("n", n);
        zc[n] = index.add({VarRole::Z, -1, -1, -1, -1, n}, "z[" + ns + "]", 0.0, 1.0, true);
        phic[n] = index.add({VarRole::Phi, -1, -1, -1, -1, n}, "phi[" + ns + "]", 0.0,
                            variant == BendersVariant::SBD ? phi_bar : milp::kInf);
    }
    em.emit_investment_rows(reserve);
    em.emit_adequacy_rows(nullptr, alpha);

    auto add_xcost = [&](milp::Constraint& row) {
        for (int k = 0; k < K; ++k)
            for (int p = 0; p < P; ++p) {
                double c = xcost[static_cast<std::size_t>(k) * P + p];
                if (c != 0.0) row.coeffs.emplace_back(index.at({VarRole::X, k, p}), c);
            }
    };

    if (variant == BendersVariant::SBD) {
        for (int n = 0; n < N; ++n) {
            std::string ns = detail::sub("n", n);
            int w = index.add({VarRole::W, -1, -1, -1, -1, n}, "w[" + ns + "]", 0.0, phi_bar);
            auto& budget = model.add_constraint("budget[" + ns + "]", "budget", milp::Sense::LE,
                                                cap);
            add_xcost(budget);
            budget.coeffs.emplace_back(w, 1.0);
            // w = phi * (1 - z), exact for binary z.
            auto& m1 = model.add_constraint("w-ub[" + ns + "]", "mccormick", milp::Sense::LE,
                                            phi_bar);
            m1.coeffs = {{w, 1.0}, {zc[n], phi_bar}};
            auto& m2 = model.add_constraint("w-le-phi[" + ns + "]", "mccormick", milp::Sense::LE,
                                            0.0);
            m2.coeffs = {{w, 1.0}, {phic[n], -1.0}};
            auto& m3 = model.add_constraint("w-lb[" + ns + "]", "mccormick", milp::Sense::GE, 0.0);
            m3.coeffs = {{w, 1.0}, {phic[n], -1.0}, {zc[n], phi_bar}};
            for (const auto& cut : state.cut_pool[n]) {
                // U(alpha, x) <= phi_n with U written out as constant + terms.
                double kc = cut.phi_hat - cut.alpha_coeff * cut.anchor_alpha;
                for (int j = 0; j < K * P; ++j) kc -= cut.x_coeffs[j] * cut.anchor_x[j];
                auto& row = model.add_constraint(
                    "cut[" + ns + ",i" + std::to_string(cut.iteration) + "]", "optimality-cut",
                    milp::Sense::LE, -kc);
                row.coeffs.emplace_back(alpha, cut.alpha_coeff);
                for (int j = 0; j < K * P; ++j)
                    if (cut.x_coeffs[j] != 0.0)
                        row.coeffs.emplace_back(index.at({VarRole::X, j / P, j % P}),
                                                cut.x_coeffs[j]);
                row.coeffs.emplace_back(phic[n], -1.0);
            }
        }
    } else {
        double abar = options.build.alpha_cap;
        for (int n = 0; n < N; ++n) {
            std::string ns = detail::sub("n", n);
            auto& budget = model.add_constraint("budget[" + ns + "]", "budget", milp::Sense::LE,
                                                cap);
            add_xcost(budget);
            budget.coeffs.emplace_back(phic[n], 1.0);
            // Per-scenario product columns for the bilinear cut form.
            int at = index.add({VarRole::AlphaTilde, -1, -1, -1, -1, n}, "alpha_z[" + ns + "]",
                               0.0, abar);
            auto& a1 = model.add_constraint("az-ub[" + ns + "]", "mccormick", milp::Sense::LE, 0.0);
            a1.coeffs = {{at, 1.0}, {zc[n], -abar}};
            auto& a2 = model.add_constraint("az-le-alpha[" + ns + "]", "mccormick", milp::Sense::LE,
                                            0.0);
            a2.coeffs = {{at, 1.0}, {alpha, -1.0}};
            auto& a3 = model.add_constraint("az-lb[" + ns + "]", "mccormick", milp::Sense::GE,
                                            -abar);
            a3.coeffs = {{at, 1.0}, {alpha, -1.0}, {zc[n], -abar}};
            for (int k = 0; k < K; ++k)
                for (int p = 0; p < P; ++p) {
                    double xbar = problem.catalog[k].install_limit;
                    int xt = index.add({VarRole::XTilde, k, p, -1, -1, n},
                                       "x_z[" + problem.catalog[k].id + "," + detail::sub("p", p) +
                                           "," + ns + "]",
                                       0.0, xbar);
                    int xj = index.at({VarRole::X, k, p});
                    std::string key = problem.catalog[k].id + "," + detail::sub("p", p) + "," + ns;
                    auto& b1 = model.add_constraint("xz-ub[" + key + "]", "mccormick",
                                                    milp::Sense::LE, 0.0);
                    b1.coeffs = {{xt, 1.0}, {zc[n], -xbar}};
                    auto& b2 = model.add_constraint("xz-le-x[" + key + "]", "mccormick",
                                                    milp::Sense::LE, 0.0);
                    b2.coeffs = {{xt, 1.0}, {xj, -1.0}};
                    auto& b3 = model.add_constraint("xz-lb[" + key + "]", "mccormick",
                                                    milp::Sense::GE, -xbar);
                    b3.coeffs = {{xt, 1.0}, {xj, -1.0}, {zc[n], -xbar}};
                }
            for (const auto& cut : state.cut_pool[n]) {
                // (1-z) U <= phi expanded over the product columns.
                double kc = cut.phi_hat - cut.alpha_coeff * cut.anchor_alpha;
                for (int j = 0; j < K * P; ++j) kc -= cut.x_coeffs[j] * cut.anchor_x[j];
                auto& row = model.add_constraint(
                    "cut[" + ns + ",i" + std::to_string(cut.iteration) + "]", "optimality-cut",
                    milp::Sense::LE, -kc);
                row.coeffs.emplace_back(alpha, cut.alpha_coeff);
                row.coeffs.emplace_back(at, -cut.alpha_coeff);
                row.coeffs.emplace_back(zc[n], -kc);
                for (int j = 0; j < K * P; ++j) {
                    double b = cut.x_coeffs[j];
                    if (b == 0.0) continue;
                    row.coeffs.emplace_back(index.at({VarRole::X, j / P, j % P}), b);
                    row.coeffs.emplace_back(index.at({VarRole::XTilde, j / P, j % P, -1, -1, n}),
                                            -b);
                }
                row.coeffs.emplace_back(phic[n], -1.0);
            }
        }
    }

    auto& knap = model.add_constraint("risk-budget", "risk-budget", milp::Sense::LE,
                                      problem.risk_tolerance);
    for (int n = 0; n < N; ++n)
        knap.coeffs.emplace_back(zc[n], scenarios.scenarios[n].probability);
    model.validate();

    milp::MipOptions mip;
    mip.gap_tol = options.gap_tol;
    mip.time_limit_sec = options.time_limit_sec;
    auto sol = milp::backend_from_config(options.backend).solve_mip(model, mip);

    MasterSolution out;
    out.status = sol.status;
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (sol.status != milp::SolveStatus::Optimal) return out;
    out.alpha = sol.primal[alpha];
    out.x.resize(static_cast<std::size_t>(K) * P);
    for (int k = 0; k < K; ++k)
        for (int p = 0; p < P; ++p)
            out.x[static_cast<std::size_t>(k) * P + p] = sol.primal[index.at({VarRole::X, k, p})];
    out.z.resize(N);
    out.phis.resize(N);
    for (int n = 0; n < N; ++n) {
        out.z[n] = static_cast<int>(std::llround(sol.primal[zc[n]]));
        out.phis[n] = sol.primal[phic[n]];
    }
    return out;
}

struct BendersRun {
    PlanSolution solution;
    BendersState state;
};

// Algorithm: iterate master -> SP1 cuts -> SP2 verification until the
// violation Delta reaches zero (within tolerance) or a limit trips.
inline BendersRun run(const PlanningProblem& problem, const ScenarioSet& scenarios, double lambda0,
                      BendersVariant variant, const std::vector<double>& reserve,
                      const BendersOptions& options = {}) {
    auto t_start = std::chrono::steady_clock::now();
    const int N = scenarios.size();
    double cap = (1.0 + problem.deviation_factor) * lambda0;
    double delta_tol = 1e-6 * cap;

    BendersRun out;
    BendersState& state = out.state;
    state.cut_pool.assign(N, {});
    PlanSolution& sol = out.solution;
    sol.variant = std::string("ccigd-") + to_string(variant);
    sol.lambda0 = lambda0;
    sol.budget_cap = cap;
    sol.status = "iteration-limit";

    std::vector<double> pis(N);
    for (int n = 0; n < N; ++n) pis[n] = scenarios.scenarios[n].probability;

    for (int j = 0; j < options.max_iter; ++j) {
        MasterSolution master =
            solve_master(state, variant, lambda0, problem, scenarios, reserve, options);
        if (master.status == milp::SolveStatus::Infeasible) {
            sol.status = "infeasible";
            return out;
        }
        if (master.status != milp::SolveStatus::Optimal) {
            sol.status = "limit";
            return out;
        }
        state.iteration = j + 1;
        state.incumbent_alpha = master.alpha;
        state.incumbent_x = master.x;
        state.incumbent_z = master.z;

        auto t_sp1 = std::chrono::steady_clock::now();
        InvestmentPlan plan = plan_from_x(problem, master.x);
        std::vector<Sp1Result> sp1(N);
        parallel_for(
            N,
            [&](std::size_t n) {
                sp1[n] = solve_sp1(problem, plan, master.alpha, scenarios.scenarios[n], reserve,
                                   options);
            },
            options.threads);
        auto t_sp2 = std::chrono::steady_clock::now();

        std::vector<double> phis(N);
        for (int n = 0; n < N; ++n) phis[n] = sp1[n].cost;
        double cx = first_stage_cost_value(problem, master.x, options.build);
        Sp2Result sp2 = solve_sp2(cx, phis, pis, cap, problem.risk_tolerance, options.backend);
        state.last_delta = sp2.delta;

        int cuts_total = 0;
        for (int n = 0; n < N; ++n) {
            Sp1Result& r = sp1[n];
            r.cut.iteration = j + 1;
            state.cut_pool[n].push_back(std::move(r.cut));
            cuts_total += static_cast<int>(state.cut_pool[n].size());
        }
        auto t_end = std::chrono::steady_clock::now();
        state.log.push_back(IterationRecord{
            j + 1, master.alpha, sp2.delta, master.wall_seconds,
            std::chrono::duration<double>(t_sp2 - t_sp1).count(),
            std::chrono::duration<double>(t_end - t_sp2).count(), cuts_total});

        if (sp2.delta <= delta_tol) {
            sol.status = "optimal";
            sol.alpha = master.alpha;
            sol.objective = master.alpha;
            sol.plan = plan;
            sol.z = sp2.z;
            sol.scenario_costs = phis;
            sol.first_stage_cost = cx;
            sol.iterations = j + 1;
            sol.gap = 0.0;
            return out;
        }
        if (std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count() >
            options.time_limit_sec) {
            sol.status = "limit";
            break;
        }
    }
    // Limit exhaustion: report the best incumbent with its violation.
    sol.alpha = state.incumbent_alpha;
    sol.objective = state.incumbent_alpha;
    if (!state.incumbent_x.empty()) sol.plan = plan_from_x(problem, state.incumbent_x);
    sol.z = state.incumbent_z;
    sol.iterations = state.iteration;
    sol.gap = state.last_delta;
    return out;
}

// Single-scenario L-shaped decomposition for the deterministic model: the
// master holds investments and per-day value epigraphs, day LPs supply cuts.
// Keeps desk-size kernels viable on full-size instances, where the monolithic
// deterministic MILP would be far past their envelope.
struct DeterministicResult {
    milp::SolveStatus status = milp::SolveStatus::Infeasible;
    double objective = 0.0;  // total budget at the incumbent
    double bound = 0.0;
    InvestmentPlan plan;
    int iterations = 0;
};

inline DeterministicResult solve_deterministic(const PlanningProblem& problem,
                                               const std::vector<double>& trajectory,
                                               const NominalProfile& profile,
                                               const BendersOptions& options = {}) {
    problem.validate();
    const int P = problem.num_periods();
    const int K = static_cast<int>(problem.catalog.size());
    const int D = problem.typical_days;
    std::vector<double> reserve = resolve_reserve(problem, profile.load_factor);
    std::vector<double> xcost = first_stage_costs(problem, options.build);

    struct DayCut {
        double constant;
        std::vector<double> x_coeffs;  // dense
        std::vector<double> anchor_x;
    };
    std::vector<std::vector<DayCut>> cuts(static_cast<std::size_t>(problem.years) * D);

    DeterministicResult best;
    best.objective = milp::kInf;
    auto t_start = std::chrono::steady_clock::now();

    for (int it = 0; it < options.max_iter; ++it) {
        milp::StandardFormModel model;
        model.obj_sense = milp::ObjSense::Min;
        VariableIndex index(model);
        detail::Emitter em{model, index, problem, options.build};
        em.emit_x_columns(xcost);
        std::vector<int> theta(cuts.size());
        for (int t = 0; t < problem.years; ++t)
            for (int d = 0; d < D; ++d)
                theta[t * D + d] = index.add({VarRole::Phi, -1, t, d}, "theta[" +
                                                 detail::sub("t", t) + detail::sub("d", d) + "]",
                                             0.0, milp::kInf, false, 1.0);
        em.emit_investment_rows(reserve);
        em.emit_adequacy_rows(&trajectory, -1);
        for (std::size_t b = 0; b < cuts.size(); ++b) {
            for (std::size_t i = 0; i < cuts[b].size(); ++i) {
                const DayCut& cut = cuts[b][i];
                double rhs = -cut.constant;
                auto& row = model.add_constraint(
                    "cut[b" + std::to_string(b + 1) + ",i" + std::to_string(i + 1) + "]",
                    "optimality-cut", milp::Sense::LE, 0.0);
                for (int j = 0; j < K * P; ++j) {
                    double c = cut.x_coeffs[j];
                    rhs += c * cut.anchor_x[j];
                    if (c != 0.0) row.coeffs.emplace_back(index.at({VarRole::X, j / P, j % P}), c);
                }
                row.coeffs.emplace_back(theta[b], -1.0);
                row.rhs = rhs;
            }
        }
        model.validate();
        milp::MipOptions mip;
        mip.gap_tol = options.gap_tol;
        mip.time_limit_sec = options.time_limit_sec;
        auto msol = milp::backend_from_config(options.backend).solve_mip(model, mip);
        if (msol.status != milp::SolveStatus::Optimal) {
            best.status = msol.status;
            return best;
        }
        double lower = msol.objective;
        std::vector<double> x(static_cast<std::size_t>(K) * P);
        for (int k = 0; k < K; ++k)
            for (int p = 0; p < P; ++p)
                x[static_cast<std::size_t>(k) * P + p] = msol.primal[index.at({VarRole::X, k, p})];
        InvestmentPlan plan = plan_from_x(problem, x);
        double cx = first_stage_cost_value(problem, x, options.build);

        std::vector<double> day_cost(cuts.size(), 0.0);
        std::vector<DayCut> new_cuts(cuts.size());
        parallel_for(
            cuts.size(),
            [&](std::size_t b) {
                int t = static_cast<int>(b) / D, d = static_cast<int>(b) % D;
                DispatchEmission emission;
                auto block = detail::build_dispatch_block(problem, plan, profile.res_availability,
                                                          profile.load_factor, trajectory, reserve,
                                                          options.build, t, d, emission);
                auto s = milp::solve_lp_internal(block, {});
                if (s.status != milp::SolveStatus::Optimal)
                    throw InternalError("deterministic day block not optimal");
                day_cost[b] = s.objective;
                DayCut cut;
                cut.constant = s.objective;
                cut.anchor_x = x;
                cut.x_coeffs.assign(x.size(), 0.0);
                for (const auto& meta : emission.rows) {
                    double y = s.duals[meta.row];
                    if (y == 0.0) continue;
                    for (auto [xj, coef] : meta.x_coeffs) cut.x_coeffs[xj] += y * coef;
                }
                new_cuts[b] = std::move(cut);
            },
            options.threads);

        double upper = cx;
        for (double c : day_cost) upper += c;
        if (upper < best.objective) {
            best.objective = upper;
            best.plan = plan;
        }
        best.bound = lower;
        best.iterations = it + 1;
        if (upper - lower <= options.gap_tol * std::max(1.0, std::abs(upper))) {
            best.status = milp::SolveStatus::Optimal;
            return best;
        }
        for (std::size_t b = 0; b < cuts.size(); ++b) cuts[b].push_back(std::move(new_cuts[b]));
        if (std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count() >
            options.time_limit_sec) {
            best.status = milp::SolveStatus::IterationLimit;
            return best;
        }
    }
    best.status = milp::SolveStatus::IterationLimit;
    return best;
}

}  // namespace migplan
