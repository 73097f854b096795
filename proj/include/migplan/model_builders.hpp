#pragma once

#include <unordered_map>

#include "migplan/milp/model.hpp"
#include "migplan/scenario_engine.hpp"

namespace migplan {

enum class VarRole { X, P, Pch, Pdis, E, E0, Plc, Alpha, Z, Phi, W, XTilde, AlphaTilde };

struct VarKey {
    VarRole role;
    int k = -1, t = -1, d = -1, h = -1, n = -1;
    bool operator==(const VarKey&) const = default;
};

struct VarKeyHash {
    std::size_t operator()(const VarKey& key) const {
        std::size_t s = static_cast<std::size_t>(key.role);
        for (int v : {key.k, key.t, key.d, key.h, key.n})
            s = s * 1000003u + static_cast<std::size_t>(v + 1);
        return s;
    }
};

// Bijection between (role, subscripts) and model columns. Every column of a
// built model is registered here, so bijectivity is column count == map size.
class VariableIndex {
public:
    explicit VariableIndex(milp::StandardFormModel& model) : model_(&model) {}

    int add(const VarKey& key, std::string name, double lo, double up, bool integral = false,
            double obj = 0.0) {
        int col = model_->add_variable(std::move(name), lo, up, integral, obj);
        auto [it, fresh] = map_.emplace(key, col);
        if (!fresh) throw InternalError("duplicate variable key");
        return col;
    }

    int at(const VarKey& key) const {
        auto it = map_.find(key);
        if (it == map_.end()) throw InternalError("unknown variable key");
        return it->second;
    }

    bool has(const VarKey& key) const { return map_.count(key) > 0; }
    std::size_t size() const { return map_.size(); }

private:
    milp::StandardFormModel* model_;
    std::unordered_map<VarKey, int, VarKeyHash> map_;
};

struct BuildOptions {
    double alpha_cap = 1.0;        // modeling cap on the robustness horizon
    bool om_on_cumulative = false; // charge O&M on cumulative units instead of increments
    enum class Linearization { BigM, McCormick } linearization = Linearization::BigM;
    std::vector<double> budget_big_m;  // per-scenario override; empty = instance-derived
};

// ---- Closed-form size formulas (asserted by structure tests) ----------------

inline int count_kind(const PlanningProblem& p, DerKind kind) {
    int n = 0;
    for (const auto& d : p.catalog) n += d.kind == kind ? 1 : 0;
    return n;
}

// Operational (t,d,h)-indexed columns: generation for RES/DFG, three ESS
// series, and curtailment.
inline int operational_column_count(const PlanningProblem& p) {
    int g = count_kind(p, DerKind::RES) + count_kind(p, DerKind::DFG);
    int s = count_kind(p, DerKind::ESS);
    return (g + 3 * s + 1) * p.years * p.typical_days * p.hours;
}

// Model-specific addition: one free initial-energy column per (ESS, t, d).
inline int initial_energy_column_count(const PlanningProblem& p) {
    return count_kind(p, DerKind::ESS) * p.years * p.typical_days;
}

inline int dispatch_column_count(const PlanningProblem& p) {
    return operational_column_count(p) + initial_energy_column_count(p);
}

inline int dispatch_row_count(const PlanningProblem& p) {
    int nres = count_kind(p, DerKind::RES), ndfg = count_kind(p, DerKind::DFG),
        ness = count_kind(p, DerKind::ESS);
    int tdh = p.years * p.typical_days * p.hours;
    int td = p.years * p.typical_days;
    // balance + reserve + res cap + dfg lo/up + 2 ramps + ESS {ch,dis,Edef,Elo,Eup}
    // per hour, plus E0 bounds and the daily cycle per day.
    return tdh * (2 + nres + 4 * ndfg + 5 * ness) + td * 3 * ness;
}

inline int investment_row_count(const PlanningProblem& p) {
    // annual cap (every year) + monotone links + headroom per year
    return p.years + static_cast<int>(p.catalog.size()) * (p.num_periods() - 1) + p.years;
}

inline int adequacy_row_count(const PlanningProblem& p) { return 2 * p.years; }

// ---- Reserve resolution ------------------------------------------------------

// OR^{tdh} resolved against the nominal load curve. A fixed planning
// parameter: it does not scale with alpha or vary across scenarios.
inline std::vector<double> resolve_reserve(const PlanningProblem& problem,
                                           const std::vector<double>& nominal_load_factor) {
    int pts = problem.years * problem.typical_days * problem.hours;
    if (problem.short_term_reserve.mode == ReserveRule::Mode::Explicit)
        return problem.short_term_reserve.values;
    if (static_cast<int>(nominal_load_factor.size()) != pts)
        throw ValidationError("resolve_reserve: nominal load curve has wrong length");
    std::vector<double> out(pts);
    int D = problem.typical_days, H = problem.hours;
    for (int t = 0; t < problem.years; ++t)
        for (int d = 0; d < D; ++d)
            for (int h = 0; h < H; ++h) {
                int i = (t * D + d) * H + h;
                out[i] = problem.short_term_reserve.fraction * problem.demand_forecast[t] *
                         nominal_load_factor[i];
            }
    return out;
}

// ---- First-stage (investment) structure -------------------------------------

// Discounted capital plus O&M cost per cumulative-unit column (k, p).
// Cumulative X makes increments telescope: column p picks up the weight of
// its own period start minus the next period's.
inline std::vector<double> first_stage_costs(const PlanningProblem& problem,
                                             const BuildOptions& options = {}) {
    int P = problem.num_periods();
    std::vector<double> cost(problem.catalog.size() * P, 0.0);
    for (std::size_t k = 0; k < problem.catalog.size(); ++k) {
        const auto& der = problem.catalog[k];
        for (int p = 0; p < P; ++p) {
            int first_year = problem.periods[p].first;
            double inc_rate = der.unit_capital();
            if (!options.om_on_cumulative) inc_rate += der.om_rate * der.rated_power;
            double w = present_value_factor(problem, first_year) * inc_rate;
            cost[k * P + p] += w;
            if (p > 0) cost[k * P + (p - 1)] -= w;
            if (options.om_on_cumulative) {
                double om = 0.0;
                for (int t = problem.periods[p].first; t <= problem.periods[p].second; ++t)
                    om += present_value_factor(problem, t) * der.om_rate * der.rated_power;
                cost[k * P + p] += om;
            }
        }
    }
    return cost;
}

namespace detail {

inline std::string sub(const char* tag, int v) { return std::string(tag) + std::to_string(v + 1); }

// Shared emission machinery. All builders go through the same row emitters so
// the deterministic, IGD, monolithic, and dispatch models cannot drift apart.
struct Emitter {
    milp::StandardFormModel& model;
    VariableIndex& index;
    const PlanningProblem& problem;
    const BuildOptions& options;

    int P() const { return problem.num_periods(); }
    int K() const { return static_cast<int>(problem.catalog.size()); }

    // x columns, bounds (6), integrality (19).
    void emit_x_columns(const std::vector<double>& costs) {
        for (int k = 0; k < K(); ++k)
            for (int p = 0; p < P(); ++p)
                index.add({VarRole::X, k, p}, "X[" + problem.catalog[k].id + "," + sub("p", p) + "]",
                          0.0, problem.catalog[k].install_limit, true,
                          costs[static_cast<std::size_t>(k) * P() + p]);
    }

    int x_col(int k, int year1) const {
        return index.at({VarRole::X, k, problem.period_of_year(year1)});
    }

    // Annual investment cap, installation monotonicity, and the DFG reserve
    // headroom implied by the unconditional hourly reserve rows.
    void emit_investment_rows(const std::vector<double>& reserve) {
        for (int t = 1; t <= problem.years; ++t) {
            auto& cap = model.add_constraint("inv-cap[" + sub("t", t - 1) + "]",
                                             "annual-invest-cap", milp::Sense::LE,
                                             problem.annual_invest_cap);
            int p = problem.period_of_year(t);
            if (problem.periods[p].first == t) {
                for (int k = 0; k < K(); ++k) {
                    double unit = problem.catalog[k].unit_capital();
                    cap.coeffs.emplace_back(index.at({VarRole::X, k, p}), unit);
                    if (p > 0) cap.coeffs.emplace_back(index.at({VarRole::X, k, p - 1}), -unit);
                }
            }
        }
        for (int k = 0; k < K(); ++k)
            for (int p = 1; p < P(); ++p) {
                auto& row = model.add_constraint(
                    "inv-monotone[" + problem.catalog[k].id + "," + sub("p", p) + "]",
                    "install-monotone", milp::Sense::GE, 0.0);
                row.coeffs.emplace_back(index.at({VarRole::X, k, p}), 1.0);
                row.coeffs.emplace_back(index.at({VarRole::X, k, p - 1}), -1.0);
            }
        int D = problem.typical_days, H = problem.hours;
        for (int t = 1; t <= problem.years; ++t) {
            double worst = 0.0;
            for (int d = 0; d < D; ++d)
                for (int h = 0; h < H; ++h)
                    worst = std::max(worst, reserve[((t - 1) * D + d) * H + h]);
            auto& row = model.add_constraint("reserve-headroom[" + sub("t", t - 1) + "]",
                                             "reserve-headroom", milp::Sense::GE, worst);
            for (int k = 0; k < K(); ++k) {
                const auto& der = problem.catalog[k];
                if (der.kind != DerKind::DFG) continue;
                row.coeffs.emplace_back(x_col(k, t), der.rated_power - der.min_output);
            }
        }
    }

    // Long-term adequacy at a fixed trajectory, or with the horizon column
    // scaling the forecast when alpha_col >= 0.
    void emit_adequacy_rows(const std::vector<double>* trajectory, int alpha_col) {
        for (int t = 1; t <= problem.years; ++t) {
            double psi = alpha_col >= 0 ? problem.demand_forecast[t - 1] : (*trajectory)[t - 1];
            auto& peak = model.add_constraint("adequacy-peak[" + sub("t", t - 1) + "]",
                                              "adequacy-peak", milp::Sense::GE,
                                              psi + problem.long_term_reserve[t - 1]);
            for (int k = 0; k < K(); ++k)
                peak.coeffs.emplace_back(x_col(k, t), problem.catalog[k].rated_power);
            if (alpha_col >= 0) peak.coeffs.emplace_back(alpha_col, -psi);

            auto& dfg = model.add_constraint("adequacy-dfg[" + sub("t", t - 1) + "]",
                                             "adequacy-dfg", milp::Sense::GE,
                                             problem.dfg_min_ratio * psi);
            for (int k = 0; k < K(); ++k) {
                if (problem.catalog[k].kind != DerKind::DFG) continue;
                dfg.coeffs.emplace_back(x_col(k, t), problem.catalog[k].rated_power);
            }
            if (alpha_col >= 0) dfg.coeffs.emplace_back(alpha_col, -problem.dfg_min_ratio * psi);
        }
    }
};

}  // namespace detail

// How one dispatch row's right-hand side depends on the first-stage point:
// row_lhs {sense} rhs_const + sum x_coeffs * x + alpha_coeff * (1 + alpha).
// Duals against these give the cut gradients.
struct DispatchRowMeta {
    int row = -1;
    double alpha_coeff = 0.0;                      // forecast * load factor on balance rows
    std::vector<std::pair<int, double>> x_coeffs;  // flat (k * P + p) -> coefficient
};

struct DispatchEmission {
    std::vector<DispatchRowMeta> rows;
};

namespace detail {

struct DispatchConfig {
    int scenario_index = -1;  // >= 0 adds an ",n<i>" suffix to names
    const std::vector<std::vector<double>>* availability = nullptr;
    const std::vector<double>* load_factor = nullptr;
    const std::vector<double>* reserve = nullptr;
    const std::vector<double>* trajectory = nullptr;  // fixed-demand mode
    int alpha_col = -1;                               // demand (1+alpha)*forecast mode
    int z_col = -1;                                   // relax balance rows via z
    int alpha_tilde_col = -1;  // exact alpha*z product column (mccormick variant)
    double charge_bound = 0.0;  // max total ESS charging, mccormick variant
    const InvestmentPlan* plan = nullptr;             // x-fixed mode
    int t_begin = 0, t_end = -1;                      // 0-based, half-open; -1 = all
    int d_begin = 0, d_end = -1;
};

// Emits one scenario's dispatch columns and rows, for whole horizons or a
// single (t,d) block. In x-fixed mode the investment terms land on the rhs
// and the returned metadata records the dependence for cut generation.
inline DispatchEmission emit_dispatch(Emitter& em, const DispatchConfig& cfg) {
    auto& model = em.model;
    auto& index = em.index;
    const auto& problem = em.problem;
    const int D = problem.typical_days, H = problem.hours, P = problem.num_periods();
    const int t_end = cfg.t_end < 0 ? problem.years : cfg.t_end;
    const int d_end = cfg.d_end < 0 ? D : cfg.d_end;
    const int n = cfg.scenario_index;
    DispatchEmission out;

    std::string nsfx = n >= 0 ? "," + detail::sub("n", n) : "";
    auto slot = [&](int t, int d, int h) { return (t * D + d) * H + h; };
    auto res_series = [&](int res_pos) -> const std::vector<double>& {
        return (*cfg.availability)[res_pos];
    };

    // Columns for the block.
    for (int t = cfg.t_begin; t < t_end; ++t) {
        double scale = 365.0 / D * present_value_factor(problem, t + 1);
        for (int d = cfg.d_begin; d < d_end; ++d) {
            for (int h = 0; h < H; ++h) {
                std::string s = "," + detail::sub("t", t) + detail::sub("d", d) +
                                detail::sub("h", h) + nsfx + "]";
                for (int k = 0; k < em.K(); ++k) {
                    const auto& der = problem.catalog[k];
                    if (der.kind == DerKind::ESS) {
                        index.add({VarRole::Pch, k, t, d, h, n}, "Pch[" + der.id + s, 0, milp::kInf);
                        index.add({VarRole::Pdis, k, t, d, h, n}, "Pdis[" + der.id + s, 0,
                                  milp::kInf);
                        index.add({VarRole::E, k, t, d, h, n}, "E[" + der.id + s, 0, milp::kInf);
                    } else {
                        double fuel =
                            der.kind == DerKind::DFG ? scale * der.fuel_cost : 0.0;
                        index.add({VarRole::P, k, t, d, h, n}, "P[" + der.id + s, 0, milp::kInf,
                                  false, fuel);
                    }
                }
                index.add({VarRole::Plc, -1, t, d, h, n}, "Plc[" + s.substr(1), 0, milp::kInf,
                          false, scale * problem.curtailment_penalty);
            }
            for (int k = 0; k < em.K(); ++k)
                if (problem.catalog[k].kind == DerKind::ESS)
                    index.add({VarRole::E0, k, t, d, -1, n},
                              "E0[" + problem.catalog[k].id + "," + detail::sub("t", t) +
                                  detail::sub("d", d) + nsfx + "]",
                              0, milp::kInf);
        }
    }

    // Rows. Investment coupling goes through add_x: a column term in
    // x-as-columns mode, an rhs contribution plus metadata in x-fixed mode.
    for (int t = cfg.t_begin; t < t_end; ++t) {
        for (int d = cfg.d_begin; d < d_end; ++d) {
            for (int h = 0; h < H; ++h) {
                std::string s = "[" + detail::sub("t", t) + detail::sub("d", d) +
                                detail::sub("h", h) + nsfx + "]";
                DispatchRowMeta meta;
                auto add_x = [&](milp::Constraint& row, int k, double coef) {
                    int p = problem.period_of_year(t + 1);
                    if (cfg.plan) {
                        row.rhs += coef * cfg.plan->at(k, t + 1);
                        meta.x_coeffs.emplace_back(k * P + p, coef);
                    } else {
                        row.coeffs.emplace_back(index.at({VarRole::X, k, p}), -coef);
                    }
                };
                auto push_meta = [&](milp::Constraint& row) {
                    if (!cfg.plan) return;
                    meta.row = static_cast<int>(&row - model.constraints.data());
                    out.rows.push_back(std::move(meta));
                    meta = DispatchRowMeta{};
                };

                // Hourly power balance with curtailment slack.
                {
                    auto& row = model.add_constraint("balance" + s, "power-balance",
                                                     milp::Sense::GE, 0.0);
                    for (int k = 0; k < em.K(); ++k) {
                        const auto& der = problem.catalog[k];
                        if (der.kind == DerKind::ESS) {
                            row.coeffs.emplace_back(index.at({VarRole::Pdis, k, t, d, h, n}), 1.0);
                            row.coeffs.emplace_back(index.at({VarRole::Pch, k, t, d, h, n}), -1.0);
                        } else {
                            row.coeffs.emplace_back(index.at({VarRole::P, k, t, d, h, n}), 1.0);
                        }
                    }
                    row.coeffs.emplace_back(index.at({VarRole::Plc, -1, t, d, h, n}), 1.0);
                    double lf = (*cfg.load_factor)[slot(t, d, h)];
                    double base = problem.demand_forecast[t] * lf;
                    if (cfg.alpha_col >= 0) {
                        row.rhs = base;
                        row.coeffs.emplace_back(cfg.alpha_col, -base);
                        if (cfg.alpha_tilde_col >= 0) {
                            // Exact product form: supply >= (1+alpha)L(1-z) - K z
                            // with alpha*z carried by its own column.
                            row.coeffs.emplace_back(cfg.alpha_tilde_col, base);
                            row.coeffs.emplace_back(cfg.z_col, base + cfg.charge_bound);
                        } else if (cfg.z_col >= 0) {
                            double big_m = (1.0 + em.options.alpha_cap) * base;
                            row.coeffs.emplace_back(cfg.z_col, big_m);
                        }
                    } else {
                        row.rhs = (*cfg.trajectory)[t] * lf;
                    }
                    meta.alpha_coeff = base;
                    push_meta(row);
                }

                // Short-term reserve from DFG headroom.
                {
                    auto& row = model.add_constraint("reserve" + s, "reserve", milp::Sense::GE,
                                                     (*cfg.reserve)[slot(t, d, h)]);
                    for (int k = 0; k < em.K(); ++k) {
                        const auto& der = problem.catalog[k];
                        if (der.kind != DerKind::DFG) continue;
                        row.coeffs.emplace_back(index.at({VarRole::P, k, t, d, h, n}), -1.0);
                        add_x(row, k, -der.rated_power);
                    }
                    push_meta(row);
                }

                int res_pos = 0;
                for (int k = 0; k < em.K(); ++k) {
                    const auto& der = problem.catalog[k];
                    std::string ks = "[" + der.id + "," + detail::sub("t", t) +
                                     detail::sub("d", d) + detail::sub("h", h) + nsfx + "]";
                    if (der.kind == DerKind::RES) {
                        double avail = res_series(res_pos)[slot(t, d, h)];
                        auto& row = model.add_constraint("res-cap" + ks, "res-availability",
                                                         milp::Sense::LE, 0.0);
                        row.coeffs.emplace_back(index.at({VarRole::P, k, t, d, h, n}), 1.0);
                        add_x(row, k, avail * der.rated_power);
                        push_meta(row);
                        ++res_pos;
                    } else if (der.kind == DerKind::DFG) {
                        auto& lo = model.add_constraint("dfg-min" + ks, "dfg-min", milp::Sense::GE,
                                                        0.0);
                        lo.coeffs.emplace_back(index.at({VarRole::P, k, t, d, h, n}), 1.0);
                        add_x(lo, k, der.min_output);
                        push_meta(lo);
                        auto& up = model.add_constraint("dfg-max" + ks, "dfg-max", milp::Sense::LE,
                                                        0.0);
                        up.coeffs.emplace_back(index.at({VarRole::P, k, t, d, h, n}), 1.0);
                        add_x(up, k, der.rated_power);
                        push_meta(up);
                        // Cyclic ramping: the first hour wraps to the last.
                        int hp = h == 0 ? H - 1 : h - 1;
                        auto& ru = model.add_constraint("ramp-up" + ks, "ramp-up", milp::Sense::LE,
                                                        der.ramp_up);
                        ru.coeffs.emplace_back(index.at({VarRole::P, k, t, d, h, n}), 1.0);
                        ru.coeffs.emplace_back(index.at({VarRole::P, k, t, d, hp, n}), -1.0);
                        push_meta(ru);
                        auto& rd = model.add_constraint("ramp-down" + ks, "ramp-down",
                                                        milp::Sense::GE, -der.ramp_down);
                        rd.coeffs.emplace_back(index.at({VarRole::P, k, t, d, h, n}), 1.0);
                        rd.coeffs.emplace_back(index.at({VarRole::P, k, t, d, hp, n}), -1.0);
                        push_meta(rd);
                    } else {
                        auto& ch = model.add_constraint("ess-charge-cap" + ks, "ess-charge-cap",
                                                        milp::Sense::LE, 0.0);
                        ch.coeffs.emplace_back(index.at({VarRole::Pch, k, t, d, h, n}), 1.0);
                        add_x(ch, k, der.rated_power);
                        push_meta(ch);
                        auto& dis = model.add_constraint("ess-discharge-cap" + ks,
                                                         "ess-discharge-cap", milp::Sense::LE, 0.0);
                        dis.coeffs.emplace_back(index.at({VarRole::Pdis, k, t, d, h, n}), 1.0);
                        add_x(dis, k, der.rated_power);
                        push_meta(dis);
                        // Stored energy recursion, hour over hour.
                        auto& bal = model.add_constraint("energy-balance" + ks, "energy-balance",
                                                         milp::Sense::EQ, 0.0);
                        bal.coeffs.emplace_back(index.at({VarRole::E, k, t, d, h, n}), 1.0);
                        if (h == 0)
                            bal.coeffs.emplace_back(index.at({VarRole::E0, k, t, d, -1, n}), -1.0);
                        else
                            bal.coeffs.emplace_back(index.at({VarRole::E, k, t, d, h - 1, n}),
                                                    -1.0);
                        bal.coeffs.emplace_back(index.at({VarRole::Pch, k, t, d, h, n}),
                                                -der.efficiency);
                        bal.coeffs.emplace_back(index.at({VarRole::Pdis, k, t, d, h, n}),
                                                1.0 / der.efficiency);
                        push_meta(bal);
                        auto& elo = model.add_constraint("energy-min" + ks, "energy-min",
                                                         milp::Sense::GE, 0.0);
                        elo.coeffs.emplace_back(index.at({VarRole::E, k, t, d, h, n}), 1.0);
                        add_x(elo, k, der.min_energy);
                        push_meta(elo);
                        auto& eup = model.add_constraint("energy-max" + ks, "energy-max",
                                                         milp::Sense::LE, 0.0);
                        eup.coeffs.emplace_back(index.at({VarRole::E, k, t, d, h, n}), 1.0);
                        add_x(eup, k, der.rated_energy);
                        push_meta(eup);
                    }
                }
            }
            for (int k = 0; k < em.K(); ++k) {
                const auto& der = problem.catalog[k];
                if (der.kind != DerKind::ESS) continue;
                std::string ks = "[" + der.id + "," + detail::sub("t", t) + detail::sub("d", d) +
                                 nsfx + "]";
                DispatchRowMeta meta;
                auto add_x = [&](milp::Constraint& row, int kk, double coef) {
                    int p = problem.period_of_year(t + 1);
                    if (cfg.plan) {
                        row.rhs += coef * cfg.plan->at(kk, t + 1);
                        meta.x_coeffs.emplace_back(kk * P + p, coef);
                    } else {
                        row.coeffs.emplace_back(index.at({VarRole::X, kk, p}), -coef);
                    }
                };
                auto push_meta = [&](milp::Constraint& row) {
                    if (!cfg.plan) return;
                    meta.row = static_cast<int>(&row - model.constraints.data());
                    out.rows.push_back(std::move(meta));
                    meta = DispatchRowMeta{};
                };
                auto& lo = model.add_constraint("energy-initial-min" + ks, "energy-initial-min",
                                                milp::Sense::GE, 0.0);
                lo.coeffs.emplace_back(index.at({VarRole::E0, k, t, d, -1, n}), 1.0);
                add_x(lo, k, der.min_energy);
                push_meta(lo);
                auto& up = model.add_constraint("energy-initial-max" + ks, "energy-initial-max",
                                                milp::Sense::LE, 0.0);
                up.coeffs.emplace_back(index.at({VarRole::E0, k, t, d, -1, n}), 1.0);
                add_x(up, k, der.rated_energy);
                push_meta(up);
                // The day is a closed cycle: the last hour returns to E0.
                auto& cyc = model.add_constraint("daily-cycle" + ks, "daily-cycle", milp::Sense::EQ,
                                                 0.0);
                cyc.coeffs.emplace_back(index.at({VarRole::E, k, t, d, H - 1, n}), 1.0);
                cyc.coeffs.emplace_back(index.at({VarRole::E0, k, t, d, -1, n}), -1.0);
                push_meta(cyc);
            }
        }
    }
    return out;
}

}  // namespace detail

// ---- Builders ----------------------------------------------------------------

// Least-cost expansion at a fixed demand trajectory and nominal profile.
inline milp::StandardFormModel build_deterministic(const PlanningProblem& problem,
                                                   const std::vector<double>& trajectory,
                                                   const NominalProfile& profile,
                                                   const BuildOptions& options = {}) {
    problem.validate();
    if (static_cast<int>(trajectory.size()) != problem.years)
        throw ValidationError("build_deterministic: trajectory needs one entry per year");
    if (static_cast<int>(profile.load_factor.size()) !=
        problem.years * problem.typical_days * problem.hours)
        throw ValidationError("build_deterministic: profile is missing cells");
    milp::StandardFormModel model;
    model.obj_sense = milp::ObjSense::Min;
    VariableIndex index(model);
    detail::Emitter em{model, index, problem, options};
    em.emit_x_columns(first_stage_costs(problem, options));
    std::vector<double> reserve = resolve_reserve(problem, profile.load_factor);
    em.emit_investment_rows(reserve);
    em.emit_adequacy_rows(&trajectory, -1);
    detail::DispatchConfig cfg;
    cfg.availability = &profile.res_availability;
    cfg.load_factor = &profile.load_factor;
    cfg.reserve = &reserve;
    cfg.trajectory = &trajectory;
    detail::emit_dispatch(em, cfg);
    model.validate();
    return model;
}

// Robustness-horizon maximization at the nominal profile, demand fixed to the
// envelope's worst case (1 + alpha) * forecast. lambda0 is the risk-neutral
// budget from a prior deterministic solve.
inline milp::StandardFormModel build_igd(const PlanningProblem& problem,
                                         const NominalProfile& profile, double lambda0,
                                         const BuildOptions& options = {}) {
    problem.validate();
    if (!(lambda0 > 0)) throw ValidationError("build_igd: lambda0 must be > 0");
    milp::StandardFormModel model;
    model.obj_sense = milp::ObjSense::Max;
    VariableIndex index(model);
    detail::Emitter em{model, index, problem, options};
    std::vector<double> xcost = first_stage_costs(problem, options);
    em.emit_x_columns(std::vector<double>(xcost.size(), 0.0));
    int alpha = index.add({VarRole::Alpha}, "alpha", 0.0, options.alpha_cap, false, 1.0);
    std::vector<double> reserve = resolve_reserve(problem, profile.load_factor);
    em.emit_investment_rows(reserve);
    em.emit_adequacy_rows(nullptr, alpha);
    detail::DispatchConfig cfg;
    cfg.availability = &profile.res_availability;
    cfg.load_factor = &profile.load_factor;
    cfg.reserve = &reserve;
    cfg.alpha_col = alpha;
    detail::emit_dispatch(em, cfg);
    // Budget level limit: c'x + d'y <= (1+sigma)*lambda0.
    double cap = (1.0 + problem.deviation_factor) * lambda0;
    auto& budget = model.add_constraint("budget", "budget", milp::Sense::LE, cap);
    for (int k = 0; k < em.K(); ++k)
        for (int p = 0; p < em.P(); ++p) {
            double c = xcost[static_cast<std::size_t>(k) * em.P() + p];
            if (c != 0.0) budget.coeffs.emplace_back(index.at({VarRole::X, k, p}), c);
        }
    for (int j = 0; j < model.num_variables(); ++j) {
        // Dispatch columns carry their cost in the deterministic objective
        // position; here the objective is alpha, so collect them explicitly.
        if (j == alpha) continue;
        if (model.objective[j] != 0.0) {
            budget.coeffs.emplace_back(j, model.objective[j]);
            model.objective[j] = 0.0;
        }
    }
    model.validate();
    return model;
}

// Economic dispatch for one scenario at a fixed plan and horizon. Always
// feasible by construction: curtailment covers the balance rows and the
// master-side headroom rows keep the reserve rows satisfiable.
inline milp::StandardFormModel build_dispatch_lp(const PlanningProblem& problem,
                                                 const InvestmentPlan& plan,
                                                 const Scenario& scenario, double alpha,
                                                 const std::vector<double>& reserve,
                                                 const BuildOptions& options = {},
                                                 DispatchEmission* emission = nullptr) {
    problem.validate();
    plan.validate(problem);
    milp::StandardFormModel model;
    model.obj_sense = milp::ObjSense::Min;
    VariableIndex index(model);
    detail::Emitter em{model, index, problem, options};
    std::vector<double> trajectory(problem.years);
    for (int t = 0; t < problem.years; ++t)
        trajectory[t] = (1.0 + alpha) * problem.demand_forecast[t];
    detail::DispatchConfig cfg;
    cfg.availability = &scenario.res_availability;
    cfg.load_factor = &scenario.load_factor;
    cfg.reserve = &reserve;
    cfg.trajectory = &trajectory;
    cfg.plan = &plan;
    DispatchEmission rows = detail::emit_dispatch(em, cfg);
    if (emission) *emission = std::move(rows);
    model.validate();
    return model;
}

// Bilinear chance-constrained model, linearized. Budget rows use per-scenario
// big-M; balance rows substitute the alpha cap into the relaxation constant.
inline milp::StandardFormModel build_ccigd_monolithic(const PlanningProblem& problem,
                                                      const ScenarioSet& scenarios, double lambda0,
                                                      const std::vector<double>& reserve,
                                                      const BuildOptions& options = {}) {
    problem.validate();
    scenarios.validate();
    if (!(lambda0 > 0)) throw ValidationError("build_ccigd_monolithic: lambda0 must be > 0");
    for (double m : options.budget_big_m)
        if (!(m > 0)) throw ValidationError("budget big-M values must be > 0");
    if (!options.budget_big_m.empty() &&
        static_cast<int>(options.budget_big_m.size()) != scenarios.size())
        throw ValidationError("budget big-M override needs one value per scenario");

    milp::StandardFormModel model;
    model.obj_sense = milp::ObjSense::Max;
    VariableIndex index(model);
    detail::Emitter em{model, index, problem, options};
    std::vector<double> xcost = first_stage_costs(problem, options);
    em.emit_x_columns(std::vector<double>(xcost.size(), 0.0));
    int alpha = index.add({VarRole::Alpha}, "alpha", 0.0, options.alpha_cap, false, 1.0);
    std::vector<int> zcol(scenarios.size());
    for (int n = 0; n < scenarios.size(); ++n)
        zcol[n] = index.add({VarRole::Z, -1, -1, -1, -1, n}, "z[" + detail::sub("n", n) + "]", 0.0,
                            1.0, true);
    em.emit_investment_rows(reserve);
    em.emit_adequacy_rows(nullptr, alpha);

    double cap = (1.0 + problem.deviation_factor) * lambda0;
    double default_big_m = 0.0;
    {
        // Worst first-stage cost plus min-output fuel for a deactivated
        // scenario's cheapest feasible dispatch.
        double cbar = 0.0;
        for (int k = 0; k < em.K(); ++k)
            for (int p = 0; p < em.P(); ++p)
                cbar += std::max(0.0, xcost[static_cast<std::size_t>(k) * em.P() + p]) *
                        problem.catalog[k].install_limit;
        double fbar = 0.0;
        for (int t = 1; t <= problem.years; ++t) {
            double scale = 365.0 / problem.typical_days * present_value_factor(problem, t);
            for (int k = 0; k < em.K(); ++k) {
                const auto& der = problem.catalog[k];
                if (der.kind != DerKind::DFG) continue;
                fbar += scale * problem.typical_days * problem.hours * der.fuel_cost *
                        der.min_output * der.install_limit;
            }
        }
        default_big_m = std::max(1.0, cbar + fbar - cap);
    }

    const bool mccormick = options.linearization == BuildOptions::Linearization::McCormick;
    double charge_bound = 0.0;
    for (const auto& der : problem.catalog)
        if (der.kind == DerKind::ESS) charge_bound += der.rated_power * der.install_limit;

    for (int n = 0; n < scenarios.size(); ++n) {
        const Scenario& s = scenarios.scenarios[n];
        detail::DispatchConfig cfg;
        cfg.scenario_index = n;
        cfg.availability = &s.res_availability;
        cfg.load_factor = &s.load_factor;
        cfg.reserve = &reserve;
        cfg.alpha_col = alpha;
        cfg.z_col = zcol[n];
        if (mccormick) {
            std::string ns = detail::sub("n", n);
            int at = index.add({VarRole::AlphaTilde, -1, -1, -1, -1, n}, "alpha_z[" + ns + "]", 0.0,
                               options.alpha_cap);
            cfg.alpha_tilde_col = at;
            cfg.charge_bound = charge_bound;
            double abar = options.alpha_cap;
            auto& m1 = model.add_constraint("mcc-ub[" + ns + "]", "mccormick", milp::Sense::LE, 0.0);
            m1.coeffs = {{at, 1.0}, {zcol[n], -abar}};
            auto& m2 = model.add_constraint("mcc-le-alpha[" + ns + "]", "mccormick",
                                            milp::Sense::LE, 0.0);
            m2.coeffs = {{at, 1.0}, {alpha, -1.0}};
            auto& m3 = model.add_constraint("mcc-lb[" + ns + "]", "mccormick", milp::Sense::GE,
                                            -abar);
            m3.coeffs = {{at, 1.0}, {alpha, -1.0}, {zcol[n], -abar}};
        }
        detail::emit_dispatch(em, cfg);
        double big_m = options.budget_big_m.empty() ? default_big_m : options.budget_big_m[n];
        auto& budget = model.add_constraint("budget[" + detail::sub("n", n) + "]", "budget",
                                            milp::Sense::LE, cap);
        for (int k = 0; k < em.K(); ++k)
            for (int p = 0; p < em.P(); ++p) {
                double c = xcost[static_cast<std::size_t>(k) * em.P() + p];
                if (c != 0.0) budget.coeffs.emplace_back(index.at({VarRole::X, k, p}), c);
            }
        budget.coeffs.emplace_back(zcol[n], -big_m);
        for (int j = 0; j < model.num_variables(); ++j) {
            if (model.objective[j] != 0.0 && j != alpha) {
                budget.coeffs.emplace_back(j, model.objective[j]);
                model.objective[j] = 0.0;
            }
        }
    }

    auto& knap = model.add_constraint("risk-budget", "risk-budget", milp::Sense::LE,
                                      problem.risk_tolerance);
    for (int n = 0; n < scenarios.size(); ++n)
        knap.coeffs.emplace_back(zcol[n], scenarios.scenarios[n].probability);

    model.validate();
    return model;
}

}  // namespace migplan
