#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "migplan/common.hpp"

namespace migplan {

enum class DerKind { RES, DFG, ESS };
enum class ResResource { Wind, Solar };

inline const char* to_string(DerKind k) {
    switch (k) {
        case DerKind::RES: return "RES";
        case DerKind::DFG: return "DFG";
        case DerKind::ESS: return "ESS";
    }
    return "?";
}

// One candidate distributed energy resource. Units: kW, kWh, $, fractions.
struct DerSpec {
    std::string id;
    DerKind kind = DerKind::RES;
    ResResource resource = ResResource::Wind;  // RES only: which profile drives it
    double rated_power = 0.0;                  // kW
    double min_output = 0.0;                   // kW, DFG only
    double rated_energy = 0.0;                 // kWh, ESS only
    double min_energy = 0.0;                   // kWh, ESS only
    double capital_cost = 0.0;                 // $/kW, RES/DFG
    double power_cost = 0.0;                   // $/kW, ESS
    double energy_cost = 0.0;                  // $/kWh, ESS
    double om_rate = 0.0;                      // $/kW/yr, held constant over years
    double fuel_cost = 0.0;                    // $/kWh, DFG only
    double efficiency = 1.0;                   // (0,1], ESS only
    double ramp_up = 0.0;                      // kW/h, DFG
    double ramp_down = 0.0;                    // kW/h, DFG
    int install_limit = 1;                     // max cumulative units

    // Capital cost of one installed unit.
    double unit_capital() const {
        if (kind == DerKind::ESS) return power_cost * rated_power + energy_cost * rated_energy;
        return capital_cost * rated_power;
    }

    void validate() const {
        if (!(rated_power > 0)) throw ValidationError("der '" + id + "': rated_power must be > 0");
        if (install_limit < 1) throw ValidationError("der '" + id + "': install_limit must be >= 1");
        switch (kind) {
            case DerKind::DFG:
                if (min_output < 0 || min_output > rated_power)
                    throw ValidationError("der '" + id + "': min_output outside [0, rated_power]");
                if (fuel_cost < 0) throw ValidationError("der '" + id + "': fuel_cost must be >= 0");
                if (!(ramp_up > 0)) throw ValidationError("der '" + id + "': ramp_up must be > 0");
                if (!(ramp_down > 0)) throw ValidationError("der '" + id + "': ramp_down must be > 0");
                break;
            case DerKind::ESS:
                if (!(efficiency > 0 && efficiency <= 1))
                    throw ValidationError("der '" + id + "': efficiency outside (0,1]");
                if (!(rated_energy > 0))
                    throw ValidationError("der '" + id + "': rated_energy must be > 0");
                if (min_energy < 0 || min_energy > rated_energy)
                    throw ValidationError("der '" + id + "': min_energy outside [0, rated_energy]");
                break;
            case DerKind::RES:
                if (fuel_cost != 0) throw ValidationError("der '" + id + "': fuel_cost absent for RES");
                if (min_output != 0) throw ValidationError("der '" + id + "': min_output is 0 for RES");
                break;
        }
    }
};

// Short-term reserve requirement: either explicit kW per (t,d,h), or a
// fraction of the nominal hourly load resolved when a profile is available.
struct ReserveRule {
    enum class Mode { FractionOfLoad, Explicit } mode = Mode::FractionOfLoad;
    double fraction = 0.10;
    std::vector<double> values;  // flattened (t,d,h), Explicit mode
};

struct PlanningProblem {
    int years = 0;                                  // T
    std::vector<std::pair<int, int>> periods;       // inclusive 1-based year ranges
    int typical_days = 0;                           // D
    int hours = 24;                                 // H
    double discount_rate = 0.0;                     // r
    std::vector<double> demand_forecast;            // kW per year
    std::vector<double> long_term_reserve;          // kW per year
    ReserveRule short_term_reserve;                 // OR^{tdh}
    double annual_invest_cap = 0.0;                 // $
    double curtailment_penalty = 0.0;               // $/kWh
    double dfg_min_ratio = 0.0;                     // omega
    double deviation_factor = 0.0;                  // sigma
    double risk_tolerance = 0.0;                    // epsilon
    std::vector<DerSpec> catalog;

    int num_periods() const { return static_cast<int>(periods.size()); }

    // 1-based year -> 0-based period index.
    int period_of_year(int year) const {
        for (int p = 0; p < num_periods(); ++p)
            if (year >= periods[p].first && year <= periods[p].second) return p;
        throw ValidationError("year " + std::to_string(year) + " outside all periods");
    }

    void validate() const {
        if (years < 1) throw ValidationError("horizon.years must be >= 1");
        if (typical_days < 1) throw ValidationError("horizon.typical_days must be >= 1");
        if (hours < 1) throw ValidationError("horizon.hours must be >= 1");
        if (periods.empty()) throw ValidationError("horizon.periods must be nonempty");
        int expect = 1;
        for (const auto& [a, b] : periods) {
            if (a != expect || b < a)
                throw ValidationError("horizon.periods must partition 1.." +
                                      std::to_string(years) + " into increasing ranges");
            expect = b + 1;
        }
        if (expect != years + 1)
            throw ValidationError("horizon.periods must cover exactly 1.." + std::to_string(years));
        if (discount_rate < 0) throw ValidationError("economics.discount_rate must be >= 0");
        if (static_cast<int>(demand_forecast.size()) != years)
            throw ValidationError("economics.demand_forecast must have one entry per year");
        for (double v : demand_forecast)
            if (v < 0) throw ValidationError("economics.demand_forecast entries must be >= 0");
        if (static_cast<int>(long_term_reserve.size()) != years)
            throw ValidationError("economics.long_term_reserve must have one entry per year");
        for (double v : long_term_reserve)
            if (v < 0) throw ValidationError("economics.long_term_reserve entries must be >= 0");
        if (short_term_reserve.mode == ReserveRule::Mode::Explicit &&
            static_cast<int>(short_term_reserve.values.size()) !=
                years * typical_days * hours)
            throw ValidationError("short_term_reserve.values must have years*days*hours entries");
        if (short_term_reserve.fraction < 0)
            throw ValidationError("short_term_reserve.fraction must be >= 0");
        if (annual_invest_cap < 0) throw ValidationError("economics.annual_invest_cap must be >= 0");
        if (curtailment_penalty < 0)
            throw ValidationError("economics.curtailment_penalty must be >= 0");
        if (dfg_min_ratio < 0 || dfg_min_ratio > 1)
            throw ValidationError("policy.dfg_min_ratio must be in [0,1]");
        if (deviation_factor < 0) throw ValidationError("policy.deviation_factor must be >= 0");
        if (risk_tolerance < 0 || risk_tolerance >= 1)
            throw ValidationError("policy.risk_tolerance must be in [0,1)");
        if (catalog.empty()) throw ValidationError("catalog must be nonempty");
        for (const auto& d : catalog) d.validate();
        for (std::size_t i = 0; i < catalog.size(); ++i)
            for (std::size_t j = i + 1; j < catalog.size(); ++j)
                if (catalog[i].id == catalog[j].id)
                    throw ValidationError("catalog ids must be unique: '" + catalog[i].id + "'");
    }
};

// tau(t) = (1+r)^-t.
inline double present_value_factor(const PlanningProblem& problem, int year) {
    if (year < 1 || year > problem.years)
        throw ValidationError("present_value_factor: year out of range");
    return std::pow(1.0 + problem.discount_rate, -year);
}

// Symmetric fractional envelope around the demand forecast.
struct EnvelopeBound {
    double horizon = 0.0;  // alpha_L >= 0
    std::vector<double> forecast;

    void validate() const {
        if (horizon < 0) throw ValidationError("envelope horizon must be >= 0");
    }
};

inline bool envelope_contains(const EnvelopeBound& bound, const std::vector<double>& trajectory) {
    bound.validate();
    if (trajectory.size() != bound.forecast.size())
        throw ValidationError("envelope_contains: trajectory length mismatch");
    for (std::size_t t = 0; t < trajectory.size(); ++t) {
        if (!(bound.forecast[t] > 0))
            throw ValidationError("envelope_contains: forecast entries must be > 0");
        if (std::abs(trajectory[t] - bound.forecast[t]) / bound.forecast[t] >
            bound.horizon + 1e-12)
            return false;
    }
    return true;
}

inline std::vector<double> worst_case_trajectory(const EnvelopeBound& bound) {
    bound.validate();
    std::vector<double> out(bound.forecast.size());
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = (1.0 + bound.horizon) * bound.forecast[t];
    return out;
}

// Per-scenario draw of the random factors: RES availability as a fraction of
// rated power per (res id, t, d, h) and a load variation factor per (t,d,h).
struct Scenario {
    int id = 0;
    double probability = 0.0;
    std::vector<std::vector<double>> res_availability;  // [res][t*D*H + d*H + h]
    std::vector<double> load_factor;                    // [t*D*H + d*H + h]
};

// Cumulative installed units per (catalog index, year), expanded from
// period-level decisions. X_k^0 = 0 (greenfield).
struct InvestmentPlan {
    std::vector<std::vector<int>> cumulative_units;  // [der][year-1]

    int at(int der, int year) const { return year <= 0 ? 0 : cumulative_units[der][year - 1]; }
    int added(int der, int year) const { return at(der, year) - at(der, year - 1); }

    void validate(const PlanningProblem& problem) const {
        if (cumulative_units.size() != problem.catalog.size())
            throw ValidationError("plan: one row per catalog entry required");
        for (std::size_t k = 0; k < cumulative_units.size(); ++k) {
            if (static_cast<int>(cumulative_units[k].size()) != problem.years)
                throw ValidationError("plan: one column per year required");
            int prev = 0;
            for (int t = 1; t <= problem.years; ++t) {
                int x = cumulative_units[k][t - 1];
                if (x < prev)
                    throw ValidationError("plan: units of '" + problem.catalog[k].id +
                                          "' decrease at year " + std::to_string(t));
                if (x > problem.catalog[k].install_limit)
                    throw ValidationError("plan: units of '" + problem.catalog[k].id +
                                          "' exceed install_limit");
                prev = x;
            }
            int p0 = problem.period_of_year(1);
            for (int t = 2; t <= problem.years; ++t) {
                if (problem.period_of_year(t) == problem.period_of_year(t - 1) &&
                    cumulative_units[k][t - 1] != cumulative_units[k][t - 2])
                    throw ValidationError("plan: units of '" + problem.catalog[k].id +
                                          "' change inside a period");
            }
            (void)p0;
        }
    }
};

namespace detail {

inline const nlohmann::json& require_key(const nlohmann::json& j, const std::string& key,
                                         const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) throw ValidationError(where + ": missing key '" + key + "'");
    return *it;
}

inline double num(const nlohmann::json& j, const std::string& key, const std::string& where) {
    const auto& v = require_key(j, key, where);
    if (!v.is_number()) throw ValidationError(where + "." + key + ": expected a number");
    return v.get<double>();
}

inline double num_or(const nlohmann::json& j, const std::string& key, double fallback) {
    auto it = j.find(key);
    return it == j.end() ? fallback : it->get<double>();
}

}  // namespace detail

inline PlanningProblem problem_from_json(const nlohmann::json& j) {
    using detail::num;
    using detail::num_or;
    using detail::require_key;
    PlanningProblem p;
    const auto& horizon = require_key(j, "horizon", "problem");
    p.years = static_cast<int>(num(horizon, "years", "horizon"));
    p.typical_days = static_cast<int>(num(horizon, "typical_days", "horizon"));
    p.hours = static_cast<int>(num_or(horizon, "hours", 24));
    for (const auto& pr : require_key(horizon, "periods", "horizon"))
        p.periods.emplace_back(pr.at(0).get<int>(), pr.at(1).get<int>());

    const auto& econ = require_key(j, "economics", "problem");
    p.discount_rate = num(econ, "discount_rate", "economics");
    p.demand_forecast = require_key(econ, "demand_forecast", "economics").get<std::vector<double>>();
    p.long_term_reserve =
        require_key(econ, "long_term_reserve", "economics").get<std::vector<double>>();
    p.annual_invest_cap = num(econ, "annual_invest_cap", "economics");
    p.curtailment_penalty = num(econ, "curtailment_penalty", "economics");

    const auto& policy = require_key(j, "policy", "problem");
    p.dfg_min_ratio = num(policy, "dfg_min_ratio", "policy");
    p.deviation_factor = num(policy, "deviation_factor", "policy");
    p.risk_tolerance = num(policy, "risk_tolerance", "policy");
    if (auto it = policy.find("short_term_reserve"); it != policy.end()) {
        const auto& r = *it;
        std::string mode = r.value("mode", "fraction_of_load");
        if (mode == "fraction_of_load") {
            p.short_term_reserve.mode = ReserveRule::Mode::FractionOfLoad;
            p.short_term_reserve.fraction = num(r, "fraction", "short_term_reserve");
        } else if (mode == "explicit") {
            p.short_term_reserve.mode = ReserveRule::Mode::Explicit;
            p.short_term_reserve.values =
                require_key(r, "values", "short_term_reserve").get<std::vector<double>>();
        } else {
            throw ValidationError("short_term_reserve.mode must be fraction_of_load or explicit");
        }
    }

    for (const auto& dj : require_key(j, "catalog", "problem")) {
        DerSpec d;
        d.id = require_key(dj, "id", "catalog").get<std::string>();
        std::string where = "catalog['" + d.id + "']";
        std::string kind = require_key(dj, "kind", where).get<std::string>();
        if (kind == "RES") d.kind = DerKind::RES;
        else if (kind == "DFG") d.kind = DerKind::DFG;
        else if (kind == "ESS") d.kind = DerKind::ESS;
        else throw ValidationError(where + ".kind must be RES, DFG, or ESS");
        d.rated_power = num(dj, "rated_power", where);
        d.install_limit = static_cast<int>(num(dj, "install_limit", where));
        d.om_rate = num_or(dj, "om_rate", 0.0);
        if (d.kind == DerKind::RES) {
            std::string res = require_key(dj, "resource", where).get<std::string>();
            if (res == "wind") d.resource = ResResource::Wind;
            else if (res == "solar") d.resource = ResResource::Solar;
            else throw ValidationError(where + ".resource must be wind or solar");
            d.capital_cost = num(dj, "capital_cost", where);
        } else if (d.kind == DerKind::DFG) {
            d.capital_cost = num(dj, "capital_cost", where);
            d.min_output = num_or(dj, "min_output", 0.0);
            d.fuel_cost = num(dj, "fuel_cost", where);
            d.ramp_up = num(dj, "ramp_up", where);
            d.ramp_down = num(dj, "ramp_down", where);
        } else {
            d.power_cost = num(dj, "power_cost", where);
            d.energy_cost = num(dj, "energy_cost", where);
            d.rated_energy = num(dj, "rated_energy", where);
            d.min_energy = num_or(dj, "min_energy", 0.0);
            d.efficiency = num(dj, "efficiency", where);
        }
        p.catalog.push_back(std::move(d));
    }
    p.validate();
    return p;
}

inline PlanningProblem load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open problem file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("problem file '" + path + "' is not valid JSON: " + e.what());
    }
    return problem_from_json(j);
}

// Full result of a solve: the robustness horizon, the plan, the scenario
// indicator bits, per-scenario dispatch costs, and audit totals.
struct PlanSolution {
    std::string variant;
    std::string status;
    double alpha = 0.0;
    double objective = 0.0;   // alpha for igd/ccigd variants, total budget for dt
    double lambda0 = 0.0;
    double budget_cap = 0.0;  // (1+sigma)*lambda0; 0 when not applicable
    double first_stage_cost = 0.0;
    InvestmentPlan plan;
    std::vector<int> z;                       // scenario indicator bits
    std::vector<double> scenario_costs;       // recourse cost per scenario
    int iterations = 0;
    double gap = 0.0;
    // Hourly dispatch per kept scenario when requested: [scenario][var name -> series].
    std::vector<std::vector<std::pair<std::string, std::vector<double>>>> dispatch;
};

}  // namespace migplan
