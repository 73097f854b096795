#pragma once

// Hand-sized problems and scenario sets shared across the test suites. The
// catalogs are small enough that brute-force oracles stay fast, but they mix
// DFG/RES/ESS so every constraint family is exercised.

#include <string>
#include <vector>

#include "migplan/scenario_engine.hpp"

namespace fixtures {

using namespace migplan;

inline DerSpec dfg(std::string id, double pmax, double pmin, double cap, double om, double fuel,
                   int limit) {
    DerSpec d;
    d.id = std::move(id);
    d.kind = DerKind::DFG;
    d.rated_power = pmax;
    d.min_output = pmin;
    d.capital_cost = cap;
    d.om_rate = om;
    d.fuel_cost = fuel;
    d.ramp_up = pmax;
    d.ramp_down = pmax;
    d.install_limit = limit;
    return d;
}

inline DerSpec wind(std::string id, double pmax, double cap, int limit) {
    DerSpec d;
    d.id = std::move(id);
    d.kind = DerKind::RES;
    d.resource = ResResource::Wind;
    d.rated_power = pmax;
    d.capital_cost = cap;
    d.install_limit = limit;
    return d;
}

inline DerSpec battery(std::string id, double pmax, double emax, double pc, double ec, double eff,
                       int limit) {
    DerSpec d;
    d.id = std::move(id);
    d.kind = DerKind::ESS;
    d.rated_power = pmax;
    d.rated_energy = emax;
    d.power_cost = pc;
    d.energy_cost = ec;
    d.efficiency = eff;
    d.install_limit = limit;
    return d;
}

// Five tiny planning problems (T <= 3, D = 1, H <= 6, <= 4 DERs).
inline PlanningProblem tiny_problem(int variant) {
    PlanningProblem p;
    p.typical_days = 1;
    p.discount_rate = 0.05;
    p.annual_invest_cap = 1e9;
    p.curtailment_penalty = 5.0;
    p.dfg_min_ratio = 0.0;
    p.deviation_factor = 0.4;
    p.risk_tolerance = 0.0;
    p.short_term_reserve.fraction = 0.05;
    switch (variant) {
        case 0:
            p.years = 1;
            p.periods = {{1, 1}};
            p.hours = 2;
            p.demand_forecast = {100.0};
            p.long_term_reserve = {10.0};
            p.catalog = {dfg("G1", 60, 5, 300, 20, 0.10, 3)};
            break;
        case 1:
            p.years = 2;
            p.periods = {{1, 1}, {2, 2}};
            p.hours = 4;
            p.demand_forecast = {90.0, 110.0};
            p.long_term_reserve = {9.0, 11.0};
            p.catalog = {dfg("G1", 50, 5, 320, 25, 0.11, 4), wind("W1", 40, 150, 3)};
            break;
        case 2:
            p.years = 2;
            p.periods = {{1, 1}, {2, 2}};
            p.hours = 4;
            p.demand_forecast = {80.0, 100.0};
            p.long_term_reserve = {8.0, 10.0};
            p.catalog = {dfg("G1", 55, 0, 310, 22, 0.12, 4),
                         battery("B1", 30, 60, 150, 80, 0.9, 3)};
            break;
        case 3:
            p.years = 3;
            p.periods = {{1, 1}, {2, 3}};
            p.hours = 6;
            p.demand_forecast = {70.0, 85.0, 100.0};
            p.long_term_reserve = {7.0, 8.5, 10.0};
            p.catalog = {dfg("G1", 45, 4, 330, 18, 0.10, 4), wind("W1", 35, 140, 3),
                         battery("B1", 25, 50, 140, 90, 0.92, 3)};
            break;
        default:
            p.years = 2;
            p.periods = {{1, 2}};
            p.hours = 3;
            p.demand_forecast = {120.0, 140.0};
            p.long_term_reserve = {12.0, 14.0};
            p.catalog = {dfg("G1", 70, 8, 280, 15, 0.09, 3), dfg("G2", 50, 0, 360, 28, 0.07, 3)};
            break;
    }
    return p;
}

// Constant-valued nominal profile.
inline NominalProfile flat_profile(const PlanningProblem& p, double wind_avail, double solar_avail,
                                   double load) {
    NominalProfile out;
    int pts = p.years * p.typical_days * p.hours;
    for (const auto& der : p.catalog) {
        if (der.kind != DerKind::RES) continue;
        out.res_ids.push_back(der.id);
        out.res_availability.emplace_back(
            pts, der.resource == ResResource::Wind ? wind_avail : solar_avail);
    }
    out.load_factor.assign(pts, load);
    return out;
}

// Constant-valued scenario.
inline Scenario flat_scenario(const PlanningProblem& p, int id, double prob, double wind_avail,
                              double load) {
    Scenario s;
    s.id = id;
    s.probability = prob;
    int pts = p.years * p.typical_days * p.hours;
    for (const auto& der : p.catalog)
        if (der.kind == DerKind::RES) s.res_availability.emplace_back(pts, wind_avail);
    s.load_factor.assign(pts, load);
    return s;
}

inline ScenarioSet make_set(const PlanningProblem& p, std::vector<Scenario> scenarios,
                            std::uint64_t seed = 0) {
    ScenarioSet set;
    set.seed = seed;
    set.provenance = ScenarioProvenance::Loaded;
    set.source_size = static_cast<int>(scenarios.size());
    set.years = p.years;
    set.days = p.typical_days;
    set.hours = p.hours;
    for (const auto& der : p.catalog)
        if (der.kind == DerKind::RES) set.res_ids.push_back(der.id);
    for (std::size_t i = 0; i < scenarios.size(); ++i) scenarios[i].id = static_cast<int>(i) + 1;
    set.scenarios = std::move(scenarios);
    set.validate();
    return set;
}

// A small scenario set around the nominal point: per-scenario load scaling
// and wind availability pairs.
inline ScenarioSet scaled_set(const PlanningProblem& p,
                              const std::vector<std::pair<double, double>>& load_wind,
                              const std::vector<double>& probs) {
    std::vector<Scenario> scen;
    for (std::size_t i = 0; i < load_wind.size(); ++i)
        scen.push_back(flat_scenario(p, static_cast<int>(i) + 1, probs[i], load_wind[i].second,
                                     load_wind[i].first));
    return make_set(p, std::move(scen));
}

inline std::string fixture_path(const std::string& name) {
    return std::string(MIGPLAN_FIXTURE_DIR) + "/" + name;
}

}  // namespace fixtures
