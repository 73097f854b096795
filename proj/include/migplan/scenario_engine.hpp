#pragma once

#include <array>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "migplan/data_model.hpp"
#include "migplan/rng.hpp"

namespace migplan {

enum class ScenarioProvenance { Generated, Reduced, Loaded };

inline const char* to_string(ScenarioProvenance p) {
    switch (p) {
        case ScenarioProvenance::Generated: return "generated";
        case ScenarioProvenance::Reduced: return "reduced";
        case ScenarioProvenance::Loaded: return "loaded";
    }
    return "?";
}

struct ScenarioSet {
    std::vector<Scenario> scenarios;
    std::uint64_t seed = 0;
    ScenarioProvenance provenance = ScenarioProvenance::Generated;
    int source_size = 0;  // pre-reduction N
    int years = 0, days = 0, hours = 0;
    std::vector<std::string> res_ids;  // catalog order of RES entries

    int size() const { return static_cast<int>(scenarios.size()); }
    int points_per_series() const { return years * days * hours; }

    void validate() const {
        double total = 0.0;
        for (int n = 0; n < size(); ++n) {
            const auto& s = scenarios[n];
            if (s.id != n + 1) throw ValidationError("scenario ids must be dense 1..N");
            if (!(s.probability > 0) || s.probability > 1.0 + 1e-12)
                throw ValidationError("scenario probability outside (0,1]");
            total += s.probability;
            if (s.res_availability.size() != res_ids.size())
                throw ValidationError("scenario availability series count mismatch");
            for (const auto& series : s.res_availability) {
                if (static_cast<int>(series.size()) != points_per_series())
                    throw ValidationError("scenario availability series length mismatch");
                for (double v : series)
                    if (v < -1e-12 || v > 1.0 + 1e-12)
                        throw ValidationError("res availability outside [0,1]");
            }
            if (static_cast<int>(s.load_factor.size()) != points_per_series())
                throw ValidationError("scenario load series length mismatch");
            for (double v : s.load_factor)
                if (v < 0) throw ValidationError("load factor must be >= 0");
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw ValidationError("scenario probabilities must sum to 1 within 1e-9");
    }
};

// Per-day-type hourly shape curves plus dispersion parameters. Zero or
// omitted dispersion means the factor degenerates to its mean curve.
struct ProfileSpec {
    struct DayType {
        std::vector<double> wind_mean;    // capacity factor per hour, [0,1]
        std::vector<double> solar_mean;   // capacity factor per hour, [0,1]
        std::vector<double> load_mean;    // load factor per hour, > 0
        double wind_shape = 0.0;          // Weibull shape; 0 = deterministic
        double wind_scale = 0.0;          // Weibull scale, m/s
        std::vector<double> beta_a;       // solar attenuation per hour; empty = deterministic
        std::vector<double> beta_b;
        std::vector<double> load_sigma;   // lognormal sigma per hour; empty = deterministic
    };
    std::vector<DayType> day_types;

    void validate(int hours) const {
        if (day_types.empty()) throw ValidationError("profile: day_types must be nonempty");
        for (std::size_t d = 0; d < day_types.size(); ++d) {
            const auto& dt = day_types[d];
            std::string where = "profile.day_types[" + std::to_string(d) + "]";
            auto check_curve = [&](const std::vector<double>& c, const char* name, bool res) {
                if (static_cast<int>(c.size()) != hours)
                    throw ValidationError(where + "." + name + ": one entry per hour required");
                for (double v : c) {
                    if (res && (v < 0 || v > 1))
                        throw ValidationError(where + "." + name + ": values must be in [0,1]");
                    if (!res && !(v > 0))
                        throw ValidationError(where + "." + name + ": values must be > 0");
                }
            };
            check_curve(dt.wind_mean, "wind_mean", true);
            check_curve(dt.solar_mean, "solar_mean", true);
            check_curve(dt.load_mean, "load_mean", false);
            if (dt.wind_shape < 0 || dt.wind_scale < 0)
                throw ValidationError(where + ": wind dispersion must be positive where defined");
            if ((dt.wind_shape > 0) != (dt.wind_scale > 0))
                throw ValidationError(where + ": wind shape and scale go together");
            if (dt.beta_a.size() != dt.beta_b.size())
                throw ValidationError(where + ": beta_a and beta_b lengths differ");
            if (!dt.beta_a.empty() && static_cast<int>(dt.beta_a.size()) != hours)
                throw ValidationError(where + ": beta parameters need one entry per hour");
            for (std::size_t h = 0; h < dt.beta_a.size(); ++h)
                if (!(dt.beta_a[h] > 0) || !(dt.beta_b[h] > 0))
                    throw ValidationError(where + ": beta parameters must be > 0");
            if (!dt.load_sigma.empty() && static_cast<int>(dt.load_sigma.size()) != hours)
                throw ValidationError(where + ": load_sigma needs one entry per hour");
            for (double v : dt.load_sigma)
                if (v < 0) throw ValidationError(where + ": load_sigma must be >= 0");
        }
    }
};

namespace detail {

// Normalized turbine power curve: cut-in 3, rated 12, cut-out 25 m/s.
inline double power_curve(double v) {
    if (v < 3.0 || v > 25.0) return 0.0;
    if (v >= 12.0) return 1.0;
    return (v - 3.0) / 9.0;
}

// E[power_curve(V)], V ~ Weibull(shape, scale). By parts,
// int_3^12 (v-3)/9 dW = W(12) - (1/9) int_3^12 W(v) dv; the integral is done
// with Simpson's rule and the rated band [12,25] has closed-form mass.
inline double expected_power_factor(double shape, double scale) {
    auto survivor = [&](double v) { return std::exp(-std::pow(v / scale, shape)); };
    auto cdf = [&](double v) { return 1.0 - survivor(v); };
    const int steps = 512;
    double h = (12.0 - 3.0) / steps;
    double acc = 0.0;
    for (int i = 0; i <= steps; ++i) {
        double v = 3.0 + i * h;
        double w = (i == 0 || i == steps) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        acc += w * cdf(v);
    }
    acc *= h / 3.0;
    double ramp = cdf(12.0) - acc / 9.0;
    double rated = survivor(12.0) - survivor(25.0);
    return ramp + rated;
}

}  // namespace detail

// Nominal (mean-curve) profile used by the deterministic and IGD builders:
// availability per RES catalog entry and load factor, both per (t,d,h).
struct NominalProfile {
    std::vector<std::vector<double>> res_availability;  // [res][t*D*H + d*H + h]
    std::vector<double> load_factor;
    std::vector<std::string> res_ids;
};

inline NominalProfile nominal_profile(const ProfileSpec& spec, const PlanningProblem& problem) {
    spec.validate(problem.hours);
    if (static_cast<int>(spec.day_types.size()) != problem.typical_days)
        throw ValidationError("profile day-type count does not match problem typical_days");
    NominalProfile out;
    int T = problem.years, D = problem.typical_days, H = problem.hours;
    out.load_factor.resize(T * D * H);
    for (const auto& der : problem.catalog) {
        if (der.kind != DerKind::RES) continue;
        out.res_ids.push_back(der.id);
        std::vector<double> series(T * D * H);
        for (int t = 0; t < T; ++t)
            for (int d = 0; d < D; ++d)
                for (int h = 0; h < H; ++h) {
                    const auto& dt = spec.day_types[d];
                    series[(t * D + d) * H + h] = der.resource == ResResource::Wind
                                                      ? dt.wind_mean[h]
                                                      : dt.solar_mean[h];
                }
        out.res_availability.push_back(std::move(series));
    }
    for (int t = 0; t < T; ++t)
        for (int d = 0; d < D; ++d)
            for (int h = 0; h < H; ++h)
                out.load_factor[(t * D + d) * H + h] = spec.day_types[d].load_mean[h];
    return out;
}

// Probability-weighted mean of a scenario set, usable as a nominal profile
// when no ProfileSpec is on hand.
inline NominalProfile mean_profile(const ScenarioSet& set) {
    NominalProfile out;
    out.res_ids = set.res_ids;
    int pts = set.points_per_series();
    out.res_availability.assign(set.res_ids.size(), std::vector<double>(pts, 0.0));
    out.load_factor.assign(pts, 0.0);
    for (const auto& s : set.scenarios) {
        for (std::size_t r = 0; r < out.res_availability.size(); ++r)
            for (int i = 0; i < pts; ++i)
                out.res_availability[r][i] += s.probability * s.res_availability[r][i];
        for (int i = 0; i < pts; ++i) out.load_factor[i] += s.probability * s.load_factor[i];
    }
    return out;
}

// Monte Carlo generation. Deterministic in (spec, problem, count, seed); each
// scenario draws from its own substream so sharding cannot reorder values.
// Wind and solar modulators are normalized to mean 1 before scaling the mean
// curves, so generated first moments match the curves (up to [0,1] clamping).
inline ScenarioSet generate(const ProfileSpec& spec, const PlanningProblem& problem, int count,
                            std::uint64_t seed) {
    spec.validate(problem.hours);
    if (count < 1) throw ValidationError("generate: count must be >= 1");
    if (static_cast<int>(spec.day_types.size()) != problem.typical_days)
        throw ValidationError("profile day-type count does not match problem typical_days");

    ScenarioSet set;
    set.seed = seed;
    set.provenance = ScenarioProvenance::Generated;
    set.source_size = count;
    set.years = problem.years;
    set.days = problem.typical_days;
    set.hours = problem.hours;
    for (const auto& der : problem.catalog)
        if (der.kind == DerKind::RES) set.res_ids.push_back(der.id);

    const int T = set.years, D = set.days, H = set.hours;
    const int pts = T * D * H;
    std::vector<double> mean_wind_factor(D, 1.0);
    for (int d = 0; d < D; ++d) {
        const auto& dt = spec.day_types[d];
        if (dt.wind_shape > 0)
            mean_wind_factor[d] = detail::expected_power_factor(dt.wind_shape, dt.wind_scale);
    }

    set.scenarios.resize(count);
    for (int n = 0; n < count; ++n) {
        Sampler rng(substream_seed(seed, static_cast<std::uint64_t>(n)));
        Scenario s;
        s.id = n + 1;
        s.probability = 1.0 / count;
        // One physical wind and one solar series per scenario, broadcast to
        // every RES entry of that resource.
        std::vector<double> wind(pts), solar(pts);
        s.load_factor.resize(pts);
        for (int t = 0; t < T; ++t)
            for (int d = 0; d < D; ++d) {
                const auto& dt = spec.day_types[d];
                for (int h = 0; h < H; ++h) {
                    int i = (t * D + d) * H + h;
                    double wmod = 1.0;
                    if (dt.wind_shape > 0) {
                        double v = rng.weibull(dt.wind_shape, dt.wind_scale);
                        double denom = mean_wind_factor[d];
                        wmod = denom > 1e-12 ? detail::power_curve(v) / denom : 0.0;
                    }
                    wind[i] = std::min(1.0, std::max(0.0, dt.wind_mean[h] * wmod));
                    double smod = 1.0;
                    if (!dt.beta_a.empty()) {
                        double a = dt.beta_a[h], b = dt.beta_b[h];
                        smod = rng.beta(a, b) * (a + b) / a;
                    }
                    solar[i] = std::min(1.0, std::max(0.0, dt.solar_mean[h] * smod));
                    double lmod = 1.0;
                    if (!dt.load_sigma.empty() && dt.load_sigma[h] > 0)
                        lmod = rng.lognormal_mean1(dt.load_sigma[h]);
                    s.load_factor[i] = dt.load_mean[h] * lmod;
                }
            }
        for (const auto& der : problem.catalog) {
            if (der.kind != DerKind::RES) continue;
            s.res_availability.push_back(der.resource == ResResource::Wind ? wind : solar);
        }
        set.scenarios[n] = std::move(s);
    }
    set.validate();
    return set;
}

namespace detail {

inline double scenario_distance2(const Scenario& a, const Scenario& b) {
    double d2 = 0.0;
    for (std::size_t r = 0; r < a.res_availability.size(); ++r)
        for (std::size_t i = 0; i < a.res_availability[r].size(); ++i) {
            double d = a.res_availability[r][i] - b.res_availability[r][i];
            d2 += d * d;
        }
    for (std::size_t i = 0; i < a.load_factor.size(); ++i) {
        double d = a.load_factor[i] - b.load_factor[i];
        d2 += d * d;
    }
    return d2;
}

}  // namespace detail

// Fast-forward selection: iteratively keep the scenario that minimizes the
// probability-weighted distance of the unselected mass, then fold each
// dropped scenario's probability into its nearest kept one. Deterministic
// given input order; ties go to the lower index. With uniform_weights the
// kept scenarios are reweighted to 1/M instead.
inline ScenarioSet reduce(const ScenarioSet& set, int target, bool uniform_weights = false) {
    const int n = set.size();
    if (target < 1 || target > n) throw ValidationError("reduce: target must be in [1, N]");
    if (target == n) {
        ScenarioSet out = set;
        out.provenance = ScenarioProvenance::Reduced;
        out.source_size = n;
        return out;
    }
    std::vector<double> dist(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double d = std::sqrt(detail::scenario_distance2(set.scenarios[i], set.scenarios[j]));
            dist[static_cast<std::size_t>(i) * n + j] = d;
            dist[static_cast<std::size_t>(j) * n + i] = d;
        }

    std::vector<char> kept(n, 0);
    std::vector<int> selected;
    // c[k] = distance of k to its nearest kept scenario so far.
    std::vector<double> c(n, std::numeric_limits<double>::infinity());
    for (int round = 0; round < target; ++round) {
        int best_u = -1;
        double best_val = std::numeric_limits<double>::infinity();
        for (int u = 0; u < n; ++u) {
            if (kept[u]) continue;
            double val = 0.0;
            for (int k = 0; k < n; ++k) {
                if (kept[k] || k == u) continue;
                val += set.scenarios[k].probability *
                       std::min(c[k], dist[static_cast<std::size_t>(k) * n + u]);
            }
            if (val < best_val - 1e-15) {
                best_val = val;
                best_u = u;
            }
        }
        kept[best_u] = 1;
        selected.push_back(best_u);
        for (int k = 0; k < n; ++k)
            c[k] = std::min(c[k], dist[static_cast<std::size_t>(k) * n + best_u]);
    }
    std::sort(selected.begin(), selected.end());

    // Redistribute each dropped scenario's probability to its nearest kept.
    std::vector<double> weight(n, 0.0);
    for (int i : selected) weight[i] = set.scenarios[i].probability;
    for (int k = 0; k < n; ++k) {
        if (kept[k]) continue;
        int nearest = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int i : selected) {
            double d = dist[static_cast<std::size_t>(k) * n + i];
            if (d < best - 1e-15) {
                best = d;
                nearest = i;
            }
        }
        weight[nearest] += set.scenarios[k].probability;
    }

    ScenarioSet out;
    out.seed = set.seed;
    out.provenance = ScenarioProvenance::Reduced;
    out.source_size = n;
    out.years = set.years;
    out.days = set.days;
    out.hours = set.hours;
    out.res_ids = set.res_ids;
    double total = 0.0;
    for (int i : selected) total += weight[i];
    for (std::size_t p = 0; p < selected.size(); ++p) {
        Scenario s = set.scenarios[selected[p]];
        s.id = static_cast<int>(p) + 1;
        s.probability = uniform_weights ? 1.0 / target : weight[selected[p]] / total;
        out.scenarios.push_back(std::move(s));
    }
    out.validate();
    return out;
}

// Scenario file: magic + length-prefixed JSON header + raw little-endian f64
// payload. Round-trips are bit-exact.
inline constexpr char kScenarioMagic[8] = {'M', 'G', 'S', 'C', 'E', 'N', '0', '1'};

inline void save(const ScenarioSet& set, const std::string& path) {
    set.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    nlohmann::json header = {
        {"schema_version", 1},
        {"seed", set.seed},
        {"provenance", to_string(set.provenance)},
        {"source_size", set.source_size},
        {"count", set.size()},
        {"years", set.years},
        {"days", set.days},
        {"hours", set.hours},
        {"res_ids", set.res_ids},
    };
    std::string htext = header.dump();
    std::uint64_t hlen = htext.size();
    out.write(kScenarioMagic, sizeof(kScenarioMagic));
    out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
    auto write_doubles = [&](const std::vector<double>& v) {
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(v.size() * sizeof(double)));
    };
    for (const auto& s : set.scenarios) {
        double p = s.probability;
        out.write(reinterpret_cast<const char*>(&p), sizeof(p));
        for (const auto& series : s.res_availability) write_doubles(series);
        write_doubles(s.load_factor);
    }
    if (!out) throw IoError("failed writing scenario file '" + path + "'");
}

inline ScenarioSet load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open scenario file '" + path + "'");
    char magic[sizeof(kScenarioMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kScenarioMagic, sizeof(magic)) != 0)
        throw IoError("'" + path + "' is not a scenario file");
    std::uint64_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    if (!in || hlen > (1u << 20)) throw IoError("scenario file header corrupt");
    std::string htext(hlen, '\0');
    in.read(htext.data(), static_cast<std::streamsize>(hlen));
    if (!in) throw IoError("scenario file truncated in header");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(htext);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("scenario file header is not valid JSON: ") + e.what());
    }
    if (header.value("schema_version", 0) != 1)
        throw IoError("unsupported scenario file schema version");

    ScenarioSet set;
    set.seed = header.at("seed").get<std::uint64_t>();
    std::string prov = header.at("provenance").get<std::string>();
    set.provenance = prov == "generated"  ? ScenarioProvenance::Generated
                     : prov == "reduced" ? ScenarioProvenance::Reduced
                                         : ScenarioProvenance::Loaded;
    set.source_size = header.at("source_size").get<int>();
    set.years = header.at("years").get<int>();
    set.days = header.at("days").get<int>();
    set.hours = header.at("hours").get<int>();
    set.res_ids = header.at("res_ids").get<std::vector<std::string>>();
    int count = header.at("count").get<int>();
    int pts = set.points_per_series();

    auto read_doubles = [&](std::vector<double>& v, int len) {
        v.resize(len);
        in.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(sizeof(double) * len));
        if (!in) throw IoError("scenario file '" + path + "' truncated");
    };
    set.scenarios.resize(count);
    for (int n = 0; n < count; ++n) {
        Scenario& s = set.scenarios[n];
        s.id = n + 1;
        in.read(reinterpret_cast<char*>(&s.probability), sizeof(double));
        if (!in) throw IoError("scenario file '" + path + "' truncated");
        s.res_availability.resize(set.res_ids.size());
        for (auto& series : s.res_availability) read_doubles(series, pts);
        read_doubles(s.load_factor, pts);
    }
    char extra;
    if (in.read(&extra, 1)) throw IoError("scenario file '" + path + "' has trailing bytes");
    set.validate();
    return set;
}

inline ProfileSpec profile_from_json(const nlohmann::json& j) {
    ProfileSpec spec;
    for (const auto& dj : j.at("day_types")) {
        ProfileSpec::DayType dt;
        dt.wind_mean = dj.at("wind_mean").get<std::vector<double>>();
        dt.solar_mean = dj.at("solar_mean").get<std::vector<double>>();
        dt.load_mean = dj.at("load_mean").get<std::vector<double>>();
        if (auto it = dj.find("wind_weibull"); it != dj.end()) {
            dt.wind_shape = it->at("shape").get<double>();
            dt.wind_scale = it->at("scale").get<double>();
        }
        if (auto it = dj.find("solar_beta"); it != dj.end()) {
            dt.beta_a = it->at("alpha").get<std::vector<double>>();
            dt.beta_b = it->at("beta").get<std::vector<double>>();
        }
        if (auto it = dj.find("load_sigma"); it != dj.end()) {
            if (it->is_number())
                dt.load_sigma.assign(dt.load_mean.size(), it->get<double>());
            else
                dt.load_sigma = it->get<std::vector<double>>();
        }
        spec.day_types.push_back(std::move(dt));
    }
    return spec;
}

inline ProfileSpec load_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open profile file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("profile file '" + path + "' is not valid JSON: " + e.what());
    }
    return profile_from_json(j);
}

}  // namespace migplan
