#pragma once

#include <cctype>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "migplan/milp/branch_and_bound.hpp"

namespace migplan::milp {

// Plug-in point for external solvers. The built-in kernel registers itself
// under "internal"; config key solver.backend = "external:<name>" resolves
// <name> here.
class SolverBackend {
public:
    virtual ~SolverBackend() = default;
    virtual std::string name() const = 0;
    virtual SolveResult solve_lp(const StandardFormModel& model, const LpOptions& opt) = 0;
    virtual SolveResult solve_mip(const StandardFormModel& model, const MipOptions& opt) = 0;
};

namespace detail {

class InternalBackend final : public SolverBackend {
public:
    std::string name() const override { return "internal"; }
    SolveResult solve_lp(const StandardFormModel& model, const LpOptions& opt) override {
        return solve_lp_internal(model, opt);
    }
    SolveResult solve_mip(const StandardFormModel& model, const MipOptions& opt) override {
        return solve_mip_internal(model, opt);
    }
};

inline std::map<std::string, std::shared_ptr<SolverBackend>>& backend_registry() {
    static std::map<std::string, std::shared_ptr<SolverBackend>> reg = {
        {"internal", std::make_shared<InternalBackend>()}};
    return reg;
}

}  // namespace detail

inline void register_backend(std::shared_ptr<SolverBackend> backend) {
    detail::backend_registry()[backend->name()] = std::move(backend);
}

// Resolves a solver.backend config value: "internal" or "external:<name>".
inline SolverBackend& backend_from_config(const std::string& key) {
    std::string name = key.empty() ? "internal" : key;
    if (name.rfind("external:", 0) == 0) name = name.substr(9);
    auto& reg = detail::backend_registry();
    auto it = reg.find(name);
    if (it == reg.end()) throw ValidationError("unknown solver backend '" + key + "'");
    return *it->second;
}

inline SolveResult solve_lp(const StandardFormModel& model, const LpOptions& opt = {},
                            const std::string& backend = "internal") {
    return backend_from_config(backend).solve_lp(model, opt);
}

inline SolveResult solve_mip(const StandardFormModel& model, double gap_tol = 1e-6,
                             double time_limit_sec = kInf,
                             const std::string& backend = "internal") {
    MipOptions opt;
    opt.gap_tol = gap_tol;
    opt.time_limit_sec = time_limit_sec;
    return backend_from_config(backend).solve_mip(model, opt);
}

inline SolveResult solve_mip(const StandardFormModel& model, const MipOptions& opt,
                             const std::string& backend = "internal") {
    return backend_from_config(backend).solve_mip(model, opt);
}

namespace detail {
inline std::string lp_safe(const std::string& name) {
    std::string out;
    out.reserve(name.size());
    for (char c : name)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.') ? c : '_';
    if (out.empty() || std::isdigit(static_cast<unsigned char>(out[0]))) out.insert(0, "v_");
    return out;
}
}  // namespace detail

// Text dump in LP format for external debugging.
inline void write_lp_format(const StandardFormModel& model, std::ostream& os) {
    os << (model.obj_sense == ObjSense::Min ? "Minimize" : "Maximize") << "\n obj:";
    for (int j = 0; j < model.num_variables(); ++j) {
        double c = model.objective[j];
        if (c == 0.0) continue;
        os << (c >= 0 ? " + " : " - ") << std::abs(c) << " "
           << detail::lp_safe(model.variables[j].name);
    }
    os << "\nSubject To\n";
    for (const auto& row : model.constraints) {
        os << " " << detail::lp_safe(row.name) << ":";
        if (row.coeffs.empty()) os << " 0 " << detail::lp_safe(model.variables[0].name);
        for (auto [j, v] : row.coeffs)
            os << (v >= 0 ? " + " : " - ") << std::abs(v) << " "
               << detail::lp_safe(model.variables[j].name);
        const char* op = row.sense == Sense::LE ? "<=" : row.sense == Sense::GE ? ">=" : "=";
        os << " " << op << " " << row.rhs << "\n";
    }
    os << "Bounds\n";
    for (const auto& v : model.variables) {
        os << " ";
        if (std::isfinite(v.lower))
            os << v.lower << " <= " << detail::lp_safe(v.name);
        else
            os << "-inf <= " << detail::lp_safe(v.name);
        if (std::isfinite(v.upper)) os << " <= " << v.upper;
        os << "\n";
    }
    bool any_int = false;
    for (const auto& v : model.variables)
        if (v.integral) {
            if (!any_int) os << "General\n";
            any_int = true;
            os << " " << detail::lp_safe(v.name) << "\n";
        }
    os << "End\n";
}

inline std::string to_lp_format(const StandardFormModel& model) {
    std::ostringstream ss;
    write_lp_format(model, ss);
    return ss.str();
}

}  // namespace migplan::milp
