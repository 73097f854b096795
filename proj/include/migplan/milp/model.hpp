#pragma once

#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "migplan/common.hpp"

namespace migplan::milp {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { LE, EQ, GE };
enum class ObjSense { Min, Max };

struct Variable {
    std::string name;
    double lower = 0.0;
    double upper = kInf;
    bool integral = false;
};

// One linear row: sparse coefficients over declared columns, a sense, and a
// right-hand side. `tag` names the semantic family the row belongs to
// (e.g. "power-balance"); duals are pulled out by tag.
struct Constraint {
    std::string name;
    std::string tag;
    std::vector<std::pair<int, double>> coeffs;
    Sense sense = Sense::LE;
    double rhs = 0.0;
};

// A mixed-integer linear program in standard inequality form. Columns are
// appended via add_variable and referenced by index in rows; names must be
// unique (checked by validate).
class StandardFormModel {
public:
    ObjSense obj_sense = ObjSense::Min;
    std::vector<double> objective;  // one entry per variable
    std::vector<Variable> variables;
    std::vector<Constraint> constraints;

    int add_variable(std::string name, double lower, double upper, bool integral = false,
                     double obj = 0.0) {
        variables.push_back(Variable{std::move(name), lower, upper, integral});
        objective.push_back(obj);
        return static_cast<int>(variables.size()) - 1;
    }

    Constraint& add_constraint(std::string name, std::string tag, Sense sense, double rhs) {
        constraints.push_back(Constraint{std::move(name), std::move(tag), {}, sense, rhs});
        return constraints.back();
    }

    int num_variables() const { return static_cast<int>(variables.size()); }
    int num_constraints() const { return static_cast<int>(constraints.size()); }

    std::size_t num_nonzeros() const {
        std::size_t nnz = 0;
        for (const auto& c : constraints) nnz += c.coeffs.size();
        return nnz;
    }

    bool has_integers() const {
        for (const auto& v : variables)
            if (v.integral) return true;
        return false;
    }

    // Map constraint name -> semantic role, per the dual-extraction contract.
    std::map<std::string, std::string> tags() const {
        std::map<std::string, std::string> out;
        for (const auto& c : constraints) out.emplace(c.name, c.tag);
        return out;
    }

    void validate() const {
        std::map<std::string, int> seen;
        for (int j = 0; j < num_variables(); ++j) {
            const auto& v = variables[j];
            if (v.lower > v.upper)
                throw ValidationError("variable '" + v.name + "': lower bound exceeds upper");
            if (std::isnan(v.lower) || std::isnan(v.upper))
                throw ValidationError("variable '" + v.name + "': NaN bound");
            if (++seen[v.name] > 1) throw ValidationError("duplicate variable name '" + v.name + "'");
        }
        seen.clear();
        for (const auto& c : constraints) {
            if (++seen[c.name] > 1) throw ValidationError("duplicate constraint name '" + c.name + "'");
            if (std::isnan(c.rhs)) throw ValidationError("constraint '" + c.name + "': NaN rhs");
            for (auto [j, v] : c.coeffs) {
                if (j < 0 || j >= num_variables())
                    throw ValidationError("constraint '" + c.name + "' references undeclared column");
                if (std::isnan(v) || std::isinf(v))
                    throw ValidationError("constraint '" + c.name + "': non-finite coefficient");
            }
        }
        if (objective.size() != variables.size())
            throw ValidationError("objective length does not match variable count");
    }
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::IterationLimit: return "iteration-limit";
    }
    return "?";
}

struct SolveResult {
    SolveStatus status = SolveStatus::IterationLimit;
    double objective = 0.0;
    std::vector<double> primal;         // per variable
    std::vector<double> duals;          // per constraint; pure-LP solves only
    std::vector<double> reduced_costs;  // per variable; pure-LP solves only
    double bound = 0.0;                 // best bound (MIP)
    double gap = 0.0;                   // |objective - bound| / max(1, |objective|)
    std::vector<double> incumbent_log;  // MIP incumbent objectives in discovery order
};

}  // namespace migplan::milp
