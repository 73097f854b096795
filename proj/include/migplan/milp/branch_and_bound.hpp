#pragma once

#include <chrono>
#include <queue>
#include <vector>

#include "migplan/milp/simplex.hpp"

namespace migplan::milp {

struct MipOptions {
    double gap_tol = 1e-6;
    double int_tol = 1e-6;
    double time_limit_sec = kInf;
    long node_limit = 5'000'000;
    LpOptions lp;
};

namespace detail {

// Best-first branch and bound over the simplex kernel. Branching picks the
// most fractional integer column; nodes are ordered by parent bound with
// insertion id as the tie-break, so runs are reproducible.
class BranchAndBound {
public:
    BranchAndBound(const StandardFormModel& model, const MipOptions& opt)
        : model_(model), opt_(opt) {
        sign_ = model.obj_sense == ObjSense::Max ? -1.0 : 1.0;
        for (int j = 0; j < model.num_variables(); ++j)
            if (model.variables[j].integral) int_cols_.push_back(j);
    }

    SolveResult solve() {
        auto t0 = std::chrono::steady_clock::now();
        SolveResult out;
        StandardFormModel work = model_;

        struct Node {
            double key;  // parent bound, internal (min) sense
            long id;
            std::vector<double> lo, up;  // bounds of integer columns
        };
        struct Cmp {
            bool operator()(const Node& a, const Node& b) const {
                if (a.key != b.key) return a.key > b.key;
                return a.id > b.id;
            }
        };
        std::priority_queue<Node, std::vector<Node>, Cmp> open;

        std::vector<double> root_lo(int_cols_.size()), root_up(int_cols_.size());
        for (std::size_t k = 0; k < int_cols_.size(); ++k) {
            // Integer columns get integral bounds up front.
            const auto& v = model_.variables[int_cols_[k]];
            root_lo[k] = std::isfinite(v.lower) ? std::ceil(v.lower - opt_.int_tol) : v.lower;
            root_up[k] = std::isfinite(v.upper) ? std::floor(v.upper + opt_.int_tol) : v.upper;
        }
        open.push(Node{-kInf, 0, std::move(root_lo), std::move(root_up)});
        long next_id = 1;

        bool have_inc = false;
        double inc_obj = kInf;  // internal sense
        std::vector<double> inc_primal;
        long nodes = 0;
        bool limit_hit = false;

        while (!open.empty()) {
            if (have_inc) {
                double bound = open.top().key;
                if (rel_gap(inc_obj, bound) <= opt_.gap_tol) break;
            }
            if (++nodes > opt_.node_limit) {
                limit_hit = true;
                break;
            }
            if (std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() >
                opt_.time_limit_sec) {
                limit_hit = true;
                break;
            }
            Node node = open.top();
            open.pop();
            if (have_inc && node.key >= inc_obj - prune_tol(inc_obj)) continue;

            for (std::size_t k = 0; k < int_cols_.size(); ++k) {
                work.variables[int_cols_[k]].lower = node.lo[k];
                work.variables[int_cols_[k]].upper = node.up[k];
                if (node.lo[k] > node.up[k]) goto node_done;  // empty branch
            }
            {
                SolveResult lp = solve_lp_relaxation(work);
#ifdef MIGPLAN_BB_DEBUG
                std::fprintf(stderr, "[bb] node %ld key=%g lp=%s obj=%g\n", nodes, node.key,
                             to_string(lp.status), lp.objective);
#endif
                if (lp.status == SolveStatus::Infeasible) goto node_done;
                if (lp.status == SolveStatus::Unbounded) {
                    if (nodes == 1) {
                        out.status = SolveStatus::Unbounded;
                        return out;
                    }
                    goto node_done;
                }
                if (lp.status == SolveStatus::IterationLimit)
                    throw InternalError("node LP hit the iteration limit");
                double bound = sign_ * lp.objective;
                if (have_inc && bound >= inc_obj - prune_tol(inc_obj)) goto node_done;

                // Clamp to the node box first: LP feasibility drift must not
                // branch outside it, or a node could regenerate itself.
                for (std::size_t k = 0; k < int_cols_.size(); ++k) {
                    double& v = lp.primal[int_cols_[k]];
                    v = std::min(std::max(v, node.lo[k]), node.up[k]);
                }
                int branch_col = -1;
                std::size_t branch_k = 0;
                double best_frac = opt_.int_tol;
                for (std::size_t k = 0; k < int_cols_.size(); ++k) {
                    double v = lp.primal[int_cols_[k]];
                    double frac = std::abs(v - std::round(v));
                    if (frac > best_frac + 1e-12) {
                        best_frac = frac;
                        branch_col = int_cols_[k];
                        branch_k = k;
                    }
                }
                if (branch_col < 0) {
                    // Integral within tolerance: round and take as incumbent.
                    for (int j : int_cols_) lp.primal[j] = std::round(lp.primal[j]);
                    double obj = 0.0;
                    for (int j = 0; j < model_.num_variables(); ++j)
                        obj += model_.objective[j] * lp.primal[j];
                    double internal = sign_ * obj;
                    if (!have_inc || internal < inc_obj - 1e-12) {
                        have_inc = true;
                        inc_obj = internal;
                        inc_primal = lp.primal;
                        out.incumbent_log.push_back(obj);
                    }
                    goto node_done;
                }
                double v = lp.primal[branch_col];
#ifdef MIGPLAN_BB_DEBUG
                std::fprintf(stderr, "[bb]   branch on %s = %g\n",
                             model_.variables[branch_col].name.c_str(), v);
#endif
                Node down{bound, next_id++, node.lo, node.up};
                down.up[branch_k] = std::floor(v);
                Node upn{bound, next_id++, std::move(node.lo), std::move(node.up)};
                upn.lo[branch_k] = std::ceil(v);
                open.push(std::move(down));
                open.push(std::move(upn));
            }
        node_done:;
        }

        double best_open = open.empty() ? inc_obj : std::min(open.top().key, inc_obj);
        if (have_inc) {
            out.status = limit_hit && rel_gap(inc_obj, best_open) > opt_.gap_tol
                             ? SolveStatus::IterationLimit
                             : SolveStatus::Optimal;
            out.objective = sign_ * inc_obj;
            out.primal = inc_primal;
            out.bound = sign_ * best_open;
            out.gap = rel_gap(inc_obj, best_open);
        } else if (limit_hit) {
            out.status = SolveStatus::IterationLimit;
            out.objective = sign_ * kInf;
            out.bound = open.empty() ? sign_ * kInf : sign_ * open.top().key;
            out.gap = kInf;
        } else {
            out.status = SolveStatus::Infeasible;
        }
        return out;
    }

private:
    static double rel_gap(double inc, double bound) {
        if (!std::isfinite(bound)) return kInf;
        return std::abs(inc - bound) / std::max(1.0, std::abs(inc));
    }
    static double prune_tol(double inc) { return 1e-9 * std::max(1.0, std::abs(inc)); }

    SolveResult solve_lp_relaxation(const StandardFormModel& work) const {
        detail::BoundedSimplex spx(work, opt_.lp);
        return spx.solve(work);
    }

    const StandardFormModel& model_;
    MipOptions opt_;
    double sign_;
    std::vector<int> int_cols_;
};

}  // namespace detail

inline SolveResult solve_mip_internal(const StandardFormModel& model, const MipOptions& opt = {}) {
    model.validate();
    if (opt.gap_tol < 0) throw ValidationError("gap_tol must be nonnegative");
    if (!model.has_integers()) {
        StandardFormModel relaxed = model;
        SolveResult res = solve_lp_internal(relaxed, opt.lp);
        res.bound = res.objective;
        res.gap = 0.0;
        return res;
    }
    detail::BranchAndBound bb(model, opt);
    return bb.solve();
}

}  // namespace migplan::milp
