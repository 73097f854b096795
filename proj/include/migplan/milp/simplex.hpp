#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <vector>

#include "migplan/milp/model.hpp"

namespace migplan::milp {

struct LpOptions {
    double feas_tol = 1e-6;  // external feasibility contract (absolute)
    double opt_tol = 1e-9;   // dual feasibility on reduced costs
    long max_iter = 0;       // 0 => 2000 + 200*(m+n)
};

namespace detail {

// Revised simplex for LPs with general column bounds. Rows are converted to
// equalities with one logical (slack) column each; an explicit dense basis
// inverse is maintained with eta updates and periodic refactorization.
// Phase 1 minimizes the sum of artificial columns. Pricing is devex
// (approximate steepest edge); after 5*m consecutive degenerate pivots the
// rule switches to Bland's until progress resumes. All tie-breaks are by
// lowest column index so identical inputs give identical runs.
class BoundedSimplex {
public:
    BoundedSimplex(const StandardFormModel& model, const LpOptions& opt) : opt_(opt) {
        m_ = model.num_constraints();
        nstruct_ = model.num_variables();
        sign_ = model.obj_sense == ObjSense::Max ? -1.0 : 1.0;

        cols_.resize(nstruct_ + m_);
        cost_.assign(nstruct_ + m_, 0.0);
        lo_.resize(nstruct_ + m_);
        up_.resize(nstruct_ + m_);
        for (int j = 0; j < nstruct_; ++j) {
            cost_[j] = sign_ * model.objective[j];
            lo_[j] = model.variables[j].lower;
            up_[j] = model.variables[j].upper;
        }
        b_.resize(m_);
        for (int i = 0; i < m_; ++i) {
            const auto& row = model.constraints[i];
            b_[i] = row.rhs;
            for (auto [j, v] : row.coeffs)
                if (v != 0.0) cols_[j].emplace_back(i, v);
            int s = nstruct_ + i;
            cols_[s].emplace_back(i, 1.0);
            switch (row.sense) {
                case Sense::LE: lo_[s] = 0.0; up_[s] = kInf; break;
                case Sense::GE: lo_[s] = -kInf; up_[s] = 0.0; break;
                case Sense::EQ: lo_[s] = 0.0; up_[s] = 0.0; break;
            }
        }
        art_start_ = nstruct_ + m_;
    }

    SolveResult solve(const StandardFormModel& model) {
        SolveResult res;
        init_point();
        long budget = opt_.max_iter > 0 ? opt_.max_iter : 2000 + 200L * (m_ + ncols());

        if (need_phase1_) {
            std::vector<double> phase1(ncols(), 0.0);
            for (int j = art_start_; j < ncols(); ++j) phase1[j] = 1.0;
            LoopExit ex = run(phase1, budget, /*phase1=*/true);
            if (ex == LoopExit::IterLimit) {
                res.status = SolveStatus::IterationLimit;
                extract(model, res, false);
                return res;
            }
            // Phase-1 optimum > 0 signals infeasibility, but judge it per row
            // so one large-magnitude rhs cannot mask (or fake) a violation.
            refactor();
            if (structural_infeasibility() > opt_.feas_tol) {
                res.status = SolveStatus::Infeasible;
                return res;
            }
#ifdef MIGPLAN_SPX_DEBUG
            {
                double bviol = 0;
                for (int j = 0; j < ncols(); ++j)
                    bviol = std::max({bviol, lo_[j] - value_[j], value_[j] - up_[j]});
                std::fprintf(stderr, "[spx] end phase1: infeas=%.3e bound-violation=%.3e\n",
                             infeas, bviol);
            }
#endif
            retire_artificials();
#ifdef MIGPLAN_SPX_DEBUG
            {
                double bviol = 0;
                for (int j = 0; j < ncols(); ++j)
                    bviol = std::max({bviol, lo_[j] - value_[j], value_[j] - up_[j]});
                std::fprintf(stderr, "[spx] after retire: bound-violation=%.3e\n", bviol);
            }
#endif
        }

        LoopExit ex = run(cost_, budget, /*phase1=*/false);
        switch (ex) {
            case LoopExit::Optimal: res.status = SolveStatus::Optimal; break;
            case LoopExit::Unbounded: res.status = SolveStatus::Unbounded; return res;
            case LoopExit::IterLimit: res.status = SolveStatus::IterationLimit; break;
        }
#ifdef MIGPLAN_SPX_DEBUG
        {
            double eqres = 0, bviol = 0;
            std::vector<double> act(m_, 0.0);
            for (int j = 0; j < ncols(); ++j)
                for (auto [i, v] : cols_[j]) act[i] += v * value_[j];
            for (int i = 0; i < m_; ++i) eqres = std::max(eqres, std::abs(act[i] - b_[i]));
            for (int j = 0; j < ncols(); ++j) {
                bviol = std::max(bviol, lo_[j] - value_[j]);
                bviol = std::max(bviol, value_[j] - up_[j]);
            }
            std::fprintf(stderr, "[spx] eq-residual=%.3e bound-violation=%.3e\n", eqres, bviol);
        }
#endif
        extract(model, res, res.status == SolveStatus::Optimal);
        return res;
    }

private:
    enum class LoopExit { Optimal, Unbounded, IterLimit };
    enum class St : uint8_t { Basic, AtLower, AtUpper, FreeZero };

    int ncols() const { return static_cast<int>(cols_.size()); }

    double bound_value(int j) const {
        if (status_[j] == St::AtLower) return lo_[j];
        if (status_[j] == St::AtUpper) return up_[j];
        return 0.0;
    }

    void init_point() {
        status_.assign(ncols(), St::AtLower);
        value_.assign(ncols(), 0.0);
        for (int j = 0; j < nstruct_; ++j) {
            if (std::isfinite(lo_[j])) {
                status_[j] = St::AtLower;
                value_[j] = lo_[j];
            } else if (std::isfinite(up_[j])) {
                status_[j] = St::AtUpper;
                value_[j] = up_[j];
            } else {
                status_[j] = St::FreeZero;
                value_[j] = 0.0;
            }
        }
        std::vector<double> act(m_, 0.0);
        for (int j = 0; j < nstruct_; ++j)
            if (value_[j] != 0.0)
                for (auto [i, v] : cols_[j]) act[i] += v * value_[j];

        basis_.assign(m_, -1);
        basic_row_.assign(ncols(), -1);
        need_phase1_ = false;
        for (int i = 0; i < m_; ++i) {
            int s = nstruct_ + i;
            double sv = b_[i] - act[i];
            if (sv >= lo_[s] - 1e-12 && sv <= up_[s] + 1e-12) {
                basis_[i] = s;
                status_[s] = St::Basic;
                value_[s] = sv;
            } else {
                double clamped = std::min(std::max(sv, lo_[s]), up_[s]);
                status_[s] = clamped == lo_[s] ? St::AtLower : St::AtUpper;
                value_[s] = clamped;
                double resid = sv - clamped;
                int a = ncols();
                cols_.push_back({{i, resid > 0 ? 1.0 : -1.0}});
                cost_.push_back(0.0);
                lo_.push_back(0.0);
                up_.push_back(kInf);
                status_.push_back(St::Basic);
                value_.push_back(std::abs(resid));
                basic_row_.push_back(-1);
                basis_[i] = a;
                need_phase1_ = true;
            }
        }
        for (int i = 0; i < m_; ++i) basic_row_[basis_[i]] = i;
        // The starting basis is diagonal: +1 for slack columns, +/-1 for
        // artificials (sign of the residual they absorb).
        binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
        for (int i = 0; i < m_; ++i) {
            double diag = cols_[basis_[i]].front().second;
            binv_[static_cast<std::size_t>(i) * m_ + i] = diag;
        }
    }

    // Rebuild the inverse from the basis columns (Gauss-Jordan with partial
    // pivoting) and recompute basic values from the nonbasic point.
    void refactor() {
        std::vector<double> B(static_cast<std::size_t>(m_) * m_, 0.0);
        for (int p = 0; p < m_; ++p)
            for (auto [i, v] : cols_[basis_[p]]) B[static_cast<std::size_t>(i) * m_ + p] = v;
        std::vector<double>& inv = binv_;
        inv.assign(static_cast<std::size_t>(m_) * m_, 0.0);
        for (int i = 0; i < m_; ++i) inv[static_cast<std::size_t>(i) * m_ + i] = 1.0;
        for (int col = 0; col < m_; ++col) {
            int piv = -1;
            double best = 1e-12;
            for (int i = col; i < m_; ++i) {
                double a = std::abs(B[static_cast<std::size_t>(i) * m_ + col]);
                if (a > best) {
                    best = a;
                    piv = i;
                }
            }
            if (piv < 0) throw InternalError("singular basis during refactorization");
            if (piv != col) {
                for (int k = 0; k < m_; ++k) {
                    std::swap(B[static_cast<std::size_t>(piv) * m_ + k],
                              B[static_cast<std::size_t>(col) * m_ + k]);
                    std::swap(inv[static_cast<std::size_t>(piv) * m_ + k],
                              inv[static_cast<std::size_t>(col) * m_ + k]);
                }
            }
            double d = B[static_cast<std::size_t>(col) * m_ + col];
            for (int k = 0; k < m_; ++k) {
                B[static_cast<std::size_t>(col) * m_ + k] /= d;
                inv[static_cast<std::size_t>(col) * m_ + k] /= d;
            }
            for (int i = 0; i < m_; ++i) {
                if (i == col) continue;
                double f = B[static_cast<std::size_t>(i) * m_ + col];
                if (f == 0.0) continue;
                for (int k = 0; k < m_; ++k) {
                    B[static_cast<std::size_t>(i) * m_ + k] -=
                        f * B[static_cast<std::size_t>(col) * m_ + k];
                    inv[static_cast<std::size_t>(i) * m_ + k] -=
                        f * inv[static_cast<std::size_t>(col) * m_ + k];
                }
            }
        }
        recompute_basics();
    }

    void recompute_basics() {
        std::vector<double> rhs = b_;
        for (int j = 0; j < ncols(); ++j) {
            if (status_[j] == St::Basic) continue;
            double v = bound_value(j);
            value_[j] = v;
            if (v != 0.0)
                for (auto [i, a] : cols_[j]) rhs[i] -= a * v;
        }
        for (int i = 0; i < m_; ++i) {
            const double* row = &binv_[static_cast<std::size_t>(i) * m_];
            double x = 0.0;
            for (int k = 0; k < m_; ++k) x += row[k] * rhs[k];
            value_[basis_[i]] = x;
        }
    }

    // Largest per-row violation of the original constraints, scaled by the
    // row's own rhs magnitude. Structural and slack columns count; artificial
    // columns are exactly the violation being measured.
    double structural_infeasibility() const {
        std::vector<double> act(m_, 0.0);
        for (int j = 0; j < art_start_ && j < ncols(); ++j)
            if (value_[j] != 0.0)
                for (auto [i, v] : cols_[j]) act[i] += v * value_[j];
        double worst = 0.0;
        for (int i = 0; i < m_; ++i) {
            double scale = std::max(1.0, std::abs(b_[i]));
            worst = std::max(worst, std::abs(act[i] - b_[i]) / scale);
        }
        return worst;
    }

    void compute_duals(const std::vector<double>& costs, std::vector<double>& y) const {
        y.assign(m_, 0.0);
        for (int i = 0; i < m_; ++i) {
            double cb = costs[basis_[i]];
            if (cb == 0.0) continue;
            const double* row = &binv_[static_cast<std::size_t>(i) * m_];
            for (int k = 0; k < m_; ++k) y[k] += cb * row[k];
        }
    }

    void recompute_reduced(const std::vector<double>& costs) {
        compute_duals(costs, y_);
        d_.assign(ncols(), 0.0);
        for (int j = 0; j < ncols(); ++j) {
            if (status_[j] == St::Basic) continue;
            double dj = costs[j];
            for (auto [i, v] : cols_[j]) dj -= y_[i] * v;
            d_[j] = dj;
        }
    }

    void ftran(int j, std::vector<double>& w) const {
        w.assign(m_, 0.0);
        for (auto [i, v] : cols_[j]) {
            const std::size_t col = static_cast<std::size_t>(i);
            for (int r = 0; r < m_; ++r) w[r] += v * binv_[static_cast<std::size_t>(r) * m_ + col];
        }
    }

    LoopExit run(const std::vector<double>& costs, long& budget, bool phase1) {
        recompute_reduced(costs);
        devex_.assign(ncols(), 1.0);
        long degen_run = 0;
        bool bland = false;
        bool fresh = false;
        double cmax = 1.0;
        for (double c : costs) cmax = std::max(cmax, std::abs(c));
        const double dtol = opt_.opt_tol * cmax;
        std::vector<double> w, sigma;

        while (true) {
            if (budget-- <= 0) return LoopExit::IterLimit;

            int q = -1;
            double q_dir = 0.0;
            if (!bland) {
                double best = 0.0;
                for (int j = 0; j < ncols(); ++j) {
                    if (status_[j] == St::Basic) continue;
                    if (!phase1 && j >= art_start_) continue;
                    double dj = d_[j];
                    double dir;
                    if (status_[j] == St::AtLower) {
                        if (lo_[j] == up_[j]) continue;  // fixed
                        if (dj >= -dtol) continue;
                        dir = 1.0;
                    } else if (status_[j] == St::AtUpper) {
                        if (dj <= dtol) continue;
                        dir = -1.0;
                    } else {  // FreeZero
                        if (std::abs(dj) <= dtol) continue;
                        dir = dj < 0 ? 1.0 : -1.0;
                    }
                    double score = dj * dj / devex_[j];
                    if (score > best + 1e-30) {
                        best = score;
                        q = j;
                        q_dir = dir;
                    }
                }
            } else {
                for (int j = 0; j < ncols() && q < 0; ++j) {
                    if (status_[j] == St::Basic) continue;
                    if (!phase1 && j >= art_start_) continue;
                    double dj = d_[j];
                    if (status_[j] == St::AtLower && lo_[j] != up_[j] && dj < -dtol) {
                        q = j;
                        q_dir = 1.0;
                    } else if (status_[j] == St::AtUpper && dj > dtol) {
                        q = j;
                        q_dir = -1.0;
                    } else if (status_[j] == St::FreeZero && std::abs(dj) > dtol) {
                        q = j;
                        q_dir = dj < 0 ? 1.0 : -1.0;
                    }
                }
            }

            if (q < 0) {
                if (!fresh && m_ > 0) {
                    refactor();
                    recompute_reduced(costs);
                    fresh = true;
                    continue;
                }
                return LoopExit::Optimal;
            }

            ftran(q, w);

            // Ratio test: two passes. The first finds the tightest blocking
            // step; the second picks, among blockers within a small band of
            // it, the one with the largest pivot magnitude. The entering
            // column's own bound range competes as a bound flip; a pivot wins
            // exact ties.
            auto basic_limit = [&](int i) -> double {
                double wi = q_dir * w[i];
                if (std::abs(wi) < 1e-9) return kInf;
                int bj = basis_[i];
                double lim;
                if (wi > 0) {
                    if (!std::isfinite(lo_[bj])) return kInf;
                    lim = (value_[bj] - lo_[bj]) / wi;
                } else {
                    if (!std::isfinite(up_[bj])) return kInf;
                    lim = (value_[bj] - up_[bj]) / wi;
                }
                return lim < 0 ? 0.0 : lim;
            };
            double flip_t = kInf;
            if (status_[q] == St::AtLower || status_[q] == St::AtUpper)
                flip_t = up_[q] - lo_[q];
            double basic_tmin = kInf;
            for (int i = 0; i < m_; ++i) basic_tmin = std::min(basic_tmin, basic_limit(i));
            if (!std::isfinite(basic_tmin) && !std::isfinite(flip_t)) {
                if (phase1) throw InternalError("phase-1 subproblem unbounded");
                return LoopExit::Unbounded;
            }
            bool do_flip = flip_t < basic_tmin - 1e-12 || !std::isfinite(basic_tmin);
            int r = -1;
            double t = flip_t;
            if (!do_flip) {
                double best_pivot = 0.0;
                for (int i = 0; i < m_; ++i) {
                    double lim = basic_limit(i);
                    if (lim <= basic_tmin + 1e-9) {
                        double p = std::abs(q_dir * w[i]);
                        if (p > best_pivot + 1e-12) {
                            best_pivot = p;
                            r = i;
                        }
                    }
                }
                if (r < 0) throw InternalError("ratio test found no blocking row");
                t = basic_limit(r);
            }

            // Move the iterate.
            if (t != 0.0) {
                for (int i = 0; i < m_; ++i) {
                    if (w[i] != 0.0) value_[basis_[i]] -= t * q_dir * w[i];
                }
            }
            degen_run = t <= 1e-10 ? degen_run + 1 : 0;
            if (!bland && degen_run > 5L * std::max(1, m_)) bland = true;
            if (bland && t > 1e-10) bland = false;

            if (do_flip) {
                status_[q] = status_[q] == St::AtLower ? St::AtUpper : St::AtLower;
                value_[q] = bound_value(q);
                fresh = false;
                continue;
            }

            value_[q] = bound_value(q) + q_dir * t;
            int leaving = basis_[r];
            double wr = w[r];

            // Devex weights and incremental reduced costs need the pivot row
            // of the outgoing inverse.
            sigma.assign(m_, 0.0);
            const double* brow = &binv_[static_cast<std::size_t>(r) * m_];
            for (int k = 0; k < m_; ++k) sigma[k] = brow[k];
            double dq = d_[q];
            double devex_q = devex_[q];
            for (int j = 0; j < ncols(); ++j) {
                if (status_[j] == St::Basic || j == q) continue;
                if (!phase1 && j >= art_start_) continue;
                double rho = 0.0;
                for (auto [i, v] : cols_[j]) rho += sigma[i] * v;
                if (rho == 0.0) continue;
                double ratio = rho / wr;
                d_[j] -= dq * ratio;
                double cand = ratio * ratio * devex_q;
                if (cand > devex_[j]) devex_[j] = cand;
            }
            d_[leaving] = -dq / wr;
            d_[q] = 0.0;
            devex_[leaving] = std::max(devex_q / (wr * wr), 1.0);

            double hit = q_dir * wr > 0 ? lo_[leaving] : up_[leaving];
            status_[leaving] = q_dir * wr > 0 ? St::AtLower : St::AtUpper;
            value_[leaving] = hit;
            basic_row_[leaving] = -1;
            status_[q] = St::Basic;
            basis_[r] = q;
            basic_row_[q] = r;

            // Eta update: row r scaled by 1/wr, other rows eliminated.
            double* rr = &binv_[static_cast<std::size_t>(r) * m_];
            for (int k = 0; k < m_; ++k) rr[k] /= wr;
            for (int i = 0; i < m_; ++i) {
                if (i == r || w[i] == 0.0) continue;
                double f = w[i];
                double* ri = &binv_[static_cast<std::size_t>(i) * m_];
                for (int k = 0; k < m_; ++k) ri[k] -= f * rr[k];
            }

            if (++pivots_since_factor_ >= 1000) {
                refactor();
                recompute_reduced(costs);
                devex_.assign(ncols(), 1.0);
                pivots_since_factor_ = 0;
            }
            fresh = false;
        }
    }

    // After phase 1, pivot zero-valued artificials out of the basis where a
    // usable pivot exists; redundant rows keep their artificial pinned to 0.
    void retire_artificials() {
        std::vector<double> w;
        for (int i = 0; i < m_; ++i) {
            int bj = basis_[i];
            if (bj < art_start_) continue;
            const double* brow = &binv_[static_cast<std::size_t>(i) * m_];
            int enter = -1;
            double best = 1e-7;
            for (int j = 0; j < art_start_; ++j) {
                if (status_[j] == St::Basic) continue;
                double rho = 0.0;
                for (auto [k, v] : cols_[j]) rho += brow[k] * v;
                if (std::abs(rho) > best) {
                    best = std::abs(rho);
                    enter = j;
                    break;  // lowest-index deterministic choice above threshold
                }
            }
            if (enter < 0) continue;
            ftran(enter, w);
            double wr = w[i];
            double entering_val = value_[enter];
            status_[enter] = St::Basic;
            status_[bj] = St::AtLower;
            value_[bj] = 0.0;
            basic_row_[bj] = -1;
            basis_[i] = enter;
            basic_row_[enter] = i;
            value_[enter] = entering_val;
            double* rr = &binv_[static_cast<std::size_t>(i) * m_];
            for (int k = 0; k < m_; ++k) rr[k] /= wr;
            for (int p = 0; p < m_; ++p) {
                if (p == i || w[p] == 0.0) continue;
                double f = w[p];
                double* rp = &binv_[static_cast<std::size_t>(p) * m_];
                for (int k = 0; k < m_; ++k) rp[k] -= f * rr[k];
            }
        }
        for (int j = art_start_; j < ncols(); ++j) {
            lo_[j] = up_[j] = 0.0;
            if (status_[j] != St::Basic) {
                status_[j] = St::AtLower;
                value_[j] = 0.0;
            }
        }
        refactor();
    }

    void extract(const StandardFormModel& model, SolveResult& res, bool with_duals) {
        res.primal.assign(nstruct_, 0.0);
        for (int j = 0; j < nstruct_; ++j) res.primal[j] = value_[j];
        double obj = 0.0;
        for (int j = 0; j < nstruct_; ++j) obj += model.objective[j] * res.primal[j];
        res.objective = obj;
        if (!with_duals) return;
        std::vector<double> y;
        compute_duals(cost_, y);
        res.duals.resize(m_);
        for (int i = 0; i < m_; ++i) res.duals[i] = sign_ * y[i];
        res.reduced_costs.assign(nstruct_, 0.0);
        for (int j = 0; j < nstruct_; ++j) {
            double dj = model.objective[j];
            for (auto [i, v] : cols_[j]) dj -= res.duals[i] * v;
            res.reduced_costs[j] = dj;
        }
    }

    LpOptions opt_;
    int m_ = 0;
    int nstruct_ = 0;
    int art_start_ = 0;
    double sign_ = 1.0;
    bool need_phase1_ = false;
    long pivots_since_factor_ = 0;
    std::vector<std::vector<std::pair<int, double>>> cols_;
    std::vector<double> cost_, lo_, up_, b_, value_, d_, y_, devex_;
    std::vector<double> binv_;
    std::vector<int> basis_, basic_row_;
    std::vector<St> status_;
};

}  // namespace detail

// Solves a pure LP with the built-in kernel. Integrality flags are a contract
// violation here; use solve_mip for models that carry them.
inline SolveResult solve_lp_internal(const StandardFormModel& model, const LpOptions& opt = {}) {
    model.validate();
    if (model.has_integers())
        throw ValidationError("solve_lp requires a pure LP (integrality flags set)");
    if (model.num_constraints() == 0) {
        // Box problem: each column sits at its favourable bound.
        SolveResult res;
        res.primal.assign(model.num_variables(), 0.0);
        double s = model.obj_sense == ObjSense::Max ? -1.0 : 1.0;
        for (int j = 0; j < model.num_variables(); ++j) {
            double c = s * model.objective[j];
            const auto& v = model.variables[j];
            double x = c > 0 ? v.lower : c < 0 ? v.upper : (std::isfinite(v.lower) ? v.lower : 0.0);
            if (!std::isfinite(x)) {
                res.status = SolveStatus::Unbounded;
                return res;
            }
            res.primal[j] = x;
            res.objective += model.objective[j] * x;
        }
        res.status = SolveStatus::Optimal;
        res.reduced_costs = model.objective;
        return res;
    }
    detail::BoundedSimplex spx(model, opt);
    return spx.solve(model);
}

}  // namespace migplan::milp
