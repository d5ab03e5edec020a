#include "pwcsbf/lp.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pwcsbf/errors.hpp"

namespace pwcsbf::lp {

namespace {

constexpr double kPivotTol = 1e-11;    // smallest acceptable pivot magnitude
constexpr double kSmallPivot = 1e-9;
constexpr double kRelPivot = 1e-9;
constexpr double kWeakRel = 1e-7;      // prefer alternatives to pivots this weak
constexpr double kResidTol = 1e-9;     // ftran residual tolerance per unit scale
constexpr double kHugeW = 1e9;         // ftran solution size marking a sick basis
constexpr double kEtaDropTol = 1e-13;  // eta entries below this are dropped
constexpr double kRatioTie = 1e-10;    // ratio-test tie window
constexpr int kStallTrigger = 1000;    // degenerate steps before intervention
constexpr int kMaxPerturbEpochs = 2;   // perturbation attempts before Bland's rule
constexpr double kPerturb = 1e-7;      // relative bound perturbation size

enum class VarState : unsigned char { basic, at_lower, at_upper, free_var, fixed };

// Product-form update: B_new = B_old * E with E = I + (w - e_r) e_r^T.
struct Eta {
    int pivot_row = 0;
    double pivot_value = 0.0;
    std::vector<std::pair<int, double>> entries;  // rows other than pivot_row
};

enum class LoopExit { optimal, unbounded, iteration_limit, numerical, stall };

void validate_problem(const Problem& p) {
    const std::size_t n = p.num_vars;
    if (p.objective.size() != n || p.var_lower.size() != n || p.var_upper.size() != n)
        throw LpSolverFailure("lp: variable array lengths disagree with num_vars");
    if (p.row_lower.size() != p.row_upper.size())
        throw LpSolverFailure("lp: row bound arrays have different lengths");
    if (p.entry_row.size() != p.entry_col.size() || p.entry_row.size() != p.entry_value.size())
        throw LpSolverFailure("lp: entry arrays have different lengths");
    const std::size_t m = p.row_lower.size();
    for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(p.objective[j]))
            throw LpSolverFailure("lp: objective coefficient is not finite");
        if (std::isnan(p.var_lower[j]) || std::isnan(p.var_upper[j]) ||
            p.var_lower[j] > p.var_upper[j])
            throw LpSolverFailure("lp: variable " + std::to_string(j) + " has inverted bounds");
    }
    for (std::size_t r = 0; r < m; ++r) {
        if (std::isnan(p.row_lower[r]) || std::isnan(p.row_upper[r]) ||
            p.row_lower[r] > p.row_upper[r])
            throw LpSolverFailure("lp: row " + std::to_string(r) + " has inverted bounds");
    }
    for (std::size_t e = 0; e < p.entry_row.size(); ++e) {
        if (p.entry_row[e] >= m || p.entry_col[e] >= n)
            throw LpSolverFailure("lp: entry " + std::to_string(e) + " is out of range");
        if (!std::isfinite(p.entry_value[e]))
            throw LpSolverFailure("lp: entry " + std::to_string(e) + " is not finite");
    }
}

class Simplex {
public:
    Simplex(const Problem& p, const Options& o) : opts_(o) { setup(p); }

    Solution run();

private:
    const Options& opts_;
    double feas_tol_ = 1e-9;
    double opt_tol_ = 1e-9;
    std::size_t max_iter_ = 0;
    std::size_t iterations_ = 0;

    int m_ = 0;        // rows
    int n_struct_ = 0; // structural columns
    int n_cols_ = 0;   // structural + logical + artificial columns

    // Column-compressed matrix over all columns, logicals are -e_r.
    std::vector<int> col_start_;
    std::vector<int> row_index_;
    std::vector<double> col_value_;
    // Row-compressed mirror, rebuilt when phase 1 appends columns; used to
    // scatter a sparse pivot row into per-column entries.
    std::vector<int> row_start_;
    std::vector<int> csr_col_;
    std::vector<double> csr_val_;
    int csr_cols_ = -1;

    std::vector<double> lb_, ub_, obj_;  // per column, obj_ is the phase-2 cost
    std::vector<double> value_;
    std::vector<VarState> state_;
    std::vector<int> basic_;     // basis position -> column
    std::vector<int> basic_pos_; // column -> basis position or -1

    // Pricing state: maintained reduced costs and Devex reference weights.
    std::vector<double> d_;
    std::vector<double> devex_;
    std::vector<double> alpha_;   // pivot-row scatter workspace, zero between uses
    std::vector<int> touched_;

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
    std::vector<Eta> etas_;

    Eigen::VectorXd work_y_, work_w_, work_rhs_, work_rho_, work_r2_;

    void setup(const Problem& p);
    void setup_initial_point();
    void reset_to_logical_basis();
    bool factorize();
    void compute_basic_values();
    void ftran(Eigen::VectorXd& v);
    void btran(Eigen::VectorXd& v);
    double column_dot(int j, const Eigen::VectorXd& y) const;
    void gather_column(int j, Eigen::VectorXd& out) const;
    double max_primal_violation() const;
    void build_csr();
    void price_full(std::span<const double> cost);
    LoopExit simplex_loop(std::span<const double> cost);
    LoopExit loop_leg(std::span<const double> cost, bool bland_fallback);
    void apply_bound_perturbation(int epoch);
    // Adds artificial columns for out-of-bound basics; solves the phase-1 LP.
    // Returns the loop exit; feasible receives the verdict on optimal exits.
    LoopExit phase1(bool& feasible);
    void snap_nonbasic_values();
};

void Simplex::setup(const Problem& p) {
    feas_tol_ = opts_.feasibility_tol;
    opt_tol_ = opts_.optimality_tol;
    m_ = static_cast<int>(p.num_rows());
    n_struct_ = static_cast<int>(p.num_vars);
    n_cols_ = n_struct_ + m_;
    max_iter_ = opts_.max_iterations != 0
                    ? opts_.max_iterations
                    : std::max<std::size_t>(20000, 20 * (p.num_vars + p.num_rows()));

    // Build CSC for the structural block, summing duplicate entries.
    std::vector<int> count(n_struct_, 0);
    for (std::size_t e = 0; e < p.entry_col.size(); ++e)
        if (p.entry_value[e] != 0.0) ++count[p.entry_col[e]];
    col_start_.assign(n_cols_ + 1, 0);
    for (int j = 0; j < n_struct_; ++j) col_start_[j + 1] = col_start_[j] + count[j];
    const int struct_nnz = col_start_[n_struct_];
    row_index_.resize(struct_nnz + m_);
    col_value_.resize(struct_nnz + m_);
    {
        std::vector<int> cursor(col_start_.begin(), col_start_.begin() + n_struct_);
        for (std::size_t e = 0; e < p.entry_col.size(); ++e) {
            if (p.entry_value[e] == 0.0) continue;
            const int pos = cursor[p.entry_col[e]]++;
            row_index_[pos] = static_cast<int>(p.entry_row[e]);
            col_value_[pos] = p.entry_value[e];
        }
    }
    // Sort each column by row and merge duplicates in place.
    int write = 0;
    std::vector<int> new_start(n_struct_ + 1, 0);
    std::vector<std::pair<int, double>> colbuf;
    for (int j = 0; j < n_struct_; ++j) {
        colbuf.clear();
        for (int k = col_start_[j]; k < col_start_[j + 1]; ++k)
            colbuf.emplace_back(row_index_[k], col_value_[k]);
        std::sort(colbuf.begin(), colbuf.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        new_start[j] = write;
        for (std::size_t k = 0; k < colbuf.size(); ++k) {
            if (write > new_start[j] && row_index_[write - 1] == colbuf[k].first) {
                col_value_[write - 1] += colbuf[k].second;
            } else {
                row_index_[write] = colbuf[k].first;
                col_value_[write] = colbuf[k].second;
                ++write;
            }
        }
        new_start[j + 1] = write;
    }
    for (int j = 0; j <= n_struct_; ++j) col_start_[j] = new_start[j];
    // Logical columns: -e_r.
    for (int r = 0; r < m_; ++r) {
        row_index_[write] = r;
        col_value_[write] = -1.0;
        ++write;
        col_start_[n_struct_ + r + 1] = write;
    }
    row_index_.resize(write);
    col_value_.resize(write);

    lb_.resize(n_cols_);
    ub_.resize(n_cols_);
    obj_.assign(n_cols_, 0.0);
    for (int j = 0; j < n_struct_; ++j) {
        lb_[j] = p.var_lower[j];
        ub_[j] = p.var_upper[j];
        obj_[j] = p.objective[j];
    }
    for (int r = 0; r < m_; ++r) {
        lb_[n_struct_ + r] = p.row_lower[r];
        ub_[n_struct_ + r] = p.row_upper[r];
    }

    work_y_.resize(m_);
    work_w_.resize(m_);
    work_rhs_.resize(m_);
    work_rho_.resize(m_);
}

void Simplex::build_csr() {
    if (csr_cols_ == n_cols_) return;
    csr_cols_ = n_cols_;
    const int nnz = col_start_[n_cols_];
    row_start_.assign(m_ + 1, 0);
    for (int e = 0; e < nnz; ++e) ++row_start_[row_index_[e] + 1];
    for (int r = 0; r < m_; ++r) row_start_[r + 1] += row_start_[r];
    csr_col_.resize(nnz);
    csr_val_.resize(nnz);
    std::vector<int> cursor(row_start_.begin(), row_start_.begin() + m_);
    for (int j = 0; j < n_cols_; ++j)
        for (int e = col_start_[j]; e < col_start_[j + 1]; ++e) {
            const int pos = cursor[row_index_[e]]++;
            csr_col_[pos] = j;
            csr_val_[pos] = col_value_[e];
        }
}

void Simplex::price_full(std::span<const double> cost) {
    for (int k = 0; k < m_; ++k) work_y_[k] = cost[basic_[k]];
    btran(work_y_);
    for (int j = 0; j < n_cols_; ++j)
        d_[j] = basic_pos_[j] >= 0 ? 0.0 : cost[j] - column_dot(j, work_y_);
}

void Simplex::setup_initial_point() {
    value_.assign(n_cols_, 0.0);
    state_.assign(n_cols_, VarState::at_lower);
    basic_.assign(m_, 0);
    basic_pos_.assign(n_cols_, -1);

    auto default_state = [&](int j) {
        if (lb_[j] == ub_[j]) {
            state_[j] = VarState::fixed;
            value_[j] = lb_[j];
        } else if (std::isfinite(lb_[j])) {
            state_[j] = VarState::at_lower;
            value_[j] = lb_[j];
        } else if (std::isfinite(ub_[j])) {
            state_[j] = VarState::at_upper;
            value_[j] = ub_[j];
        } else {
            state_[j] = VarState::free_var;
            value_[j] = 0.0;
        }
    };
    for (int j = 0; j < n_cols_; ++j) default_state(j);

    if (!opts_.initial_values.empty()) {
        if (opts_.initial_values.size() != static_cast<std::size_t>(n_struct_))
            throw LpSolverFailure("lp: initial_values length differs from num_vars");
        for (int j = 0; j < n_struct_; ++j) {
            if (state_[j] == VarState::fixed || state_[j] == VarState::free_var) continue;
            const double x = opts_.initial_values[j];
            const bool lo = std::isfinite(lb_[j]);
            const bool hi = std::isfinite(ub_[j]);
            if (lo && hi) {
                state_[j] = (x - lb_[j] <= ub_[j] - x) ? VarState::at_lower : VarState::at_upper;
            } else if (hi) {
                state_[j] = VarState::at_upper;
            } else {
                state_[j] = VarState::at_lower;
            }
            value_[j] = state_[j] == VarState::at_lower ? lb_[j] : ub_[j];
        }
    }

    if (opts_.initial_basis.empty()) {
        for (int r = 0; r < m_; ++r) {
            const int j = n_struct_ + r;
            basic_[r] = j;
            basic_pos_[j] = r;
            state_[j] = VarState::basic;
        }
        return;
    }
    if (opts_.initial_basis.size() != static_cast<std::size_t>(m_))
        throw LpSolverFailure("lp: initial_basis length differs from the number of rows");
    for (int r = 0; r < m_; ++r) {
        const std::size_t j = opts_.initial_basis[r];
        if (j >= static_cast<std::size_t>(n_cols_))
            throw LpSolverFailure("lp: initial_basis column index out of range");
        if (basic_pos_[j] >= 0)
            throw LpSolverFailure("lp: initial_basis repeats a column");
        basic_[r] = static_cast<int>(j);
        basic_pos_[j] = r;
        state_[j] = VarState::basic;
    }
}

void Simplex::reset_to_logical_basis() {
    for (int j = 0; j < n_cols_; ++j) basic_pos_[j] = -1;
    for (int j = 0; j < n_cols_; ++j) {
        if (state_[j] != VarState::basic) continue;
        if (lb_[j] == ub_[j]) {
            state_[j] = VarState::fixed;
            value_[j] = lb_[j];
        } else if (std::isfinite(lb_[j])) {
            state_[j] = VarState::at_lower;
            value_[j] = lb_[j];
        } else if (std::isfinite(ub_[j])) {
            state_[j] = VarState::at_upper;
            value_[j] = ub_[j];
        } else {
            state_[j] = VarState::free_var;
            value_[j] = 0.0;
        }
    }
    for (int r = 0; r < m_; ++r) {
        const int j = n_struct_ + r;
        basic_[r] = j;
        basic_pos_[j] = r;
        state_[j] = VarState::basic;
    }
}

bool Simplex::factorize() {
    etas_.clear();
    if (m_ == 0) return true;
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(m_) * 4);
    for (int k = 0; k < m_; ++k) {
        const int j = basic_[k];
        for (int e = col_start_[j]; e < col_start_[j + 1]; ++e)
            trips.emplace_back(row_index_[e], k, col_value_[e]);
    }
    Eigen::SparseMatrix<double> B(m_, m_);
    B.setFromTriplets(trips.begin(), trips.end());
    lu_.compute(B);
    return lu_.info() == Eigen::Success;
}

void Simplex::ftran(Eigen::VectorXd& v) {
    if (m_ == 0) return;
    v = lu_.solve(v);
    for (const Eta& eta : etas_) {
        const double alpha = v[eta.pivot_row] / eta.pivot_value;
        v[eta.pivot_row] = alpha;
        if (alpha != 0.0)
            for (const auto& [i, w] : eta.entries) v[i] -= alpha * w;
    }
}

void Simplex::btran(Eigen::VectorXd& v) {
    if (m_ == 0) return;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
        double acc = v[it->pivot_row];
        for (const auto& [i, w] : it->entries) acc -= w * v[i];
        v[it->pivot_row] = acc / it->pivot_value;
    }
    v = lu_.transpose().solve(v);
}

double Simplex::column_dot(int j, const Eigen::VectorXd& y) const {
    double acc = 0.0;
    for (int e = col_start_[j]; e < col_start_[j + 1]; ++e)
        acc += col_value_[e] * y[row_index_[e]];
    return acc;
}

void Simplex::gather_column(int j, Eigen::VectorXd& out) const {
    out.setZero();
    for (int e = col_start_[j]; e < col_start_[j + 1]; ++e)
        out[row_index_[e]] = col_value_[e];
}

void Simplex::snap_nonbasic_values() {
    for (int j = 0; j < n_cols_; ++j) {
        switch (state_[j]) {
            case VarState::at_lower:
            case VarState::fixed: value_[j] = lb_[j]; break;
            case VarState::at_upper: value_[j] = ub_[j]; break;
            case VarState::basic:
            case VarState::free_var: break;
        }
    }
}

void Simplex::compute_basic_values() {
    if (m_ == 0) return;
    snap_nonbasic_values();
    work_rhs_.setZero();
    for (int j = 0; j < n_cols_; ++j) {
        if (basic_pos_[j] >= 0 || value_[j] == 0.0) continue;
        const double x = value_[j];
        for (int e = col_start_[j]; e < col_start_[j + 1]; ++e)
            work_rhs_[row_index_[e]] -= col_value_[e] * x;
    }
    work_r2_ = work_rhs_;
    ftran(work_rhs_);
    // One step of iterative refinement: on an ill-conditioned basis the
    // direct solve alone can miss by more than the feasibility tolerance.
    for (int k = 0; k < m_; ++k) {
        const double xk = work_rhs_[k];
        if (xk == 0.0) continue;
        const int col = basic_[k];
        for (int e = col_start_[col]; e < col_start_[col + 1]; ++e)
            work_r2_[row_index_[e]] -= col_value_[e] * xk;
    }
    if (work_r2_.cwiseAbs().maxCoeff() > 0.0) {
        ftran(work_r2_);
        work_rhs_ += work_r2_;
    }
    for (int k = 0; k < m_; ++k) value_[basic_[k]] = work_rhs_[k];
}

double Simplex::max_primal_violation() const {
    double worst = 0.0;
    for (int k = 0; k < m_; ++k) {
        const int j = basic_[k];
        worst = std::max(worst, lb_[j] - value_[j]);
        worst = std::max(worst, value_[j] - ub_[j]);
    }
    return worst;
}

// One pricing-and-pivoting leg. With bland_fallback the leg switches to
// Bland's rule after a long degenerate stall; otherwise it reports the stall
// so the driver can break the degeneracy by perturbing bounds instead.
LoopExit Simplex::loop_leg(std::span<const double> cost, bool bland_fallback) {
    static const bool dbg = std::getenv("LPDEBUG") != nullptr;
    double dbg_wmax = 0.0;
    double dbg_tmax = 0.0;
    long dbg_refine = 0, dbg_rfact = 0, dbg_rshun = 0, dbg_huge = 0, dbg_tiny = 0,
         dbg_weak = 0, dbg_clean = 0, dbg_bland = 0;
    int degen_streak = 0;
    bool bland = false;
    // Columns rejected for numerically null pivot rows under the current
    // basis; re-admitted on clean passes before any optimal claim.
    std::vector<char> shunned(n_cols_, 0);
    bool any_shunned = false;
    int clean_passes = 0;
    // Columns whose best ratio-test pivot is weak relative to the column:
    // passed over while a strong alternative exists, accepted otherwise.
    // Marks are valid for one basis only.
    std::vector<long> weak_gen(n_cols_, -1);
    long weak_serial = 0;
    bool any_weak = false;

    // Reduced costs are maintained by pivot-row updates and re-priced exactly
    // at every refactorization and before any optimal claim, so drift can
    // steer the path but never the verdict.
    build_csr();
    d_.assign(n_cols_, 0.0);
    devex_.assign(n_cols_, 1.0);
    alpha_.assign(n_cols_, 0.0);
    price_full(cost);
    bool priced_exact = true;

    while (true) {
        if (iterations_ >= max_iter_) return LoopExit::iteration_limit;
        if (bland && !priced_exact) {
            price_full(cost);  // anti-cycling needs exact signs
            priced_exact = true;
        }

        // Entering column: best d^2 / weight under Devex reference weights;
        // lowest attractive index under Bland. The strict pass skips
        // weak-marked columns; they are admitted only when no strong
        // alternative remains.
        int entering = -1;
        int dir = 0;
        bool weak_ok = bland;
        for (int pass = 0; pass < 2 && entering < 0; ++pass) {
            if (pass == 1) {
                if (bland || !any_weak) break;
                weak_ok = true;
            }
            double best_score = 0.0;
            for (int j = 0; j < n_cols_; ++j) {
                if (basic_pos_[j] >= 0 || lb_[j] == ub_[j]) continue;
                if (any_shunned && shunned[j]) continue;
                if (!weak_ok && weak_gen[j] == weak_serial) continue;
                const double d = d_[j];
                int cand_dir = 0;
                switch (state_[j]) {
                    case VarState::at_lower:
                        if (d < -opt_tol_) cand_dir = 1;
                        break;
                    case VarState::at_upper:
                        if (d > opt_tol_) cand_dir = -1;
                        break;
                    case VarState::free_var:
                        if (d < -opt_tol_) cand_dir = 1;
                        else if (d > opt_tol_) cand_dir = -1;
                        break;
                    default: break;
                }
                if (cand_dir == 0) continue;
                if (bland) {
                    entering = j;
                    dir = cand_dir;
                    break;
                }
                const double score = d * d / devex_[j];
                if (score > best_score) {
                    best_score = score;
                    entering = j;
                    dir = cand_dir;
                }
            }
        }
        if (entering < 0) {
            if (!priced_exact) {
                price_full(cost);
                priced_exact = true;
                continue;
            }
            if (any_shunned && clean_passes < 3) {
                // Nothing attractive outside the shunned set: re-admit it and
                // re-price so a rejected column can never hide the optimum.
                ++dbg_clean;
                ++clean_passes;
                std::fill(shunned.begin(), shunned.end(), 0);
                any_shunned = false;
                if (!etas_.empty()) {
                    if (!factorize()) return LoopExit::numerical;
                    compute_basic_values();
                    price_full(cost);
                }
                continue;
            }
            if (any_shunned) {
                // Re-admissions are exhausted but a shunned column is still
                // attractive under exact prices: the claim would be wrong, so
                // report the basis as numerically stuck instead.
                for (int j = 0; j < n_cols_; ++j) {
                    if (!shunned[j] || basic_pos_[j] >= 0 || lb_[j] == ub_[j]) continue;
                    const double d = d_[j];
                    const bool att = (state_[j] == VarState::at_lower && d < -opt_tol_) ||
                                     (state_[j] == VarState::at_upper && d > opt_tol_) ||
                                     (state_[j] == VarState::free_var && std::abs(d) > opt_tol_);
                    if (att) return LoopExit::numerical;
                }
            }
            if (dbg) {
                for (int k = 0; k < m_; ++k) work_y_[k] = cost[basic_[k]];
                btran(work_y_);
                double pr = 0.0, ynorm = 0.0;
                for (int k = 0; k < m_; ++k) {
                    pr = std::max(pr, std::abs(column_dot(basic_[k], work_y_) - cost[basic_[k]]));
                    ynorm = std::max(ynorm, std::abs(work_y_[k]));
                }
                double dmin = 0.0;
                int datt = 0;
                for (int j = 0; j < n_cols_; ++j) {
                    if (basic_pos_[j] >= 0 || lb_[j] == ub_[j]) continue;
                    const double d = cost[j] - column_dot(j, work_y_);
                    const bool att = (state_[j] == VarState::at_lower && d < -opt_tol_) ||
                                     (state_[j] == VarState::at_upper && d > opt_tol_) ||
                                     (state_[j] == VarState::free_var && std::abs(d) > opt_tol_);
                    if (att) { ++datt; dmin = std::min(dmin, -std::abs(d)); }
                }
                std::fprintf(stderr,
                             "[lp] exit opt iters=%ld refine=%ld rfact=%ld rshun=%ld huge=%ld "
                             "tiny=%ld weak=%ld clean=%ld bland=%ld priceresid=%.3e ynorm=%.3e "
                             "att=%d dmin=%.3e etas=%zu\n",
                             static_cast<long>(iterations_), dbg_refine, dbg_rfact, dbg_rshun,
                             dbg_huge, dbg_tiny, dbg_weak, dbg_clean, dbg_bland, pr, ynorm,
                             datt, dmin, etas_.size());
            }
            return LoopExit::optimal;
        }

        gather_column(entering, work_w_);
        ftran(work_w_);
        if (m_ > 0) {
            // Verify the solve before trusting its pivots. The backward error
            // |B w - a_e| scaled by |w| stays small even on a near-singular
            // basis, so a residual that is only large against the column
            // scale signals forward error: refine the solve once. A residual
            // large against both scales means the factorization itself has
            // degraded: refactorize, or shun the column when already fresh.
            double a_inf = 0.0, w_inf = 0.0;
            const auto residual = [&]() {
                work_rho_.setZero();
                a_inf = 0.0;
                for (int e = col_start_[entering]; e < col_start_[entering + 1]; ++e) {
                    work_rho_[row_index_[e]] = -col_value_[e];
                    a_inf = std::max(a_inf, std::abs(col_value_[e]));
                }
                w_inf = 0.0;
                for (int k = 0; k < m_; ++k) {
                    const double wk = work_w_[k];
                    if (wk == 0.0) continue;
                    w_inf = std::max(w_inf, std::abs(wk));
                    const int col = basic_[k];
                    for (int e = col_start_[col]; e < col_start_[col + 1]; ++e)
                        work_rho_[row_index_[e]] += col_value_[e] * wk;
                }
                return work_rho_.cwiseAbs().maxCoeff();
            };
            double resid = residual();
            if (resid > kResidTol * (1.0 + a_inf)) {
                if (resid <= kResidTol * (1.0 + a_inf + w_inf)) {
                    ++dbg_refine;
                    ftran(work_rho_);
                    work_w_ -= work_rho_;
                    resid = residual();
                }
                if (resid > kResidTol * (1.0 + a_inf + w_inf)) {
                    if (!etas_.empty()) {
                        ++dbg_rfact;
                        if (!factorize()) return LoopExit::numerical;
                        compute_basic_values();
                        price_full(cost);
                        priced_exact = true;
                    } else {
                        ++dbg_rshun;
                        shunned[entering] = 1;
                        any_shunned = true;
                    }
                    continue;
                }
            }
            // A solution this large marks a basis too close to singular for
            // the downstream updates to stay accurate: do not walk through it.
            if (w_inf > kHugeW) {
                ++dbg_huge;
                if (!etas_.empty()) {
                    if (!factorize()) return LoopExit::numerical;
                    compute_basic_values();
                    price_full(cost);
                    priced_exact = true;
                } else {
                    shunned[entering] = 1;
                    any_shunned = true;
                }
                continue;
            }
        }

        // Harris two-pass ratio test. Pass 1 finds the limiting step with
        // every bound stretched by the feasibility tolerance; pass 2 picks,
        // among rows whose exact ratio fits under that limit, the one with
        // the largest pivot. Any other row then overshoots its bound by at
        // most the stretch.
        const bool own_gap_finite =
            std::isfinite(lb_[entering]) && std::isfinite(ub_[entering]);
        const double own_gap = own_gap_finite ? ub_[entering] - lb_[entering]
                                              : std::numeric_limits<double>::infinity();
        double t_limit = own_gap;
        double w_norm = 0.0;
        for (int k = 0; k < m_; ++k) {
            const double wk = work_w_[k];
            w_norm = std::max(w_norm, std::abs(wk));
            if (std::abs(wk) <= kPivotTol) continue;
            const int v = basic_[k];
            const double rate = -dir * wk;  // d value_[v] / d t
            double slack;
            if (rate < 0.0) {
                if (!std::isfinite(lb_[v])) continue;
                slack = value_[v] - lb_[v];
            } else {
                if (!std::isfinite(ub_[v])) continue;
                slack = ub_[v] - value_[v];
            }
            t_limit = std::min(t_limit, (std::max(slack, 0.0) + feas_tol_) / std::abs(rate));
        }
        if (!std::isfinite(t_limit)) {
            // Trust an unbounded verdict only on a fresh factorization; a
            // stale product form can zero out the entries of a binding row.
            if (!etas_.empty()) {
                if (!factorize()) return LoopExit::numerical;
                compute_basic_values();
                price_full(cost);
                priced_exact = true;
                continue;
            }
            return LoopExit::unbounded;
        }

        int leave_pos = -1;
        VarState leave_state = VarState::at_lower;
        double leave_mag = 0.0;
        double best_t = 0.0;
        int bland_best = std::numeric_limits<int>::max();
        for (int k = 0; k < m_; ++k) {
            const double wk = work_w_[k];
            if (std::abs(wk) <= kPivotTol) continue;
            const int v = basic_[k];
            const double rate = -dir * wk;
            double t;
            VarState hit;
            if (rate < 0.0) {
                if (!std::isfinite(lb_[v])) continue;
                t = std::max(value_[v] - lb_[v], 0.0) / (-rate);
                hit = VarState::at_lower;
            } else {
                if (!std::isfinite(ub_[v])) continue;
                t = std::max(ub_[v] - value_[v], 0.0) / rate;
                hit = VarState::at_upper;
            }
            if (t > t_limit) continue;
            bool take;
            if (bland) {
                // Smallest ratio first; inside the tie window prefer the
                // strongest pivot, then the lowest index, so a degenerate tie
                // cannot force a numerically hopeless eta.
                take = leave_pos < 0 || t < best_t - kRatioTie ||
                       (t <= best_t + kRatioTie &&
                        (std::abs(wk) > leave_mag ||
                         (std::abs(wk) == leave_mag && v < bland_best)));
            } else {
                take = std::abs(wk) > leave_mag;
            }
            if (take) {
                best_t = t;
                leave_pos = k;
                leave_state = hit;
                leave_mag = std::abs(wk);
                bland_best = v;
            }
        }
        if (leave_pos < 0) {
            best_t = own_gap;  // no limiting row: flip to the opposite bound
        } else if (own_gap < best_t) {
            leave_pos = -1;  // the entering variable's own bound is tighter
            best_t = own_gap;
        }

        // A pivot small relative to its column makes the eta transform an
        // error amplifier of gain |w|_inf / |w_r| and drives the basis
        // toward singularity, no matter its absolute size.
        if (leave_pos >= 0 && leave_mag < std::max(kSmallPivot, kRelPivot * w_norm)) {
            ++dbg_tiny;
            if (!etas_.empty()) {
                // Might be stale product-form noise: refresh and re-price.
                if (!factorize()) return LoopExit::numerical;
                compute_basic_values();
                price_full(cost);
                priced_exact = true;
            } else {
                if (dbg) {
                    int tight = 0;
                    double tight_wmax = 0.0;
                    for (int k = 0; k < m_; ++k) {
                        const double wk = work_w_[k];
                        if (std::abs(wk) <= kPivotTol) continue;
                        const int v = basic_[k];
                        const double rate = -dir * wk;
                        const double slack = rate < 0.0 ? value_[v] - lb_[v] : ub_[v] - value_[v];
                        if (std::isfinite(slack) && slack <= feas_tol_) {
                            ++tight;
                            tight_wmax = std::max(tight_wmax, std::abs(wk));
                        }
                    }
                    std::fprintf(stderr,
                                 "[lp] fresh-shun j=%d d=%.3e wn=%.3e lmag=%.3e bt=%.3e tl=%.3e "
                                 "tight=%d twmax=%.3e\n",
                                 entering, d_[entering], w_norm, leave_mag, best_t, t_limit,
                                 tight, tight_wmax);
                }
                shunned[entering] = 1;
                any_shunned = true;
            }
            continue;
        }
        if (!weak_ok && leave_pos >= 0 && leave_mag < kWeakRel * w_norm) {
            ++dbg_weak;
            weak_gen[entering] = weak_serial;
            any_weak = true;
            continue;
        }

        if (dbg) {
            dbg_wmax = std::max(dbg_wmax, w_norm);
            dbg_tmax = std::max(dbg_tmax, best_t);
        }
        value_[entering] += dir * best_t;
        for (int k = 0; k < m_; ++k) {
            const double wk = work_w_[k];
            if (wk != 0.0) value_[basic_[k]] -= dir * wk * best_t;
        }
        if (leave_pos < 0) {
            // Bound flip: basis, reduced costs and weights all unchanged.
            state_[entering] = dir > 0 ? VarState::at_upper : VarState::at_lower;
            value_[entering] = dir > 0 ? ub_[entering] : lb_[entering];
        } else {
            const int leaving = basic_[leave_pos];
            const VarState entering_prior = state_[entering];
            const double entering_prior_value = value_[entering] - dir * best_t;
            const double pivot_value = work_w_[leave_pos];
            const double d_enter = d_[entering];
            const double gamma = devex_[entering];
            value_[leaving] = leave_state == VarState::at_lower ? lb_[leaving] : ub_[leaving];
            state_[leaving] =
                lb_[leaving] == ub_[leaving] ? VarState::fixed : leave_state;
            basic_pos_[leaving] = -1;
            basic_[leave_pos] = entering;
            basic_pos_[entering] = leave_pos;
            state_[entering] = VarState::basic;

            Eta eta;
            eta.pivot_row = leave_pos;
            eta.pivot_value = pivot_value;
            for (int k = 0; k < m_; ++k) {
                if (k == leave_pos) continue;
                if (std::abs(work_w_[k]) > kEtaDropTol) eta.entries.emplace_back(k, work_w_[k]);
            }
            etas_.push_back(std::move(eta));

            // Factorize when due. If the new basis is numerically singular,
            // undo the pivot instead of giving up: restore the previous
            // basis and reject the column under it.
            if (etas_.size() >= opts_.refactor_interval) {
                if (!factorize()) {
                    etas_.pop_back();
                    basic_[leave_pos] = leaving;
                    basic_pos_[leaving] = leave_pos;
                    basic_pos_[entering] = -1;
                    state_[leaving] = VarState::basic;
                    state_[entering] = entering_prior;
                    value_[entering] = entering_prior_value;
                    if (!factorize()) return LoopExit::numerical;
                    compute_basic_values();
                    price_full(cost);
                    priced_exact = true;
                    shunned[entering] = 1;
                    any_shunned = true;
                    continue;
                }
                if (dbg) {
                    std::vector<double> old_vals(m_);
                    for (int k = 0; k < m_; ++k) old_vals[k] = value_[basic_[k]];
                    compute_basic_values();
                    double drift = 0.0;
                    for (int k = 0; k < m_; ++k)
                        drift = std::max(drift, std::abs(value_[basic_[k]] - old_vals[k]));
                    if (drift > 1e-7)
                        std::fprintf(stderr,
                                     "[lp] iter=%ld drift=%.3e wmax=%.3e tmax=%.3e viol=%.3e\n",
                                     static_cast<long>(iterations_), drift, dbg_wmax, dbg_tmax,
                                     max_primal_violation());
                    dbg_wmax = 0.0;
                    dbg_tmax = 0.0;
                } else {
                    compute_basic_values();
                }
                price_full(cost);
                priced_exact = true;
            } else {
                // Pivot-row update of the reduced costs: with rho = B^-T e_r
                // for the updated basis, alpha_j = rho . a_j is row r of
                // B^-1 A and d_j -= d_enter * alpha_j. The leaving column has
                // alpha = 1/pivot exactly; Devex weights update from the same
                // row. One sparse btran replaces a dense pricing sweep.
                work_rho_.setZero();
                work_rho_[leave_pos] = 1.0;
                btran(work_rho_);
                touched_.clear();
                for (int k = 0; k < m_; ++k) {
                    const double rk = work_rho_[k];
                    if (std::abs(rk) <= kEtaDropTol) continue;
                    for (int e = row_start_[k]; e < row_start_[k + 1]; ++e) {
                        const int col = csr_col_[e];
                        if (alpha_[col] == 0.0) touched_.push_back(col);
                        alpha_[col] += rk * csr_val_[e];
                    }
                }
                const bool reset_weights = gamma > 1e10;
                for (const int col : touched_) {
                    const double aj = alpha_[col];
                    alpha_[col] = 0.0;
                    if (col == entering || col == leaving) continue;
                    if (basic_pos_[col] >= 0 || lb_[col] == ub_[col]) continue;
                    d_[col] -= d_enter * aj;
                    if (!reset_weights) {
                        const double cand = aj * aj * gamma;
                        if (cand > devex_[col]) devex_[col] = cand;
                    }
                }
                d_[entering] = 0.0;
                d_[leaving] = -d_enter / pivot_value;
                if (reset_weights) {
                    std::fill(devex_.begin(), devex_.end(), 1.0);
                } else {
                    devex_[leaving] =
                        std::max(gamma / (pivot_value * pivot_value), 1.0);
                }
                priced_exact = false;
            }
            ++weak_serial;  // weak marks were relative to the old basis
            any_weak = false;
        }
        ++iterations_;

        if (best_t <= kPivotTol) {
            if (++degen_streak > kStallTrigger) {
                if (!bland_fallback) return LoopExit::stall;
                if (!bland) ++dbg_bland;
                bland = true;
            }
        } else {
            degen_streak = 0;
            bland = false;
        }
    }
}

void Simplex::apply_bound_perturbation(int epoch) {
    const auto mix = [](std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    };
    for (int j = 0; j < n_cols_; ++j) {
        if (lb_[j] == ub_[j]) continue;  // keep equalities exact
        const std::uint64_t base =
            mix((static_cast<std::uint64_t>(j) << 8) + static_cast<std::uint64_t>(epoch) + 1);
        const double u1 = 0.5 + 0x1p-54 * static_cast<double>(base >> 11);
        const double u2 = 0.5 + 0x1p-54 * static_cast<double>(mix(base) >> 11);
        if (std::isfinite(lb_[j])) lb_[j] -= kPerturb * u1 * (1.0 + std::abs(lb_[j]));
        if (std::isfinite(ub_[j])) ub_[j] += kPerturb * u2 * (1.0 + std::abs(ub_[j]));
    }
}

LoopExit Simplex::simplex_loop(std::span<const double> cost) {
    // Anti-degeneracy driver. Long ties are broken by widening every finite
    // bound a deterministic hair, which makes the stalled slacks distinct;
    // the true bounds come back before any verdict counts, and a leg that
    // still stalls after the allowed perturbation epochs falls back to
    // Bland's rule, whose termination needs no tie assumptions.
    std::vector<double> lb_save, ub_save;
    bool perturbed = false;
    int epochs = 0;
    while (true) {
        const LoopExit ex = loop_leg(cost, epochs >= kMaxPerturbEpochs);
        if (ex == LoopExit::stall) {
            if (!perturbed) {
                lb_save = lb_;
                ub_save = ub_;
                perturbed = true;
            } else {
                lb_ = lb_save;  // fresh offsets, not offsets on offsets
                ub_ = ub_save;
            }
            apply_bound_perturbation(epochs);
            ++epochs;
            continue;
        }
        if (!perturbed) return ex;
        lb_ = std::move(lb_save);
        ub_ = std::move(ub_save);
        perturbed = false;
        compute_basic_values();
        if ((ex == LoopExit::optimal || ex == LoopExit::unbounded) &&
            max_primal_violation() <= feas_tol_)
            continue;  // cheap re-verification on the true bounds
        // Either a real failure, or a perturbed verdict whose point drifted
        // out of the true bounds; hand both to the caller's repair loop.
        return ex;
    }
}


LoopExit Simplex::phase1(bool& feasible) {
    feasible = false;
    const int first_new_art = n_cols_;
    std::vector<double> cost1(n_cols_, 0.0);
    for (int k = 0; k < m_; ++k) {
        const int v = basic_[k];
        const double x = value_[v];
        const double target = std::clamp(x, lb_[v], ub_[v]);
        const double a0 = x - target;
        if (std::abs(a0) <= feas_tol_) continue;
        // Artificial column: a copy of the basic column it repairs, so the
        // row equations stay satisfied when the basic value snaps in bounds.
        const int art = n_cols_;
        col_start_.push_back(col_start_[n_cols_]);
        for (int e = col_start_[v]; e < col_start_[v + 1]; ++e) {
            row_index_.push_back(row_index_[e]);
            col_value_.push_back(col_value_[e]);
            ++col_start_[art + 1];
        }
        ++n_cols_;
        if (a0 > 0.0) {
            lb_.push_back(0.0);
            ub_.push_back(a0);
            state_.push_back(VarState::at_upper);
            cost1.push_back(1.0);
        } else {
            lb_.push_back(a0);
            ub_.push_back(0.0);
            state_.push_back(VarState::at_lower);
            cost1.push_back(-1.0);
        }
        obj_.push_back(0.0);
        value_.push_back(a0);
        basic_pos_.push_back(-1);
        value_[v] = target;
    }
    if (n_cols_ == first_new_art) {
        feasible = true;  // violations were within tolerance after all
        return LoopExit::optimal;
    }

    const LoopExit ex = simplex_loop(cost1);
    if (ex != LoopExit::optimal) return ex;

    double infeasibility = 0.0;
    for (int j = first_new_art; j < n_cols_; ++j) infeasibility += std::abs(value_[j]);
    // Retire the artificials whatever the verdict.
    for (int j = first_new_art; j < n_cols_; ++j) {
        lb_[j] = 0.0;
        ub_[j] = 0.0;
        if (basic_pos_[j] < 0) {
            state_[j] = VarState::fixed;
            value_[j] = 0.0;
        }
    }
    feasible = infeasibility <= std::max(1e-8, 10 * feas_tol_);
    return LoopExit::optimal;
}

Solution Simplex::run() {
    Solution sol;
    setup_initial_point();
    // True while the current basis is the logical one with no pivots taken
    // since; verdicts of infeasibility are only trusted from such a start.
    bool pristine = opts_.initial_basis.empty();
    if (!factorize()) {
        reset_to_logical_basis();
        pristine = true;
        if (!factorize()) {
            sol.status = Status::numerical_failure;
            return sol;
        }
    }
    compute_basic_values();

    const bool dbg = std::getenv("LPDEBUG") != nullptr;
    Status status = Status::numerical_failure;
    for (int round = 0; round < 5; ++round) {
        if (dbg) std::fprintf(stderr, "[lp] round %d viol=%.3e iters=%zu\n", round, max_primal_violation(), iterations_);
        if (max_primal_violation() > feas_tol_) {
            const bool from_logical = pristine;
            bool feasible = false;
            const LoopExit ex = phase1(feasible);
            pristine = false;
            if (ex == LoopExit::iteration_limit) {
                status = Status::iteration_limit;
                break;
            }
            if (dbg && ex == LoopExit::optimal) std::fprintf(stderr, "[lp] round %d phase1 feasible=%d iters=%zu\n", round, int(feasible), iterations_);
            if (ex != LoopExit::optimal || !feasible) {
                // A warm basis can poison the verdict; confirm from scratch.
                if (!from_logical) {
                    reset_to_logical_basis();
                    pristine = true;
                    if (!factorize()) {
                        status = Status::numerical_failure;
                        break;
                    }
                    compute_basic_values();
                    continue;
                }
                status = ex == LoopExit::optimal ? Status::infeasible
                                                 : Status::numerical_failure;
                break;
            }
            if (!factorize()) {
                reset_to_logical_basis();
                pristine = true;
                factorize();
                compute_basic_values();
                continue;
            }
            compute_basic_values();
            if (max_primal_violation() > 10 * feas_tol_) continue;
        }

        const LoopExit ex = simplex_loop(obj_);
        pristine = false;
        if (dbg) std::fprintf(stderr, "[lp] round %d loop exit=%d iters=%zu\n", round, static_cast<int>(ex), iterations_);
        if (ex == LoopExit::iteration_limit) {
            status = Status::iteration_limit;
            break;
        }
        if (ex == LoopExit::unbounded) {
            status = Status::unbounded;
            break;
        }
        if (ex == LoopExit::numerical) {
            reset_to_logical_basis();
            pristine = true;
            factorize();
            compute_basic_values();
            continue;
        }
        // Optimal claimed: refresh the factorization and re-check feasibility
        // so stale eta-file drift cannot leak into the reported solution.
        if (!factorize()) {
            reset_to_logical_basis();
            pristine = true;
            factorize();
            compute_basic_values();
            continue;
        }
        compute_basic_values();
        if (dbg) std::fprintf(stderr, "[lp] round %d post-refactor viol=%.3e\n", round, max_primal_violation());
        if (max_primal_violation() > 10 * feas_tol_) continue;
        status = Status::optimal;
        break;
    }

    sol.status = status;
    sol.iterations = iterations_;
    sol.x.assign(value_.begin(), value_.begin() + n_struct_);
    double objective = 0.0;
    for (int j = 0; j < n_struct_; ++j) objective += obj_[j] * value_[j];
    sol.objective = objective;
    return sol;
}

}  // namespace

Solution solve(const Problem& problem, const Options& options) {
    validate_problem(problem);
    Simplex simplex(problem, options);
    return simplex.run();
}

const char* solver_name() { return "bounded revised simplex (Eigen SparseLU)"; }

}  // namespace pwcsbf::lp
