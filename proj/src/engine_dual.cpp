#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "engines_common.hpp"
#include "pwcsbf/engines.hpp"
#include "pwcsbf/lp.hpp"

namespace pwcsbf {

// Exact reformulation of min_b max_{p in P} eta + N*beta. The inner maximum
// over each row's ambiguity set {sum p = 1, l <= p <= u} is replaced by its
// LP dual (lambda free, mu, nu >= 0):
//   max_p <b~, p> = min lambda + <u, mu> - <l, nu>
//                   s.t. lambda + mu_j - nu_j >= b~_j for every target j,
// so the robust decrease condition on safe cell i becomes, with auxiliary
// dual variables per row,
//   lambda_i + mu_ij - nu_ij - b_j >= 0          (cell targets)
//   lambda_i + mu_iu - nu_iu      >= 1           (unsafe column, b~ = 1)
//   lambda_i + <u_i, mu_i> - <l_i, nu_i> <= b_i + beta_i.
//
// Strong duality makes this equivalent, not conservative: the optimum equals
// the exact minimax value.
//
// Structural presolve (optimum preserving): a pair with upper bound exactly 0
// forces p_ij = 0, so its target row, mu_ij and nu_ij vanish; a pair with
// lower bound exactly 0 keeps mu_ij but nu_ij only ever hurts, so it is
// dropped. Comparisons are against 0.0 exactly, never a threshold.
CertificateResult synthesize_dual(const TransitionBounds& bounds, const Partition& partition,
                                  std::size_t horizon) {
    const auto start = detail::Clock::now();
    detail::check_engine_inputs(bounds, partition, horizon);
    const std::size_t q = partition.num_cells();
    const std::size_t cols = bounds.cols();
    const std::vector<std::size_t> safe = detail::safe_cells(partition);

    lp::Problem p;
    // Barrier values, capped at 1 (the barrier is 1 outside the safe space,
    // so larger values never help).
    std::vector<std::size_t> b_var(q);
    for (std::size_t j = 0; j < q; ++j)
        b_var[j] = partition.unsafe_cell_flags[j] ? p.add_variable(1.0, 1.0)
                                                  : p.add_variable(0.0, 1.0);
    const std::size_t beta_var =
        p.add_variable(0.0, lp::kInfinity, static_cast<double>(horizon));
    const std::size_t eta_var = p.add_variable(0.0, 1.0, 1.0);
    std::vector<std::size_t> beta_i_var(q, 0);
    std::vector<std::size_t> lambda_var(q, 0);
    for (std::size_t i : safe) {
        beta_i_var[i] = p.add_variable(0.0, lp::kInfinity);
        lambda_var[i] = p.add_variable(-lp::kInfinity, lp::kInfinity);
    }

    std::size_t dropped_pairs = 0, dropped_nu = 0;
    // Basis row for lambda_i: its first kept target row.
    std::vector<std::size_t> lambda_row(q, Partition::npos);

    for (std::size_t i : safe) {
        const double* lo = bounds.lower.data() + i * cols;
        const double* up = bounds.upper.data() + i * cols;
        const std::size_t budget = p.add_row(-lp::kInfinity, 0.0);
        p.add_entry(budget, lambda_var[i], 1.0);
        p.add_entry(budget, b_var[i], -1.0);
        p.add_entry(budget, beta_i_var[i], -1.0);
        for (std::size_t j = 0; j < cols; ++j) {
            if (up[j] == 0.0) {
                ++dropped_pairs;
                continue;
            }
            const bool is_unsafe_col = j == q;
            const std::size_t tgt = p.add_row(is_unsafe_col ? 1.0 : 0.0, lp::kInfinity);
            if (lambda_row[i] == Partition::npos) lambda_row[i] = tgt;
            p.add_entry(tgt, lambda_var[i], 1.0);
            if (!is_unsafe_col) p.add_entry(tgt, b_var[j], -1.0);
            const std::size_t mu = p.add_variable(0.0, lp::kInfinity);
            p.add_entry(tgt, mu, 1.0);
            p.add_entry(budget, mu, up[j]);
            if (lo[j] > 0.0) {
                const std::size_t nu = p.add_variable(0.0, lp::kInfinity);
                p.add_entry(tgt, nu, -1.0);
                p.add_entry(budget, nu, -lo[j]);
            } else {
                ++dropped_nu;
            }
        }
        const std::size_t link = p.add_row(-lp::kInfinity, 0.0);
        p.add_entry(link, beta_i_var[i], 1.0);
        p.add_entry(link, beta_var, -1.0);
    }
    for (std::size_t i : partition.initial_cell_indices) {
        const std::size_t init = p.add_row(-lp::kInfinity, 0.0);
        p.add_entry(init, b_var[i], 1.0);
        p.add_entry(init, eta_var, -1.0);
    }

    // Crash point: the trivial barrier b = 1, eta = 1, beta = 0 with
    // lambda_i = 1 basic in its first target row. Feasible by construction,
    // so phase 1 is skipped.
    lp::Options opts;
    opts.initial_values.assign(p.num_vars, 0.0);
    for (std::size_t j = 0; j < q; ++j) opts.initial_values[b_var[j]] = 1.0;
    opts.initial_values[eta_var] = 1.0;
    opts.initial_basis.resize(p.num_rows());
    for (std::size_t r = 0; r < p.num_rows(); ++r) opts.initial_basis[r] = p.num_vars + r;
    for (std::size_t i : safe)
        if (lambda_row[i] != Partition::npos)
            opts.initial_basis[lambda_row[i]] = lambda_var[i];

    const lp::Solution sol = lp::solve(p, opts);
    if (sol.status != lp::Status::optimal)
        throw LpSolverFailure(std::string("synthesize_dual: LP finished with status ") +
                              std::to_string(static_cast<int>(sol.status)) +
                              " although the trivial barrier is feasible");

    std::vector<double> values(q);
    for (std::size_t j = 0; j < q; ++j) values[j] = std::clamp(sol.x[b_var[j]], 0.0, 1.0);

    std::map<std::string, std::string> meta;
    meta["engine"] = "dual";
    meta["lp_solver"] = lp::solver_name();
    meta["lp_objective"] = detail::format_double(sol.objective);
    meta["lp_iterations"] = std::to_string(sol.iterations);
    meta["lp_rows"] = std::to_string(p.num_rows());
    meta["lp_cols"] = std::to_string(p.num_vars);
    meta["presolve_dropped_pairs"] = std::to_string(dropped_pairs);
    meta["presolve_dropped_nu"] = std::to_string(dropped_nu);
    meta["crash_basis"] = "trivial-barrier";

    CertificateResult result =
        detail::finalize_result(Engine::dual, std::move(values), bounds, partition, horizon,
                                sol.iterations, 0.0, std::move(meta));
    // Gap between the solver's objective and the re-derived one; should be
    // numerical noise only.
    result.metadata["lp_objective_gap"] =
        detail::format_double(result.objective() - sol.objective);
    result.wall_time_seconds = detail::seconds_since(start);
    return result;
}

}  // namespace pwcsbf
