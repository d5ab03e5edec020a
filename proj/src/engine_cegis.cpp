#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "engines_common.hpp"
#include "pwcsbf/ambiguity.hpp"
#include "pwcsbf/engines.hpp"
#include "pwcsbf/lp.hpp"

namespace pwcsbf {

namespace {

// A witness is a concrete distribution from the ambiguity set of row i; the
// candidate LP enforces the decrease condition against every collected
// witness.
struct WitnessSet {
    std::vector<std::size_t> row;                   // source cell
    std::vector<std::vector<double>> distribution;  // length cols
};

}  // namespace

// Counterexample-guided synthesis. The candidate LP minimizes eta + N*beta
// subject to the decrease condition under the witnesses collected so far; the
// verifier then searches each row's ambiguity set for a distribution that
// breaks the candidate (the exact greedy worst case) and adds it as a new
// witness. Pure cutting-plane scheme on the same minimax program the dual
// engine solves in one shot; at convergence no row's exact worst case exceeds
// b_i + beta_i by more than the tolerance.
CertificateResult synthesize_cegis(const TransitionBounds& bounds, const Partition& partition,
                                   std::size_t horizon, const CegisSettings& settings) {
    const auto start = detail::Clock::now();
    detail::check_engine_inputs(bounds, partition, horizon);
    if (!(settings.tolerance >= 0.0))
        throw NegativeInput("synthesize_cegis: tolerance must be >= 0");
    if (!settings.adaptive && settings.num_iterations == 0)
        throw NegativeInput("synthesize_cegis: num_iterations must be >= 1");
    const std::size_t q = partition.num_cells();
    const std::size_t cols = bounds.cols();
    const std::vector<std::size_t> safe = detail::safe_cells(partition);

    WitnessSet witnesses;
    // Seed: one valid distribution per safe row, budget spent in ascending
    // index order. Keeps the first candidate LP meaningfully constrained.
    for (std::size_t i : safe) {
        const double* lo = bounds.lower.data() + i * cols;
        const double* up = bounds.upper.data() + i * cols;
        std::vector<double> dist(lo, lo + cols);
        double budget = 1.0;
        for (std::size_t j = 0; j < cols; ++j) budget -= lo[j];
        budget = std::max(budget, 0.0);
        for (std::size_t j = 0; j < cols && budget > 0.0; ++j) {
            const double add = std::min(std::max(up[j] - lo[j], 0.0), budget);
            dist[j] += add;
            budget -= add;
        }
        witnesses.row.push_back(i);
        witnesses.distribution.push_back(std::move(dist));
    }

    const std::size_t max_rounds = settings.adaptive ? 1000 : settings.num_iterations;
    std::vector<double> values(q, 1.0);
    std::vector<double> beta_i_sol(q, 0.0);
    double lp_objective = 0.0;
    std::size_t rounds = 0, lp_iterations = 0;
    bool converged = false;

    while (rounds < max_rounds) {
        ++rounds;
        lp::Problem p;
        std::vector<std::size_t> b_var(q);
        for (std::size_t j = 0; j < q; ++j)
            b_var[j] = partition.unsafe_cell_flags[j] ? p.add_variable(1.0, 1.0)
                                                      : p.add_variable(0.0, 1.0);
        const std::size_t beta_var =
            p.add_variable(0.0, lp::kInfinity, static_cast<double>(horizon));
        const std::size_t eta_var = p.add_variable(0.0, 1.0, 1.0);
        std::vector<std::size_t> beta_i_var(q, 0);
        for (std::size_t i : safe) beta_i_var[i] = p.add_variable(0.0, lp::kInfinity);

        for (std::size_t w = 0; w < witnesses.row.size(); ++w) {
            const std::size_t i = witnesses.row[w];
            const std::vector<double>& dist = witnesses.distribution[w];
            // <b, p> + p_u <= b_i + beta_i, with b pinned to 1 on unsafe cells.
            const std::size_t row = p.add_row(-lp::kInfinity, -dist[q]);
            for (std::size_t j = 0; j < q; ++j) {
                const double coef = dist[j] - (j == i ? 1.0 : 0.0);
                if (coef != 0.0) p.add_entry(row, b_var[j], coef);
            }
            p.add_entry(row, beta_i_var[i], -1.0);
        }
        for (std::size_t i : safe) {
            const std::size_t link = p.add_row(-lp::kInfinity, 0.0);
            p.add_entry(link, beta_i_var[i], 1.0);
            p.add_entry(link, beta_var, -1.0);
        }
        for (std::size_t i : partition.initial_cell_indices) {
            const std::size_t init = p.add_row(-lp::kInfinity, 0.0);
            p.add_entry(init, b_var[i], 1.0);
            p.add_entry(init, eta_var, -1.0);
        }

        // The trivial barrier satisfies every witness row, so the default
        // all-logical basis with these values starts feasible.
        lp::Options opts;
        opts.initial_values.assign(p.num_vars, 0.0);
        for (std::size_t j = 0; j < q; ++j) opts.initial_values[b_var[j]] = 1.0;
        opts.initial_values[eta_var] = 1.0;

        const lp::Solution sol = lp::solve(p, opts);
        if (sol.status != lp::Status::optimal)
            throw LpSolverFailure(std::string("synthesize_cegis: candidate LP status ") +
                                  std::to_string(static_cast<int>(sol.status)) + " in round " +
                                  std::to_string(rounds));
        lp_iterations += sol.iterations;
        lp_objective = sol.objective;
        for (std::size_t j = 0; j < q; ++j) values[j] = std::clamp(sol.x[b_var[j]], 0.0, 1.0);
        for (std::size_t i : safe) beta_i_sol[i] = std::max(0.0, sol.x[beta_i_var[i]]);

        // Verifier: exact worst case per row; any excess beyond the accepted
        // slack becomes a new witness.
        std::vector<double> coeffs(q + 1);
        for (std::size_t j = 0; j < q; ++j)
            coeffs[j] = partition.unsafe_cell_flags[j] ? 1.0 : values[j];
        coeffs[q] = 1.0;
        const std::vector<std::size_t> order = descending_order(coeffs);
        std::size_t added = 0;
        for (std::size_t i : safe) {
            const std::span<const double> lo(bounds.lower.data() + i * cols, cols);
            const std::span<const double> up(bounds.upper.data() + i * cols, cols);
            WorstCaseResult wc = worst_case_expectation(coeffs, lo, up, order);
            if (wc.value > values[i] + beta_i_sol[i] + settings.tolerance) {
                witnesses.row.push_back(i);
                witnesses.distribution.push_back(std::move(wc.distribution));
                ++added;
            }
        }
        if (added == 0) {
            converged = true;
            break;
        }
    }

    std::map<std::string, std::string> meta;
    meta["engine"] = "cegis";
    meta["lp_solver"] = lp::solver_name();
    meta["lp_objective"] = detail::format_double(lp_objective);
    meta["lp_iterations"] = std::to_string(lp_iterations);
    meta["rounds"] = std::to_string(rounds);
    meta["witnesses"] = std::to_string(witnesses.row.size());
    meta["converged"] = converged ? "true" : "false";
    meta["adaptive"] = settings.adaptive ? "true" : "false";
    meta["tolerance"] = detail::format_double(settings.tolerance);

    CertificateResult result = detail::finalize_result(
        Engine::cegis, std::move(values), bounds, partition, horizon, rounds, 0.0,
        std::move(meta));
    result.metadata["lp_objective_gap"] =
        detail::format_double(result.objective() - lp_objective);
    result.wall_time_seconds = detail::seconds_since(start);
    return result;
}

}  // namespace pwcsbf
