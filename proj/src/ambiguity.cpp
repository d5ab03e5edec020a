#include "pwcsbf/ambiguity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pwcsbf/lp.hpp"

namespace pwcsbf {

namespace {

// Validates the interval ambiguity set invariants; returns sum(lower).
double validate_row(std::span<const double> coefficients, std::span<const double> lower,
                    std::span<const double> upper) {
    if (coefficients.size() != lower.size() || lower.size() != upper.size())
        throw DimensionMismatch("worst_case_expectation: coefficient/bound lengths differ");
    if (coefficients.empty())
        throw DimensionMismatch("worst_case_expectation: empty row");
    double sum_lower = 0.0, sum_upper = 0.0;
    for (std::size_t k = 0; k < lower.size(); ++k) {
        if (lower[k] < -1e-12 || upper[k] > 1.0 + 1e-12 || lower[k] > upper[k] + 1e-12)
            throw InfeasibleRow("ambiguity row entry " + std::to_string(k) +
                                " violates 0 <= lower <= upper <= 1");
        sum_lower += lower[k];
        sum_upper += upper[k];
    }
    if (sum_lower > 1.0 + 1e-9)
        throw InfeasibleRow("ambiguity row lower bounds sum to " + std::to_string(sum_lower) +
                            " > 1");
    if (sum_upper < 1.0 - 1e-9)
        throw InfeasibleRow("ambiguity row upper bounds sum to " + std::to_string(sum_upper) +
                            " < 1");
    return sum_lower;
}

}  // namespace

std::vector<std::size_t> descending_order(std::span<const double> coefficients) {
    std::vector<std::size_t> order(coefficients.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (coefficients[a] != coefficients[b]) return coefficients[a] > coefficients[b];
        return a < b;
    });
    return order;
}

WorstCaseResult worst_case_expectation(std::span<const double> coefficients,
                                       std::span<const double> lower,
                                       std::span<const double> upper,
                                       std::span<const std::size_t> order) {
    const double sum_lower = validate_row(coefficients, lower, upper);
    WorstCaseResult result;
    result.distribution.assign(lower.begin(), lower.end());
    double budget = std::max(0.0, 1.0 - sum_lower);
    for (std::size_t k : order) {
        if (budget <= 0.0) break;
        const double add = std::min(std::max(upper[k] - lower[k], 0.0), budget);
        result.distribution[k] += add;
        budget -= add;
    }
    double value = 0.0;
    for (std::size_t k = 0; k < coefficients.size(); ++k)
        value += coefficients[k] * result.distribution[k];
    result.value = value;
    return result;
}

WorstCaseResult worst_case_expectation(std::span<const double> coefficients,
                                       const AmbiguityRow& row) {
    return worst_case_expectation(coefficients, row.lower, row.upper,
                                  descending_order(coefficients));
}

double worst_case_value(std::span<const double> coefficients, std::span<const double> lower,
                        std::span<const double> upper, std::span<const std::size_t> order) {
    const double sum_lower = validate_row(coefficients, lower, upper);
    double value = 0.0;
    for (std::size_t k = 0; k < coefficients.size(); ++k) value += coefficients[k] * lower[k];
    double budget = std::max(0.0, 1.0 - sum_lower);
    for (std::size_t k : order) {
        if (budget <= 0.0) break;
        const double add = std::min(std::max(upper[k] - lower[k], 0.0), budget);
        value += coefficients[k] * add;
        budget -= add;
    }
    return value;
}

double brute_force_oracle(std::span<const double> coefficients, const AmbiguityRow& row) {
    const std::size_t m = coefficients.size();
    if (m > 12)
        throw DimensionTooLarge("brute_force_oracle: row length " + std::to_string(m) +
                                " exceeds 12");
    validate_row(coefficients, row.lower, row.upper);

    // Method 1: enumerate the greedy split profiles. Every vertex of the
    // box-on-simplex polytope has at most one coordinate strictly between its
    // bounds; in descending coefficient order the optimum puts every earlier
    // coordinate at its upper bound and every later one at its lower bound.
    const std::vector<std::size_t> order = descending_order(coefficients);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < m; ++t) {
        double others = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == t) continue;
            others += i < t ? row.upper[order[i]] : row.lower[order[i]];
        }
        const std::size_t k = order[t];
        const double residual = 1.0 - others;
        if (residual < row.lower[k] - 1e-12 || residual > row.upper[k] + 1e-12) continue;
        double value = coefficients[k] * std::clamp(residual, row.lower[k], row.upper[k]);
        for (std::size_t i = 0; i < m; ++i) {
            if (i == t) continue;
            value += coefficients[order[i]] *
                     (i < t ? row.upper[order[i]] : row.lower[order[i]]);
        }
        best = std::max(best, value);
    }
    if (!std::isfinite(best))
        throw InfeasibleRow("brute_force_oracle: no feasible split profile");

    // Method 2: generic LP over the same polytope.
    lp::Problem problem;
    for (std::size_t k = 0; k < m; ++k)
        problem.add_variable(row.lower[k], row.upper[k], -coefficients[k]);
    const std::size_t simplex_row = problem.add_row(1.0, 1.0);
    for (std::size_t k = 0; k < m; ++k) problem.add_entry(simplex_row, k, 1.0);
    const lp::Solution sol = lp::solve(problem);
    if (sol.status != lp::Status::optimal)
        throw LpSolverFailure("brute_force_oracle: LP solve did not reach optimality");
    const double lp_value = -sol.objective;
    if (std::abs(lp_value - best) > 1e-9)
        throw LpSolverFailure("brute_force_oracle: enumeration value " + std::to_string(best) +
                              " and LP value " + std::to_string(lp_value) +
                              " disagree beyond 1e-9");
    return best;
}

}  // namespace pwcsbf
