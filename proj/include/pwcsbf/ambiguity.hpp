#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pwcsbf/errors.hpp"

namespace pwcsbf {

// Interval ambiguity set over the probability simplex: all p with
// lower <= p <= upper componentwise and sum(p) = 1. Entry m-1 is the unsafe
// column when the row comes from a TransitionBounds matrix.
struct AmbiguityRow {
    std::vector<double> lower;
    std::vector<double> upper;
};

struct WorstCaseResult {
    double value = 0.0;
    std::vector<double> distribution;
};

// Indices sorted by descending coefficient, ties by ascending index. Engines
// that query many rows with one coefficient vector compute this once and pass
// it to the overload below; results are identical either way.
std::vector<std::size_t> descending_order(std::span<const double> coefficients);

// @brief Exact maximum of coefficients . p over the ambiguity set, with a
//        maximizing distribution. Greedy budget assignment: start at the lower
//        bounds and spend the remaining budget 1 - sum(lower) on coordinates
//        in descending coefficient order.
// @throws DimensionMismatch, InfeasibleRow
WorstCaseResult worst_case_expectation(std::span<const double> coefficients,
                                       const AmbiguityRow& row);

// Index-cache overload over raw bound spans; order must be
// descending_order(coefficients).
WorstCaseResult worst_case_expectation(std::span<const double> coefficients,
                                       std::span<const double> lower,
                                       std::span<const double> upper,
                                       std::span<const std::size_t> order);

// Same maximum without materializing the distribution. Allocation-free, for
// hot loops that only need the value.
double worst_case_value(std::span<const double> coefficients, std::span<const double> lower,
                        std::span<const double> upper, std::span<const std::size_t> order);

// @brief Test oracle: solves the same maximization by enumerating the O(m)
//        candidate split profiles of the greedy structure and independently by
//        a generic LP solve; the two must agree to 1e-9.
// @throws DimensionTooLarge (m > 12), InfeasibleRow, LpSolverFailure
double brute_force_oracle(std::span<const double> coefficients, const AmbiguityRow& row);

}  // namespace pwcsbf
