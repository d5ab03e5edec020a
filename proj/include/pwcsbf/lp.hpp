#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "pwcsbf/errors.hpp"

namespace pwcsbf::lp {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Sparse linear program: minimize objective . x subject to
// row_lower <= A x <= row_upper and var_lower <= x <= var_upper.
struct Problem {
    std::size_t num_vars = 0;
    std::vector<double> objective;
    std::vector<double> var_lower, var_upper;
    std::vector<double> row_lower, row_upper;
    std::vector<std::size_t> entry_row, entry_col;
    std::vector<double> entry_value;

    std::size_t num_rows() const { return row_lower.size(); }

    std::size_t add_variable(double lower, double upper, double obj = 0.0) {
        var_lower.push_back(lower);
        var_upper.push_back(upper);
        objective.push_back(obj);
        return num_vars++;
    }
    std::size_t add_row(double lower, double upper) {
        row_lower.push_back(lower);
        row_upper.push_back(upper);
        return row_lower.size() - 1;
    }
    void add_entry(std::size_t row, std::size_t col, double value) {
        if (value == 0.0) return;
        entry_row.push_back(row);
        entry_col.push_back(col);
        entry_value.push_back(value);
    }
};

enum class Status { optimal, infeasible, unbounded, iteration_limit, numerical_failure };

struct Solution {
    Status status = Status::numerical_failure;
    double objective = 0.0;
    std::vector<double> x;
    std::size_t iterations = 0;
};

struct Options {
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    std::size_t max_iterations = 0;  // 0 = automatic from problem size
    std::size_t refactor_interval = 100;
    // Warm start: one basic variable per row, either a structural index or
    // num_vars + r for the logical of row r. Empty = all-logical basis.
    std::vector<std::size_t> initial_basis;
    // Optional starting values for structural variables; each is snapped to
    // the nearest bound when nonbasic. Empty = lower bound (or 0 when free).
    std::vector<double> initial_values;
};

// Bounded-variable revised primal simplex with an Eigen SparseLU factorized
// basis, product-form eta updates, and a single-artificial-block phase 1.
// Deterministic: all ties break toward the lowest index.
Solution solve(const Problem& problem, const Options& options = {});

// Identity string for reports.
const char* solver_name();

}  // namespace pwcsbf::lp
