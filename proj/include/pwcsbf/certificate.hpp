#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pwcsbf/dynamics.hpp"
#include "pwcsbf/engines.hpp"
#include "pwcsbf/geometry.hpp"

namespace pwcsbf {

struct EvaluationResult {
    double eta = 0.0;                   // max of the barrier over initial cells
    double beta = 0.0;                  // max over safe cells of the expectation gap
    std::vector<double> beta_per_region;  // per-cell gap, 0 on unsafe cells
};

// @brief Recomputes eta and beta for a barrier against sound transition
//        bounds: beta_i = max(0, sup_{p in P_i} <B, p> - b_i) on safe cells.
//        Removes trust in the engines; every reported certificate goes
//        through here.
// @throws LengthMismatch, NegativeBarrierValue, InfeasibleRow
EvaluationResult evaluate_certificate(const PwcBarrier& barrier, const TransitionBounds& bounds,
                                      const Partition& partition);

// @brief Probability lower bound max(0, min(1, 1 - (eta + horizon * beta))).
// @throws NegativeInput
double psafe(double eta, double beta, std::size_t horizon);

// @brief Barrier evaluation at a point: values[i] inside cell i, 1 outside
//        the safe space and on unsafe cells.
// @throws DimensionMismatch, LengthMismatch
double barrier_value(const PwcBarrier& barrier, const Partition& partition,
                     const std::vector<double>& x);

struct ValidationReport {
    std::size_t samples = 0;
    std::size_t violations = 0;
    double empirical_safety = 0.0;   // 1 - violations / samples
    double confidence_lower = 0.0;   // one-sided 99% Wilson lower bound
    double certified = 0.0;          // the certificate under test
    bool consistent = false;
};

// @brief Monte Carlo cross-check of a certified bound: simulates trajectories
//        of the true dynamics from a deterministic grid over the initial set
//        and flags a trajectory unsafe when it leaves the safe space or
//        enters an unsafe-flagged cell within the horizon. Trajectory t draws
//        its noise from an independent stream derived from (seed, t), so the
//        result does not depend on thread count.
// @throws DimensionMismatch, NegativeInput
ValidationReport validate_monte_carlo(const LinearDynamics& dynamics, const Partition& partition,
                                      const Hyperrectangle& initial_region, std::size_t horizon,
                                      std::size_t samples, std::uint64_t seed, double certified);

// Serial reference implementation; bitwise identical to the parallel one.
ValidationReport validate_monte_carlo_serial(const LinearDynamics& dynamics,
                                             const Partition& partition,
                                             const Hyperrectangle& initial_region,
                                             std::size_t horizon, std::size_t samples,
                                             std::uint64_t seed, double certified);

}  // namespace pwcsbf
