#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pwcsbf/dynamics.hpp"
#include "pwcsbf/geometry.hpp"

namespace pwcsbf {

// Interval transition matrix: row i holds sound bounds on the probability of
// moving from cell i to each cell j and, in the final column, to the unsafe
// region. Immutable after construction.
struct TransitionBounds {
    std::size_t n_regions = 0;
    // Row-major (n_regions x (n_regions + 1)); column n_regions is the unsafe
    // column p_iu.
    std::vector<double> lower;
    std::vector<double> upper;
    std::string dynamics_descriptor;
    Vector sigma;
    std::uint64_t partition_hash = 0;
    // Enough to reconstruct the partition, so persisted bounds are
    // self-contained.
    PartitionDescriptor partition;

    std::size_t cols() const { return n_regions + 1; }
    double lower_at(std::size_t i, std::size_t j) const { return lower[i * cols() + j]; }
    double upper_at(std::size_t i, std::size_t j) const { return upper[i * cols() + j]; }
};

// @brief P(interval_low <= mean + sigma*Z <= interval_high) for standard
//        normal Z, evaluated through erfc branches so far tails subtract
//        same-signed small numbers instead of two near-1 CDFs.
// @throws InvertedInterval, NonPositiveSigma
double gaussian_mass(double interval_low, double interval_high, double mean,
                     double sigma);

struct FactorBounds {
    double min;
    double max;
};

// @brief Extrema of the 1-D Gaussian mass of [target_low, target_high] as the
//        mean ranges over [mean_low, mean_high]. The mass is unimodal in the
//        mean with its peak at the target midpoint, so the maximum is attained
//        at the midpoint clamped into the mean interval and the minimum at one
//        of the two mean endpoints.
// @throws InvertedInterval, NonPositiveSigma
FactorBounds factor_bounds(double target_low, double target_high, double mean_low,
                           double mean_high, double sigma);

// @brief Sound interval bounds on the transition kernel between partition
//        cells plus the unsafe column. Parallel over source cells (OpenMP when
//        available); each entry is written once, so the result is identical to
//        the serial reference bit for bit.
// @throws DimensionMismatch (regions not aligned to the partition),
//         InfeasibleRow (a row admits no probability vector)
TransitionBounds compute_transition_bounds(const PwaInclusionDynamics& dyn,
                                           const Partition& partition);

// Serial reference implementation kept for testing and benchmarking.
TransitionBounds compute_transition_bounds_serial(const PwaInclusionDynamics& dyn,
                                                  const Partition& partition);

}  // namespace pwcsbf
