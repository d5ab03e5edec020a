#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "pwcsbf/errors.hpp"

namespace pwcsbf {

// Axis-aligned box: the universal region type (state space, partition cells,
// initial and unsafe sets).
struct Hyperrectangle {
    std::vector<double> low;
    std::vector<double> high;

    std::size_t dimension() const { return low.size(); }
    double extent(std::size_t d) const { return high[d] - low[d]; }
    double volume() const;
    // Closed membership: low[d] <= x[d] <= high[d] for every d.
    bool contains(const std::vector<double>& x) const;
};

// @brief Validated constructor for Hyperrectangle.
// @throws DimensionMismatch, InvertedBounds
Hyperrectangle make_hyperrectangle(const std::vector<double>& low,
                                   const std::vector<double>& high);

// Grid partition of the state space into equal-width cells per dimension.
// Cells are enumerated in row-major order over dimension indices (the last
// dimension varies fastest). Immutable after construction.
struct Partition {
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    Hyperrectangle space;
    std::vector<Hyperrectangle> cells;
    std::vector<std::size_t> cells_per_dim;
    std::vector<bool> unsafe_cell_flags;
    std::vector<std::size_t> initial_cell_indices;  // sorted ascending
    // boundaries[d] holds the cells_per_dim[d] + 1 shared cell edges of
    // dimension d; cells reference these exact values, so the tiling is exact.
    std::vector<std::vector<double>> boundaries;
    // True when the requested half-width did not divide the extent and the
    // cell count was rounded up (cells shrink, never widen).
    bool epsilon_rounded = false;

    std::size_t num_cells() const { return cells.size(); }

    // Cell containing x under the half-open membership rule: [low, high) per
    // dimension, except the last cell per dimension which is closed. Returns
    // npos when x lies outside the space.
    std::size_t cell_index_of(const std::vector<double>& x) const;
};

// @brief Split space into ceil(extent_d / (2*epsilon[d])) equal cells per
//        dimension, so the actual half-width never exceeds the requested one.
// @throws DimensionMismatch, NonPositiveEpsilon
Partition generate_partition(const Hyperrectangle& space,
                             const std::vector<double>& epsilon);

// @brief Mark initial cells (closed intersection with the initial box) and
//        unsafe cells (open-interior intersection with any unsafe box).
//        A cell may not be both initial and unsafe.
// @throws DimensionMismatch, InitialOutsideSpace, InitialUnsafeOverlap
Partition mark_regions(const Partition& partition, const Hyperrectangle& initial,
                       const std::vector<Hyperrectangle>& unsafe);

// FNV-1a hash of the partition layout and markings; used to tie persisted
// transition bounds to the partition they were computed for.
std::uint64_t hash_partition(const Partition& partition);

// Compact, lossless description of a partition; cells and boundaries are
// recomputed from it deterministically. This is what persisted transition
// bounds carry so a bounds file stands on its own.
struct PartitionDescriptor {
    Hyperrectangle space;
    std::vector<std::size_t> cells_per_dim;
    std::vector<bool> unsafe_cell_flags;
    std::vector<std::size_t> initial_cell_indices;
    bool epsilon_rounded = false;
};

PartitionDescriptor describe_partition(const Partition& partition);

// @brief Reconstructs the full partition; bitwise identical to the original
//        because cell edges are a pure function of the space box and counts.
// @throws DimensionMismatch, IndexOutOfRange
Partition rebuild_partition(const PartitionDescriptor& descriptor);

}  // namespace pwcsbf
