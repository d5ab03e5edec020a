#include "pwcsbf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace pwcsbf {

double Hyperrectangle::volume() const {
    double v = 1.0;
    for (std::size_t d = 0; d < dimension(); ++d) v *= extent(d);
    return v;
}

bool Hyperrectangle::contains(const std::vector<double>& x) const {
    if (x.size() != dimension())
        throw DimensionMismatch("contains: point dimension " + std::to_string(x.size()) +
                                " != box dimension " + std::to_string(dimension()));
    for (std::size_t d = 0; d < dimension(); ++d)
        if (x[d] < low[d] || x[d] > high[d]) return false;
    return true;
}

Hyperrectangle make_hyperrectangle(const std::vector<double>& low,
                                   const std::vector<double>& high) {
    if (low.size() != high.size())
        throw DimensionMismatch("make_hyperrectangle: low has " + std::to_string(low.size()) +
                                " entries, high has " + std::to_string(high.size()));
    if (low.empty()) throw DimensionMismatch("make_hyperrectangle: dimension must be >= 1");
    for (std::size_t d = 0; d < low.size(); ++d)
        if (low[d] > high[d])
            throw InvertedBounds("make_hyperrectangle: low > high in dimension " +
                                 std::to_string(d));
    return Hyperrectangle{low, high};
}

std::size_t Partition::cell_index_of(const std::vector<double>& x) const {
    if (x.size() != space.dimension())
        throw DimensionMismatch("cell_index_of: point dimension mismatch");
    std::size_t index = 0;
    for (std::size_t d = 0; d < x.size(); ++d) {
        const auto& bd = boundaries[d];
        if (x[d] < bd.front() || x[d] > bd.back()) return npos;
        std::size_t k;
        if (x[d] == bd.back()) {
            k = cells_per_dim[d] - 1;  // last cell per dimension is closed
        } else {
            k = static_cast<std::size_t>(
                    std::upper_bound(bd.begin(), bd.end(), x[d]) - bd.begin()) -
                1;
        }
        index = index * cells_per_dim[d] + k;
    }
    return index;
}

namespace {

// Fills boundaries and cells for the given per-dimension counts; the grid is
// a pure function of (space, counts).
void build_grid(Partition& p) {
    const std::size_t n = p.space.dimension();
    p.boundaries.assign(n, {});
    std::size_t total = 1;
    for (std::size_t d = 0; d < n; ++d) {
        const std::size_t count = p.cells_per_dim[d];
        const double extent = p.space.extent(d);
        auto& bd = p.boundaries[d];
        bd.resize(count + 1);
        for (std::size_t k = 0; k <= count; ++k)
            bd[k] = p.space.low[d] +
                    extent * (static_cast<double>(k) / static_cast<double>(count));
        bd.front() = p.space.low[d];
        bd.back() = p.space.high[d];
        if (total > 50'000'000 / count)
            throw Error("generate_partition: cell count exceeds 50e6");
        total *= count;
    }
    p.cells.clear();
    p.cells.reserve(total);
    std::vector<std::size_t> multi(n, 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        Hyperrectangle cell;
        cell.low.resize(n);
        cell.high.resize(n);
        for (std::size_t d = 0; d < n; ++d) {
            cell.low[d] = p.boundaries[d][multi[d]];
            cell.high[d] = p.boundaries[d][multi[d] + 1];
        }
        p.cells.push_back(std::move(cell));
        for (std::size_t d = n; d-- > 0;) {  // row-major: last dimension fastest
            if (++multi[d] < p.cells_per_dim[d]) break;
            multi[d] = 0;
        }
    }
}

}  // namespace

Partition generate_partition(const Hyperrectangle& space,
                             const std::vector<double>& epsilon) {
    const std::size_t n = space.dimension();
    if (epsilon.size() != n)
        throw DimensionMismatch("generate_partition: epsilon dimension mismatch");
    for (std::size_t d = 0; d < n; ++d)
        if (!(epsilon[d] > 0.0))
            throw NonPositiveEpsilon("generate_partition: epsilon[" + std::to_string(d) +
                                     "] must be positive");

    Partition p;
    p.space = space;
    p.cells_per_dim.resize(n);
    for (std::size_t d = 0; d < n; ++d) {
        const double extent = space.extent(d);
        const double requested = 2.0 * epsilon[d];
        // Tolerance guards against 8.000000001-style noise producing 9 cells.
        const double ratio = extent / requested;
        std::size_t count = static_cast<std::size_t>(std::max(1.0, std::ceil(ratio - 1e-9)));
        p.cells_per_dim[d] = count;
        const double width = extent / static_cast<double>(count);
        if (std::abs(width - requested) > 1e-12 * std::max(1.0, requested))
            p.epsilon_rounded = true;
    }
    build_grid(p);
    p.unsafe_cell_flags.assign(p.num_cells(), false);
    return p;
}

namespace {

bool closed_intersects(const Hyperrectangle& a, const Hyperrectangle& b) {
    for (std::size_t d = 0; d < a.dimension(); ++d)
        if (std::max(a.low[d], b.low[d]) > std::min(a.high[d], b.high[d])) return false;
    return true;
}

bool open_interior_intersects(const Hyperrectangle& a, const Hyperrectangle& b) {
    for (std::size_t d = 0; d < a.dimension(); ++d)
        if (std::max(a.low[d], b.low[d]) >= std::min(a.high[d], b.high[d])) return false;
    return true;
}

}  // namespace

Partition mark_regions(const Partition& partition, const Hyperrectangle& initial,
                       const std::vector<Hyperrectangle>& unsafe) {
    const std::size_t n = partition.space.dimension();
    if (initial.dimension() != n)
        throw DimensionMismatch("mark_regions: initial region dimension mismatch");
    for (const auto& u : unsafe)
        if (u.dimension() != n)
            throw DimensionMismatch("mark_regions: unsafe region dimension mismatch");
    for (std::size_t d = 0; d < n; ++d)
        if (initial.low[d] < partition.space.low[d] ||
            initial.high[d] > partition.space.high[d])
            throw InitialOutsideSpace("mark_regions: initial region leaves the space box in dimension " +
                                      std::to_string(d));

    Partition out = partition;
    out.initial_cell_indices.clear();
    out.unsafe_cell_flags.assign(partition.num_cells(), false);
    for (std::size_t i = 0; i < partition.num_cells(); ++i) {
        const auto& cell = partition.cells[i];
        const bool is_initial = closed_intersects(cell, initial);
        bool is_unsafe = false;
        for (const auto& u : unsafe)
            if (open_interior_intersects(cell, u)) {
                is_unsafe = true;
                break;
            }
        if (is_initial && is_unsafe)
            throw InitialUnsafeOverlap("mark_regions: cell " + std::to_string(i) +
                                       " intersects both the initial and an unsafe region");
        if (is_initial) out.initial_cell_indices.push_back(i);
        out.unsafe_cell_flags[i] = is_unsafe;
    }
    return out;
}

namespace {

struct Fnv1a64 {
    std::uint64_t state = 14695981039346656037ULL;
    void bytes(const void* data, std::size_t len) {
        const unsigned char* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            state ^= p[i];
            state *= 1099511628211ULL;
        }
    }
    void u64(std::uint64_t v) { bytes(&v, sizeof v); }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        u64(bits);
    }
};

}  // namespace

std::uint64_t hash_partition(const Partition& partition) {
    Fnv1a64 h;
    h.u64(partition.space.dimension());
    for (double v : partition.space.low) h.f64(v);
    for (double v : partition.space.high) h.f64(v);
    for (std::size_t c : partition.cells_per_dim) h.u64(c);
    for (bool f : partition.unsafe_cell_flags) h.u64(f ? 1 : 0);
    for (std::size_t i : partition.initial_cell_indices) h.u64(i);
    return h.state;
}

PartitionDescriptor describe_partition(const Partition& partition) {
    PartitionDescriptor d;
    d.space = partition.space;
    d.cells_per_dim = partition.cells_per_dim;
    d.unsafe_cell_flags = partition.unsafe_cell_flags;
    d.initial_cell_indices = partition.initial_cell_indices;
    d.epsilon_rounded = partition.epsilon_rounded;
    return d;
}

Partition rebuild_partition(const PartitionDescriptor& descriptor) {
    const std::size_t n = descriptor.space.dimension();
    if (n == 0 || descriptor.cells_per_dim.size() != n)
        throw DimensionMismatch("rebuild_partition: cells_per_dim length mismatch");
    for (std::size_t c : descriptor.cells_per_dim)
        if (c == 0) throw DimensionMismatch("rebuild_partition: zero cell count");
    Partition p;
    p.space = descriptor.space;
    p.cells_per_dim = descriptor.cells_per_dim;
    p.epsilon_rounded = descriptor.epsilon_rounded;
    build_grid(p);
    if (descriptor.unsafe_cell_flags.size() != p.num_cells())
        throw DimensionMismatch("rebuild_partition: unsafe flag count mismatch");
    p.unsafe_cell_flags = descriptor.unsafe_cell_flags;
    for (std::size_t i : descriptor.initial_cell_indices)
        if (i >= p.num_cells())
            throw IndexOutOfRange("rebuild_partition: initial cell index out of range");
    p.initial_cell_indices = descriptor.initial_cell_indices;
    return p;
}

}  // namespace pwcsbf
