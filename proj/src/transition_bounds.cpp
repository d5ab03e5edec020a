#include "pwcsbf/transition_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pwcsbf {

double gaussian_mass(double interval_low, double interval_high, double mean,
                     double sigma) {
    if (interval_low > interval_high)
        throw InvertedInterval("gaussian_mass: interval_low > interval_high");
    if (!(sigma > 0.0)) throw NonPositiveSigma("gaussian_mass: sigma must be positive");
    const double scale = sigma * std::numbers::sqrt2;
    const double a = (interval_low - mean) / scale;
    const double b = (interval_high - mean) / scale;
    double mass;
    if (a >= 0.0)
        mass = 0.5 * (std::erfc(a) - std::erfc(b));
    else if (b <= 0.0)
        mass = 0.5 * (std::erfc(-b) - std::erfc(-a));
    else
        mass = 0.5 * (std::erf(b) - std::erf(a));
    return std::clamp(mass, 0.0, 1.0);
}

FactorBounds factor_bounds(double target_low, double target_high, double mean_low,
                           double mean_high, double sigma) {
    if (mean_low > mean_high)
        throw InvertedInterval("factor_bounds: mean_low > mean_high");
    const double midpoint = 0.5 * (target_low + target_high);
    const double peak = std::clamp(midpoint, mean_low, mean_high);
    FactorBounds out;
    out.max = gaussian_mass(target_low, target_high, peak, sigma);
    out.min = std::min(gaussian_mass(target_low, target_high, mean_low, sigma),
                       gaussian_mass(target_low, target_high, mean_high, sigma));
    return out;
}

namespace {

constexpr double kBoxAlignTol = 1e-9;

void check_alignment(const PwaInclusionDynamics& dyn, const Partition& partition) {
    if (dyn.dimension() != partition.space.dimension())
        throw DimensionMismatch("compute_transition_bounds: dynamics dimension " +
                                std::to_string(dyn.dimension()) + " != partition dimension " +
                                std::to_string(partition.space.dimension()));
    if (dyn.num_regions() != partition.num_cells())
        throw DimensionMismatch("compute_transition_bounds: " + std::to_string(dyn.num_regions()) +
                                " dynamics regions vs " + std::to_string(partition.num_cells()) +
                                " partition cells");
    for (std::size_t q = 0; q < dyn.num_regions(); ++q)
        for (std::size_t d = 0; d < dyn.dimension(); ++d)
            if (std::abs(dyn.regions[q].low[d] - partition.cells[q].low[d]) > kBoxAlignTol ||
                std::abs(dyn.regions[q].high[d] - partition.cells[q].high[d]) > kBoxAlignTol)
                throw DimensionMismatch("compute_transition_bounds: dynamics region " +
                                        std::to_string(q) + " does not coincide with its cell");
}

// Fills row i of the bounds matrix. Writes only into [i*cols, (i+1)*cols).
void compute_row(const PwaInclusionDynamics& dyn, const Partition& partition,
                 std::size_t i, std::vector<double>& lower, std::vector<double>& upper) {
    const std::size_t n = partition.space.dimension();
    const std::size_t q = partition.num_cells();
    const std::size_t cols = q + 1;
    double* lo_row = lower.data() + i * cols;
    double* up_row = upper.data() + i * cols;

    if (partition.unsafe_cell_flags[i]) {
        // Absorbing row: unsafe sources stay unsafe; the engines pin their
        // barrier value to 1 and never optimize over these rows.
        std::fill(lo_row, lo_row + cols, 0.0);
        std::fill(up_row, up_row + cols, 0.0);
        lo_row[q] = 1.0;
        up_row[q] = 1.0;
        return;
    }

    const MeanIntervalVector mean = image_interval_pwa(dyn, i);

    // Per-dimension factor extrema over the shared cell boundaries; the mass of
    // a product cell is the product of its per-dimension factors.
    std::vector<std::vector<FactorBounds>> factors(n);
    double space_min = 1.0, space_max = 1.0;
    for (std::size_t d = 0; d < n; ++d) {
        const auto& bd = partition.boundaries[d];
        factors[d].resize(partition.cells_per_dim[d]);
        for (std::size_t k = 0; k < partition.cells_per_dim[d]; ++k)
            factors[d][k] = factor_bounds(bd[k], bd[k + 1], mean.lower[d], mean.upper[d],
                                          dyn.noise.sigma[d]);
        const FactorBounds space_fb =
            factor_bounds(partition.space.low[d], partition.space.high[d], mean.lower[d],
                          mean.upper[d], dyn.noise.sigma[d]);
        space_min *= space_fb.min;
        space_max *= space_fb.max;
    }

    // Cross-subtracted interval for the mass landing on safe cells; its
    // complement bounds the unsafe column (exterior plus unsafe-flagged cells,
    // all of which carry barrier value 1).
    double unsafe_cells_lower_sum = 0.0, unsafe_cells_upper_sum = 0.0;
    std::vector<std::size_t> multi(n, 0);
    for (std::size_t j = 0; j < q; ++j) {
        double lo = 1.0, up = 1.0;
        for (std::size_t d = 0; d < n; ++d) {
            lo *= factors[d][multi[d]].min;
            up *= factors[d][multi[d]].max;
        }
        if (partition.unsafe_cell_flags[j]) {
            unsafe_cells_lower_sum += lo;
            unsafe_cells_upper_sum += up;
            // The true mass of an unsafe target is folded into the unsafe
            // column, so its own column must admit zero.
            lo = 0.0;
        }
        lo_row[j] = std::clamp(lo, 0.0, 1.0);
        up_row[j] = std::clamp(up, 0.0, 1.0);
        for (std::size_t d = n; d-- > 0;) {
            if (++multi[d] < partition.cells_per_dim[d]) break;
            multi[d] = 0;
        }
    }
    const double safe_mass_lower = space_min - unsafe_cells_upper_sum;
    const double safe_mass_upper = space_max - unsafe_cells_lower_sum;
    lo_row[q] = std::clamp(1.0 - safe_mass_upper, 0.0, 1.0);
    up_row[q] = std::clamp(1.0 - safe_mass_lower, 0.0, 1.0);
}

void check_rows(const TransitionBounds& tb) {
    constexpr double tol = 1e-9;
    for (std::size_t i = 0; i < tb.n_regions; ++i) {
        double sum_lower = 0.0, sum_upper = 0.0;
        for (std::size_t j = 0; j < tb.cols(); ++j) {
            sum_lower += tb.lower_at(i, j);
            sum_upper += tb.upper_at(i, j);
        }
        if (sum_lower > 1.0 + tol)
            throw InfeasibleRow(i, "transition bounds row " + std::to_string(i) +
                                       ": lower bounds sum to " + std::to_string(sum_lower) +
                                       " > 1");
        if (sum_upper < 1.0 - tol)
            throw InfeasibleRow(i, "transition bounds row " + std::to_string(i) +
                                       ": upper bounds sum to " + std::to_string(sum_upper) +
                                       " < 1");
    }
}

TransitionBounds compute_impl(const PwaInclusionDynamics& dyn, const Partition& partition,
                              bool parallel) {
    check_alignment(dyn, partition);
    TransitionBounds tb;
    tb.n_regions = partition.num_cells();
    tb.lower.assign(tb.n_regions * tb.cols(), 0.0);
    tb.upper.assign(tb.n_regions * tb.cols(), 0.0);
    tb.dynamics_descriptor = dyn.descriptor;
    tb.sigma = dyn.noise.sigma;
    tb.partition_hash = hash_partition(partition);
    tb.partition = describe_partition(partition);

    const long long rows = static_cast<long long>(tb.n_regions);
    if (parallel) {
#pragma omp parallel for schedule(dynamic, 4)
        for (long long i = 0; i < rows; ++i)
            compute_row(dyn, partition, static_cast<std::size_t>(i), tb.lower, tb.upper);
    } else {
        for (long long i = 0; i < rows; ++i)
            compute_row(dyn, partition, static_cast<std::size_t>(i), tb.lower, tb.upper);
    }
    check_rows(tb);
    return tb;
}

}  // namespace

TransitionBounds compute_transition_bounds(const PwaInclusionDynamics& dyn,
                                           const Partition& partition) {
    return compute_impl(dyn, partition, true);
}

TransitionBounds compute_transition_bounds_serial(const PwaInclusionDynamics& dyn,
                                                  const Partition& partition) {
    return compute_impl(dyn, partition, false);
}

}  // namespace pwcsbf
