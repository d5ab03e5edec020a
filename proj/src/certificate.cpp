#include "pwcsbf/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pwcsbf/ambiguity.hpp"
#include "pwcsbf/rng.hpp"

namespace pwcsbf {

PwcBarrier make_pwc_barrier(std::vector<double> values, const Partition& partition) {
    if (values.size() != partition.num_cells())
        throw LengthMismatch("make_pwc_barrier: " + std::to_string(values.size()) +
                             " values for " + std::to_string(partition.num_cells()) + " cells");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0.0))
            throw NegativeBarrierValue("make_pwc_barrier: value " + std::to_string(i) +
                                       " is negative or NaN");
        if (partition.unsafe_cell_flags[i]) values[i] = 1.0;
    }
    return PwcBarrier{std::move(values)};
}

const char* engine_name(Engine engine) {
    switch (engine) {
        case Engine::dual: return "dual";
        case Engine::cegis: return "cegis";
        case Engine::gd: return "gd";
    }
    return "unknown";
}

EvaluationResult evaluate_certificate(const PwcBarrier& barrier, const TransitionBounds& bounds,
                                      const Partition& partition) {
    const std::size_t q = partition.num_cells();
    if (barrier.values.size() != q)
        throw LengthMismatch("evaluate_certificate: barrier has " +
                             std::to_string(barrier.values.size()) + " values for " +
                             std::to_string(q) + " cells");
    if (bounds.n_regions != q)
        throw LengthMismatch("evaluate_certificate: bounds cover " +
                             std::to_string(bounds.n_regions) + " regions, partition has " +
                             std::to_string(q));
    for (std::size_t i = 0; i < q; ++i)
        if (!(barrier.values[i] >= 0.0))
            throw NegativeBarrierValue("evaluate_certificate: value " + std::to_string(i) +
                                       " is negative or NaN");

    // Expectation coefficients: barrier values on cells (1 on unsafe cells by
    // definition) and 1 on the unsafe column.
    std::vector<double> coeffs(q + 1);
    for (std::size_t j = 0; j < q; ++j)
        coeffs[j] = partition.unsafe_cell_flags[j] ? 1.0 : barrier.values[j];
    coeffs[q] = 1.0;
    const std::vector<std::size_t> order = descending_order(coeffs);

    EvaluationResult result;
    result.beta_per_region.assign(q, 0.0);
    const std::size_t cols = bounds.cols();
    for (std::size_t i = 0; i < q; ++i) {
        if (partition.unsafe_cell_flags[i]) continue;  // absorbing, no decrease condition
        const std::span<const double> lo(bounds.lower.data() + i * cols, cols);
        const std::span<const double> hi(bounds.upper.data() + i * cols, cols);
        const double expectation = worst_case_value(coeffs, lo, hi, order);
        result.beta_per_region[i] = std::max(0.0, expectation - barrier.values[i]);
        result.beta = std::max(result.beta, result.beta_per_region[i]);
    }
    for (std::size_t i : partition.initial_cell_indices)
        result.eta = std::max(result.eta, barrier.values[i]);
    return result;
}

double psafe(double eta, double beta, std::size_t horizon) {
    if (!(eta >= 0.0) || !(beta >= 0.0))
        throw NegativeInput("psafe: eta and beta must be nonnegative");
    if (horizon == 0) throw NegativeInput("psafe: horizon must be >= 1");
    const double bound = 1.0 - (eta + static_cast<double>(horizon) * beta);
    return std::clamp(bound, 0.0, 1.0);
}

double barrier_value(const PwcBarrier& barrier, const Partition& partition,
                     const std::vector<double>& x) {
    if (barrier.values.size() != partition.num_cells())
        throw LengthMismatch("barrier_value: barrier does not match the partition");
    const std::size_t idx = partition.cell_index_of(x);
    if (idx == Partition::npos || partition.unsafe_cell_flags[idx]) return 1.0;
    return barrier.values[idx];
}

namespace {

// Deterministic inclusive grid over the initial box: five points per
// dimension, reduced until the total stays within 4096, corners always
// included.
std::vector<std::vector<double>> initial_grid(const Hyperrectangle& box) {
    const std::size_t n = box.dimension();
    if (n > 12)
        throw DimensionTooLarge("validate_monte_carlo: initial grid limited to 12 dimensions");
    std::size_t per_dim = 5;
    auto total = [&](std::size_t k) {
        double t = 1.0;
        for (std::size_t d = 0; d < n; ++d) {
            t *= static_cast<double>(k);
            if (t > 4096.0) return t;
        }
        return t;
    };
    while (per_dim > 2 && total(per_dim) > 4096.0) --per_dim;
    std::vector<std::vector<double>> axes(n);
    for (std::size_t d = 0; d < n; ++d) {
        axes[d].resize(per_dim);
        for (std::size_t k = 0; k < per_dim; ++k)
            axes[d][k] = box.low[d] + box.extent(d) * (static_cast<double>(k) /
                                                       static_cast<double>(per_dim - 1));
        axes[d].front() = box.low[d];
        axes[d].back() = box.high[d];
    }
    std::size_t count = 1;
    for (std::size_t d = 0; d < n; ++d) count *= per_dim;
    std::vector<std::vector<double>> points;
    points.reserve(count);
    std::vector<std::size_t> multi(n, 0);
    for (std::size_t flat = 0; flat < count; ++flat) {
        std::vector<double> x(n);
        for (std::size_t d = 0; d < n; ++d) x[d] = axes[d][multi[d]];
        points.push_back(std::move(x));
        for (std::size_t d = n; d-- > 0;) {
            if (++multi[d] < per_dim) break;
            multi[d] = 0;
        }
    }
    return points;
}

bool point_unsafe(const Partition& partition, const std::vector<double>& x) {
    const std::size_t idx = partition.cell_index_of(x);
    return idx == Partition::npos || partition.unsafe_cell_flags[idx];
}

// One trajectory; returns true when it hits the unsafe region within the
// horizon. Noise dimensions are drawn in index order, one stream per
// trajectory.
bool simulate_one(const LinearDynamics& dynamics, const Partition& partition,
                  std::vector<double> x, std::size_t horizon, std::uint64_t stream_seed) {
    if (point_unsafe(partition, x)) return true;
    RandomStream rng(stream_seed);
    const std::size_t n = dynamics.dimension();
    for (std::size_t k = 0; k < horizon; ++k) {
        x = apply_linear(dynamics, x);
        for (std::size_t d = 0; d < n; ++d) x[d] += dynamics.noise.sigma[d] * rng.normal();
        if (point_unsafe(partition, x)) return true;
    }
    return false;
}

ValidationReport validate_impl(const LinearDynamics& dynamics, const Partition& partition,
                               const Hyperrectangle& initial_region, std::size_t horizon,
                               std::size_t samples, std::uint64_t seed, double certified,
                               bool parallel) {
    if (dynamics.dimension() != partition.space.dimension())
        throw DimensionMismatch("validate_monte_carlo: dynamics dimension mismatch");
    if (initial_region.dimension() != partition.space.dimension())
        throw DimensionMismatch("validate_monte_carlo: initial region dimension mismatch");
    if (samples == 0) throw NegativeInput("validate_monte_carlo: samples must be >= 1");
    if (horizon == 0) throw NegativeInput("validate_monte_carlo: horizon must be >= 1");
    if (!(certified >= 0.0) || certified > 1.0)
        throw NegativeInput("validate_monte_carlo: certified must lie in [0, 1]");

    const auto points = initial_grid(initial_region);
    const long long count = static_cast<long long>(samples);
    long long violations = 0;
    if (parallel) {
#pragma omp parallel for schedule(static) reduction(+ : violations)
        for (long long t = 0; t < count; ++t) {
            const auto& x0 = points[static_cast<std::size_t>(t) % points.size()];
            if (simulate_one(dynamics, partition, x0, horizon,
                             derive_seed(seed, static_cast<std::uint64_t>(t))))
                ++violations;
        }
    } else {
        for (long long t = 0; t < count; ++t) {
            const auto& x0 = points[static_cast<std::size_t>(t) % points.size()];
            if (simulate_one(dynamics, partition, x0, horizon,
                             derive_seed(seed, static_cast<std::uint64_t>(t))))
                ++violations;
        }
    }

    ValidationReport report;
    report.samples = samples;
    report.violations = static_cast<std::size_t>(violations);
    const double nn = static_cast<double>(samples);
    const double phat = 1.0 - static_cast<double>(violations) / nn;
    report.empirical_safety = phat;
    report.certified = certified;
    // One-sided 99% Wilson lower bound on the safety probability.
    const double z = 2.3263478740408408;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = phat + z2 / (2.0 * nn);
    const double radius = z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn));
    report.confidence_lower = (center - radius) / denom;
    // The empirical violation rate may exceed 1 - certified only by sampling
    // noise; three binomial standard deviations plus a small absolute slack.
    const double margin = 3.0 * std::sqrt(certified * (1.0 - certified) / nn) + 1e-3;
    report.consistent = (1.0 - phat) <= (1.0 - certified) + margin;
    return report;
}

}  // namespace

ValidationReport validate_monte_carlo(const LinearDynamics& dynamics, const Partition& partition,
                                      const Hyperrectangle& initial_region, std::size_t horizon,
                                      std::size_t samples, std::uint64_t seed, double certified) {
    return validate_impl(dynamics, partition, initial_region, horizon, samples, seed, certified,
                         true);
}

ValidationReport validate_monte_carlo_serial(const LinearDynamics& dynamics,
                                             const Partition& partition,
                                             const Hyperrectangle& initial_region,
                                             std::size_t horizon, std::size_t samples,
                                             std::uint64_t seed, double certified) {
    return validate_impl(dynamics, partition, initial_region, horizon, samples, seed, certified,
                         false);
}

}  // namespace pwcsbf
