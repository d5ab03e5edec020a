#include "pwcsbf/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace pwcsbf {

GaussianNoise make_gaussian_noise(const Vector& sigma) {
    if (sigma.empty()) throw DimensionMismatch("make_gaussian_noise: dimension must be >= 1");
    for (std::size_t d = 0; d < sigma.size(); ++d)
        if (!(sigma[d] > 0.0) || !std::isfinite(sigma[d]))
            throw NonPositiveSigma("make_gaussian_noise: sigma[" + std::to_string(d) +
                                   "] must be positive and finite");
    return GaussianNoise{sigma};
}

namespace {

void check_affine_map(const Matrix& A, const Vector& b, std::size_t n,
                      const std::string& where) {
    if (A.size() != n || b.size() != n)
        throw DimensionMismatch(where + ": map must be " + std::to_string(n) + "-dimensional");
    for (const auto& row : A)
        if (row.size() != n) throw DimensionMismatch(where + ": A must be square");
}

}  // namespace

LinearDynamics make_linear_dynamics(const Matrix& A, const Vector& b,
                                    const GaussianNoise& noise) {
    check_affine_map(A, b, noise.dimension(), "make_linear_dynamics");
    return LinearDynamics{A, b, noise};
}

Vector apply_linear(const LinearDynamics& dyn, const Vector& x) {
    const std::size_t n = dyn.dimension();
    if (x.size() != n) throw DimensionMismatch("apply_linear: point dimension mismatch");
    Vector y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = dyn.b[i];
        for (std::size_t j = 0; j < n; ++j) acc += dyn.A[i][j] * x[j];
        y[i] = acc;
    }
    return y;
}

namespace {

// Per output dimension, an affine map attains its extremes over a box at the
// per-coordinate sign-selected corners.
void affine_hull(const Matrix& A, const Vector& b, const Hyperrectangle& box,
                 Vector& lo, Vector& hi) {
    const std::size_t n = b.size();
    lo.resize(n);
    hi.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double mn = b[i], mx = b[i];
        for (std::size_t j = 0; j < n; ++j) {
            const double a = A[i][j] * box.low[j];
            const double c = A[i][j] * box.high[j];
            mn += std::min(a, c);
            mx += std::max(a, c);
        }
        lo[i] = mn;
        hi[i] = mx;
    }
}

}  // namespace

PwaInclusionDynamics make_pwa_inclusion_dynamics(
    const std::vector<Hyperrectangle>& regions, const std::vector<Matrix>& A_lower,
    const std::vector<Matrix>& A_upper, const std::vector<Vector>& b_lower,
    const std::vector<Vector>& b_upper, const GaussianNoise& noise,
    bool check_consistency) {
    const std::size_t n = noise.dimension();
    const std::size_t r = regions.size();
    if (A_lower.size() != r || A_upper.size() != r || b_lower.size() != r ||
        b_upper.size() != r)
        throw DimensionMismatch("make_pwa_inclusion_dynamics: per-region map counts differ "
                                "from the region count");
    for (std::size_t q = 0; q < r; ++q) {
        if (regions[q].dimension() != n)
            throw DimensionMismatch("make_pwa_inclusion_dynamics: region " + std::to_string(q) +
                                    " dimension mismatch");
        check_affine_map(A_lower[q], b_lower[q], n, "make_pwa_inclusion_dynamics[lower]");
        check_affine_map(A_upper[q], b_upper[q], n, "make_pwa_inclusion_dynamics[upper]");
    }
    if (check_consistency) {
        Vector vertex(n), vlo(n), vhi(n);
        for (std::size_t q = 0; q < r; ++q) {
            const std::size_t corners = std::size_t{1} << n;
            for (std::size_t mask = 0; mask < corners; ++mask) {
                for (std::size_t d = 0; d < n; ++d)
                    vertex[d] = (mask >> d) & 1 ? regions[q].high[d] : regions[q].low[d];
                for (std::size_t i = 0; i < n; ++i) {
                    double lo = b_lower[q][i], hi = b_upper[q][i];
                    for (std::size_t j = 0; j < n; ++j) {
                        lo += A_lower[q][i][j] * vertex[j];
                        hi += A_upper[q][i][j] * vertex[j];
                    }
                    if (lo > hi)
                        throw InconsistentBounds(
                            q, "make_pwa_inclusion_dynamics: lower map exceeds upper map at a "
                               "vertex of region " +
                                   std::to_string(q) + ", output dimension " + std::to_string(i));
                }
            }
        }
    }
    PwaInclusionDynamics dyn{regions, A_lower, A_upper, b_lower, b_upper, noise,
                             "pwa(n=" + std::to_string(n) +
                                 ", regions=" + std::to_string(r) + ")"};
    return dyn;
}

MeanIntervalVector image_interval_linear(const LinearDynamics& dyn,
                                         const Hyperrectangle& cell) {
    if (cell.dimension() != dyn.dimension())
        throw DimensionMismatch("image_interval_linear: cell dimension mismatch");
    MeanIntervalVector out;
    affine_hull(dyn.A, dyn.b, cell, out.lower, out.upper);
    return out;
}

MeanIntervalVector image_interval_pwa(const PwaInclusionDynamics& dyn,
                                      std::size_t region_index) {
    if (region_index >= dyn.num_regions())
        throw IndexOutOfRange("image_interval_pwa: region index " +
                              std::to_string(region_index) + " out of range");
    MeanIntervalVector out;
    Vector hi_of_lower, lo_of_upper;
    affine_hull(dyn.A_lower[region_index], dyn.b_lower[region_index],
                dyn.regions[region_index], out.lower, hi_of_lower);
    affine_hull(dyn.A_upper[region_index], dyn.b_upper[region_index],
                dyn.regions[region_index], lo_of_upper, out.upper);
    return out;
}

PwaInclusionDynamics lift_linear_to_inclusion(const LinearDynamics& dyn,
                                              const Partition& partition) {
    if (partition.space.dimension() != dyn.dimension())
        throw DimensionMismatch("lift_linear_to_inclusion: partition dimension mismatch");
    const std::size_t r = partition.num_cells();
    PwaInclusionDynamics out{partition.cells,
                             std::vector<Matrix>(r, dyn.A),
                             std::vector<Matrix>(r, dyn.A),
                             std::vector<Vector>(r, dyn.b),
                             std::vector<Vector>(r, dyn.b),
                             dyn.noise,
                             "linear(n=" + std::to_string(dyn.dimension()) + ")"};
    return out;
}

}  // namespace pwcsbf
