#pragma once

#include <string>
#include <vector>

#include "pwcsbf/errors.hpp"
#include "pwcsbf/geometry.hpp"

namespace pwcsbf {

using Vector = std::vector<double>;
using Matrix = std::vector<std::vector<double>>;  // row-major, A[row][col]

// Additive diagonal Gaussian noise, one standard deviation per dimension.
struct GaussianNoise {
    Vector sigma;
    std::size_t dimension() const { return sigma.size(); }
};

// @throws NonPositiveSigma, DimensionMismatch
GaussianNoise make_gaussian_noise(const Vector& sigma);

// x_{k+1} = A x_k + b + w_k.
struct LinearDynamics {
    Matrix A;
    Vector b;
    GaussianNoise noise;
    std::size_t dimension() const { return b.size(); }
};

// @throws DimensionMismatch
LinearDynamics make_linear_dynamics(const Matrix& A, const Vector& b,
                                    const GaussianNoise& noise);

// Noiseless image of x under the dynamics: A x + b.
Vector apply_linear(const LinearDynamics& dyn, const Vector& x);

// Interval hull of the noiseless image of a region: the mean of the next-state
// distribution lies in [lower, upper] componentwise.
struct MeanIntervalVector {
    Vector lower;
    Vector upper;
};

// Piecewise-affine inclusion: per region, affine lower and upper maps that
// sandwich the true vector field. Regions coincide with partition cells.
struct PwaInclusionDynamics {
    std::vector<Hyperrectangle> regions;
    std::vector<Matrix> A_lower, A_upper;
    std::vector<Vector> b_lower, b_upper;
    GaussianNoise noise;
    std::string descriptor;

    std::size_t num_regions() const { return regions.size(); }
    std::size_t dimension() const { return noise.dimension(); }
};

// @brief Validated constructor. When check_consistency is set, verifies
//        lower-map <= upper-map componentwise at every vertex of every region
//        (affine maps attain their extreme difference at a vertex, so this
//        certifies the inclusion over the whole region). O(regions * 2^n).
// @throws DimensionMismatch, InconsistentBounds
PwaInclusionDynamics make_pwa_inclusion_dynamics(
    const std::vector<Hyperrectangle>& regions, const std::vector<Matrix>& A_lower,
    const std::vector<Matrix>& A_upper, const std::vector<Vector>& b_lower,
    const std::vector<Vector>& b_upper, const GaussianNoise& noise,
    bool check_consistency = true);

// @brief Exact interval hull of {A x + b : x in cell}.
// @throws DimensionMismatch
MeanIntervalVector image_interval_linear(const LinearDynamics& dyn,
                                         const Hyperrectangle& cell);

// @brief Interval hull of the inclusion's image over a region: minimum of the
//        lower map and maximum of the upper map; contains every f(x) the
//        inclusion admits.
// @throws IndexOutOfRange
MeanIntervalVector image_interval_pwa(const PwaInclusionDynamics& dyn,
                                      std::size_t region_index);

// @brief Represent linear dynamics as a degenerate inclusion (equal lower and
//        upper maps) over the partition cells.
PwaInclusionDynamics lift_linear_to_inclusion(const LinearDynamics& dyn,
                                              const Partition& partition);

}  // namespace pwcsbf
