#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include "pwcsbf/certificate.hpp"
#include "pwcsbf/dynamics.hpp"
#include "pwcsbf/geometry.hpp"
#include "pwcsbf/transition_bounds.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace pwcsbf;

double best_of(int repeat, const std::function<void()>& fn) {
    double best = 1e300;
    for (int r = 0; r < repeat; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"serial vs parallel kernel benchmark"};
    std::size_t cells = 30;
    std::size_t samples = 200000;
    int repeat = 3;
    app.add_option("--cells", cells, "grid cells per dimension (2-D system)")
        ->check(CLI::PositiveNumber);
    app.add_option("--samples", samples, "Monte Carlo trajectories")
        ->check(CLI::PositiveNumber);
    app.add_option("--repeat", repeat, "repetitions; best time is reported")
        ->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
    std::printf("openmp: %d threads\n", omp_get_max_threads());
#else
    std::printf("openmp: not compiled in; both columns run the serial path\n");
#endif

    // A contractive 2-D system over a configurable grid.
    const Hyperrectangle space = make_hyperrectangle({-1.0, -1.0}, {0.5, 0.5});
    const Hyperrectangle initial = make_hyperrectangle({-0.05, -0.05}, {0.05, 0.05});
    const double eps = 0.75 / static_cast<double>(cells);
    Partition part = generate_partition(space, {eps, eps});
    part = mark_regions(part, initial, {});
    const LinearDynamics lin = make_linear_dynamics({{0.5, 0.0}, {0.0, 0.5}}, {0.0, 0.0},
                                                    make_gaussian_noise({0.1, 0.1}));
    const PwaInclusionDynamics dyn = lift_linear_to_inclusion(lin, part);

    TransitionBounds tb_serial, tb_parallel;
    const double t_tb_serial =
        best_of(repeat, [&] { tb_serial = compute_transition_bounds_serial(dyn, part); });
    const double t_tb_parallel =
        best_of(repeat, [&] { tb_parallel = compute_transition_bounds(dyn, part); });
    const bool tb_equal =
        tb_serial.lower == tb_parallel.lower && tb_serial.upper == tb_parallel.upper;

    ValidationReport mc_serial, mc_parallel;
    const double t_mc_serial = best_of(repeat, [&] {
        mc_serial = validate_monte_carlo_serial(lin, part, initial, 10, samples, 42, 0.9);
    });
    const double t_mc_parallel = best_of(repeat, [&] {
        mc_parallel = validate_monte_carlo(lin, part, initial, 10, samples, 42, 0.9);
    });
    const bool mc_equal = mc_serial.violations == mc_parallel.violations &&
                          mc_serial.empirical_safety == mc_parallel.empirical_safety &&
                          mc_serial.confidence_lower == mc_parallel.confidence_lower;

    std::printf("%-28s %12s %10s %12s %9s %14s\n", "kernel", "size", "serial(s)",
                "parallel(s)", "speedup", "bitwise_equal");
    std::printf("%-28s %9zu^2 %10.3f %12.3f %8.2fx %14s\n", "transition_bounds",
                part.cells_per_dim[0], t_tb_serial, t_tb_parallel,
                t_tb_serial / t_tb_parallel, tb_equal ? "yes" : "NO");
    std::printf("%-28s %12zu %10.3f %12.3f %8.2fx %14s\n", "validate_monte_carlo", samples,
                t_mc_serial, t_mc_parallel, t_mc_serial / t_mc_parallel,
                mc_equal ? "yes" : "NO");
    return (tb_equal && mc_equal) ? 0 : 1;
}
