#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "engines_common.hpp"
#include "pwcsbf/ambiguity.hpp"
#include "pwcsbf/engines.hpp"

namespace pwcsbf {

// Projected subgradient descent on L(b) = eta(b) + N * beta(b) over the box
// [0,1]^|safe| with unsafe cells pinned to 1:
//   eta(b)  = max over initial cells of b_i        (subgradient e_{i*})
//   beta(b) = max over safe cells of the exact worst-case expectation minus
//             b_i, both through the same greedy ambiguity-set maximizer the
//             other engines certify against; the maximizing distribution p*
//             supplies the subgradient N * (p*_safe - e_{i*}).
// The velocity is an exponential moving average of subgradients,
//   v <- m*v + (1-m)*g,   b <- clamp(b - lr_t * v, 0, 1),
// so the effective step stays at lr_t regardless of momentum. The plain
// heavy-ball forms scale the step by 1/(1-m); with max-type losses whose
// argmax rotates between iterations they settle into a limit cycle of that
// amplitude instead of converging, while the average of the rotating
// subgradients points at the minimum. Every iterate stays a valid barrier,
// so the final point is certified as-is. Ties in the argmaxes break to the
// lowest index and the descent is deterministic: the seed in the settings
// is recorded but never drawn from.
CertificateResult synthesize_gd(const TransitionBounds& bounds, const Partition& partition,
                                std::size_t horizon, const GdSettings& settings) {
    const auto start = detail::Clock::now();
    detail::check_engine_inputs(bounds, partition, horizon);
    if (!(settings.initial_lr > 0.0))
        throw NegativeInput("synthesize_gd: initial_lr must be positive");
    if (!(settings.decay > 0.0) || settings.decay > 1.0)
        throw NegativeInput("synthesize_gd: decay must lie in (0, 1]");
    if (!(settings.momentum >= 0.0) || settings.momentum >= 1.0)
        throw NegativeInput("synthesize_gd: momentum must lie in [0, 1)");

    const std::size_t q = partition.num_cells();
    const std::size_t cols = bounds.cols();
    const std::vector<std::size_t> safe = detail::safe_cells(partition);
    const double n_horizon = static_cast<double>(horizon);

    std::vector<double> b(q, 0.0);
    for (std::size_t j = 0; j < q; ++j)
        if (partition.unsafe_cell_flags[j]) b[j] = 1.0;
    std::vector<double> velocity(q, 0.0);
    std::vector<double> gradient(q, 0.0);
    std::vector<double> coeffs(q + 1, 0.0);
    coeffs[q] = 1.0;

    // beta argmax and its maximizing distribution; gap is unclamped here so
    // the descent sees the true subgradient even when all gaps are negative.
    auto eval_beta = [&](std::size_t& argmax) {
        double best = -std::numeric_limits<double>::infinity();
        argmax = Partition::npos;
        for (std::size_t j = 0; j < q; ++j)
            coeffs[j] = partition.unsafe_cell_flags[j] ? 1.0 : b[j];
        const std::vector<std::size_t> order = descending_order(coeffs);
        for (std::size_t i : safe) {
            const std::span<const double> lo(bounds.lower.data() + i * cols, cols);
            const std::span<const double> up(bounds.upper.data() + i * cols, cols);
            const double gap = worst_case_value(coeffs, lo, up, order) - b[i];
            if (gap > best) {
                best = gap;
                argmax = i;
            }
        }
        return best;
    };
    auto eval_eta = [&](std::size_t& argmax) {
        double best = -std::numeric_limits<double>::infinity();
        argmax = Partition::npos;
        for (std::size_t i : partition.initial_cell_indices)
            if (b[i] > best) {
                best = b[i];
                argmax = i;
            }
        return best;
    };

    double lr = settings.initial_lr;
    for (std::size_t t = 0; t < settings.num_iterations; ++t) {
        std::size_t i_beta = 0, i_eta = 0;
        eval_beta(i_beta);
        eval_eta(i_eta);
        // Maximizing distribution of the active row.
        const std::span<const double> lo(bounds.lower.data() + i_beta * cols, cols);
        const std::span<const double> up(bounds.upper.data() + i_beta * cols, cols);
        const std::vector<std::size_t> order = descending_order(coeffs);
        const WorstCaseResult wc = worst_case_expectation(coeffs, lo, up, order);

        std::fill(gradient.begin(), gradient.end(), 0.0);
        gradient[i_eta] += 1.0;
        for (std::size_t j : safe) gradient[j] += n_horizon * wc.distribution[j];
        gradient[i_beta] -= n_horizon;

        for (std::size_t j : safe) {
            velocity[j] = settings.momentum * velocity[j] +
                          (1.0 - settings.momentum) * gradient[j];
            b[j] = std::clamp(b[j] - lr * velocity[j], 0.0, 1.0);
        }
        lr *= settings.decay;
    }

    std::size_t i_beta = 0, i_eta = 0;
    const double final_beta = eval_beta(i_beta);
    const double final_eta = eval_eta(i_eta);

    std::map<std::string, std::string> meta;
    meta["engine"] = "gd";
    meta["final_loss"] = detail::format_double(final_eta + n_horizon * final_beta);
    meta["final_beta_unclamped"] = detail::format_double(final_beta);
    meta["num_iterations"] = std::to_string(settings.num_iterations);
    meta["initial_lr"] = detail::format_double(settings.initial_lr);
    meta["decay"] = detail::format_double(settings.decay);
    meta["momentum"] = detail::format_double(settings.momentum);
    meta["seed"] = std::to_string(settings.seed);

    CertificateResult result =
        detail::finalize_result(Engine::gd, std::move(b), bounds, partition, horizon,
                                settings.num_iterations, 0.0, std::move(meta));
    result.wall_time_seconds = detail::seconds_since(start);
    return result;
}

}  // namespace pwcsbf
