#include "engines_common.hpp"

#include <cstdio>

#include "pwcsbf/certificate.hpp"

namespace pwcsbf::detail {

void check_engine_inputs(const TransitionBounds& bounds, const Partition& partition,
                         std::size_t horizon) {
    if (bounds.n_regions != partition.num_cells())
        throw LengthMismatch("synthesize: bounds cover " + std::to_string(bounds.n_regions) +
                             " regions, partition has " + std::to_string(partition.num_cells()));
    if (horizon == 0) throw NegativeInput("synthesize: horizon must be >= 1");
    if (partition.initial_cell_indices.empty())
        throw NegativeInput("synthesize: partition has no initial cells; run mark_regions first");
}

std::vector<std::size_t> safe_cells(const Partition& partition) {
    std::vector<std::size_t> safe;
    safe.reserve(partition.num_cells());
    for (std::size_t i = 0; i < partition.num_cells(); ++i)
        if (!partition.unsafe_cell_flags[i]) safe.push_back(i);
    return safe;
}

CertificateResult finalize_result(Engine engine, std::vector<double> values,
                                  const TransitionBounds& bounds, const Partition& partition,
                                  std::size_t horizon, std::size_t iterations, double wall_time,
                                  std::map<std::string, std::string> metadata) {
    CertificateResult result;
    result.barrier = make_pwc_barrier(std::move(values), partition);
    const EvaluationResult eval = evaluate_certificate(result.barrier, bounds, partition);
    result.eta = eval.eta;
    result.beta = eval.beta;
    result.beta_per_region = eval.beta_per_region;
    result.p_safe = psafe(eval.eta, eval.beta, horizon);
    result.horizon = horizon;
    result.engine = engine;
    result.iterations = iterations;
    result.wall_time_seconds = wall_time;
    result.metadata = std::move(metadata);
    return result;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace pwcsbf::detail
