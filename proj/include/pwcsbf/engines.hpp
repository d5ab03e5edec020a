#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pwcsbf/transition_bounds.hpp"

namespace pwcsbf {

// Piecewise-constant barrier candidate: value values[i] on cell i of the
// partition, 1 everywhere outside the safe space. Unsafe-flagged cells carry
// the value 1 by definition; make_pwc_barrier pins them.
struct PwcBarrier {
    std::vector<double> values;
};

// @brief Validates values (one per cell, each >= 0) and pins unsafe-flagged
//        cells to 1.
// @throws LengthMismatch, NegativeBarrierValue
PwcBarrier make_pwc_barrier(std::vector<double> values, const Partition& partition);

enum class Engine { dual, cegis, gd };

const char* engine_name(Engine engine);

// A synthesized certificate. eta, beta and beta_per_region are re-derived
// from the barrier by the certificate checker, independently of whatever the
// engine's internal optimizer reported; the raw engine numbers live in
// metadata.
struct CertificateResult {
    PwcBarrier barrier;
    double eta = 0.0;
    double beta = 0.0;
    std::vector<double> beta_per_region;
    double p_safe = 0.0;
    std::size_t horizon = 1;
    Engine engine = Engine::dual;
    std::size_t iterations = 0;
    double wall_time_seconds = 0.0;
    std::map<std::string, std::string> metadata;

    double objective() const { return eta + static_cast<double>(horizon) * beta; }
};

struct GdSettings {
    std::size_t num_iterations = 10000;
    double initial_lr = 1e-2;
    double decay = 0.9999;    // in (0, 1]
    double momentum = 0.9;    // in [0, 1)
    std::uint64_t seed = 0;   // recorded for provenance; the descent is deterministic
};

struct CegisSettings {
    std::size_t num_iterations = 10;  // used when adaptive is false
    bool adaptive = true;             // iterate until no counterexample is found
    double tolerance = 1e-8;          // counterexample acceptance margin
};

// @brief Exact synthesis through the dual of the inner maximization; the
//        solution is a global optimum of the minimax program.
// @throws LpInfeasible, LpSolverFailure, LengthMismatch, NegativeInput
CertificateResult synthesize_dual(const TransitionBounds& bounds, const Partition& partition,
                                  std::size_t horizon);

// @brief Counterexample-guided synthesis: alternates a candidate LP over the
//        collected worst-case distributions with exact worst-case queries.
// @throws LpInfeasible, LpSolverFailure, LengthMismatch, NegativeInput
CertificateResult synthesize_cegis(const TransitionBounds& bounds, const Partition& partition,
                                   std::size_t horizon, const CegisSettings& settings = {});

// @brief Projected subgradient descent on eta(b) + horizon * beta(b) with
//        momentum and exponential step decay. Fast, no optimality guarantee;
//        the result is still a sound certificate.
// @throws LengthMismatch, NegativeInput
CertificateResult synthesize_gd(const TransitionBounds& bounds, const Partition& partition,
                                std::size_t horizon, const GdSettings& settings = {});

}  // namespace pwcsbf
