#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pwcsbf/certificate.hpp"
#include "pwcsbf/dynamics.hpp"
#include "pwcsbf/engines.hpp"
#include "pwcsbf/errors.hpp"
#include "pwcsbf/geometry.hpp"
#include "pwcsbf/transition_bounds.hpp"

namespace pwcsbf {

enum class SystemKind { linear, pwa_inclusion };

const char* system_kind_name(SystemKind kind);

// Parsed and validated problem configuration. One abstract schema behind two
// accepted surfaces (YAML and JSON); field names follow the config format
// documented in docs/formats.md.
struct ProblemSpec {
    std::string name;  // optional label used in reports and benchmark tables
    SystemKind system_flag = SystemKind::linear;

    // system_flag == linear: inline dynamics x' = A x + b + w.
    Matrix A;
    Vector b;
    // system_flag == pwa_inclusion: dynamics loaded from a file.
    std::string dynamics_path;

    Vector sigma;
    Hyperrectangle state_space;
    Hyperrectangle initial_region;
    std::vector<Hyperrectangle> unsafe_regions;
    std::vector<double> epsilon;

    // Optional path to precomputed transition bounds; when set, the pipeline
    // loads them instead of computing and cross-checks the partition hash.
    std::string probabilities_path;

    Engine engine = Engine::dual;
    std::size_t time_horizon = 1;
    CegisSettings cegis;
    GdSettings gd;
};

// @brief Parses and validates a config file (YAML or JSON surface). Unknown
//        keys are rejected, defaults applied (time_horizon = 1, engine
//        setting defaults).
// @throws FileNotFound, ParseError, SchemaViolation
ProblemSpec load_config(const std::string& path);

// @brief Writes the canonical YAML echo of a spec; load_config(save_config(s))
//        reproduces every field.
void save_config(const ProblemSpec& spec, const std::string& path);

// @brief Persists transition bounds. The file is a one-line JSON header
//        carrying a length and FNV-1a checksum of the payload, followed by a
//        JSON payload with every float in hexadecimal notation, so the
//        round-trip is bitwise exact.
void save_bounds(const TransitionBounds& bounds, const std::string& path);

// @throws FileNotFound, ParseError, SchemaViolation, VersionMismatch,
//         ChecksumMismatch, InfeasibleRow (row feasibility re-validated on load)
TransitionBounds load_bounds(const std::string& path);

// @brief Loads piecewise-affine inclusion dynamics from the documented JSON
//        schema and runs the vertex consistency check.
// @throws FileNotFound, ParseError, SchemaViolation, VersionMismatch,
//         InconsistentBounds
PwaInclusionDynamics load_pwa_dynamics(const std::string& path);

void save_pwa_dynamics(const PwaInclusionDynamics& dynamics, const std::string& path);

struct RunReport {
    std::string system;
    PartitionDescriptor partition;
    CertificateResult certificate;
    bool epsilon_rounded = false;
    // Phase name -> seconds: partition, bounds, synthesis, validation, total.
    std::vector<std::pair<std::string, double>> timings;
};

// @brief Full pipeline: partition -> mark regions -> bounds (computed or
//        loaded) -> engine -> certified result. threads > 0 bounds internal
//        parallelism of the bounds computation; outputs do not depend on it.
// @throws errors propagated from each stage
RunReport run(const ProblemSpec& spec, std::size_t threads = 0);

// @brief Machine-readable rendering; with include_timings = false the output
//        is byte-identical across runs with identical inputs and seed.
std::string report_to_json(const RunReport& report, bool include_timings = true);

std::string report_to_text(const RunReport& report);

struct BenchmarkRow {
    std::string system;
    std::size_t num_cells = 0;
    std::string engine;
    double tau_seconds = 0.0;
    double eta = 0.0;
    double beta = 0.0;
    double p_safe = 0.0;
    std::string error;  // empty on success; failures keep the run going

    bool ok() const { return error.empty(); }
};

// @brief Runs every spec under every requested engine (all three when the
//        list is empty). Per-spec failures are recorded in the row and the
//        sweep continues.
std::vector<BenchmarkRow> run_benchmarks(const std::vector<ProblemSpec>& specs,
                                         const std::vector<Engine>& engines,
                                         std::size_t threads = 0);

// Aligned text table with columns system, |Q|, engine, tau(s), eta, beta, P_s.
std::string benchmarks_to_table(const std::vector<BenchmarkRow>& rows);

// Plot-ready CSV series: system,num_cells,engine,tau_seconds,p_safe per row
// (failed rows are omitted).
std::string benchmarks_to_csv(const std::vector<BenchmarkRow>& rows);

}  // namespace pwcsbf
