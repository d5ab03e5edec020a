#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pwcsbf/cli_io.hpp"

namespace {

using namespace pwcsbf;

Engine engine_from_flag(const std::string& s) {
    if (s == "dual") return Engine::dual;
    if (s == "cegis") return Engine::cegis;
    return Engine::gd;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("cannot write " + path);
}

// Partition implied by the config: from epsilon when given, otherwise from
// the referenced probabilities file.
Partition partition_of(const ProblemSpec& spec) {
    if (!spec.epsilon.empty()) {
        Partition p = generate_partition(spec.state_space, spec.epsilon);
        return mark_regions(p, spec.initial_region, spec.unsafe_regions);
    }
    return rebuild_partition(load_bounds(spec.probabilities_path).partition);
}

LinearDynamics linear_of(const ProblemSpec& spec) {
    if (spec.system_flag != SystemKind::linear)
        throw SchemaViolation(spec.name +
                              ": trajectory simulation needs the true dynamics; a "
                              "pwa_inclusion system admits infinitely many realizations");
    return make_linear_dynamics(spec.A, spec.b, make_gaussian_noise(spec.sigma));
}

int do_partition(const ProblemSpec& spec, const std::string& out) {
    const Partition part = partition_of(spec);
    std::size_t unsafe = 0;
    for (bool f : part.unsafe_cell_flags) unsafe += f;
    std::printf("system:          %s\n", spec.name.c_str());
    std::printf("cells:           %zu (", part.num_cells());
    for (std::size_t d = 0; d < part.cells_per_dim.size(); ++d)
        std::printf("%s%zu", d ? " x " : "", part.cells_per_dim[d]);
    std::printf(")\n");
    std::printf("initial cells:   %zu\n", part.initial_cell_indices.size());
    std::printf("unsafe cells:    %zu\n", unsafe);
    std::printf("epsilon rounded: %s\n", part.epsilon_rounded ? "yes" : "no");
    if (!out.empty()) {
        nlohmann::ordered_json j;
        j["system"] = spec.name;
        j["num_cells"] = part.num_cells();
        j["cells_per_dim"] = part.cells_per_dim;
        nlohmann::ordered_json space;
        space["low"] = part.space.low;
        space["high"] = part.space.high;
        j["space"] = space;
        j["initial_cells"] = part.initial_cell_indices;
        nlohmann::ordered_json unsafe_cells = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < part.unsafe_cell_flags.size(); ++i)
            if (part.unsafe_cell_flags[i]) unsafe_cells.push_back(i);
        j["unsafe_cells"] = unsafe_cells;
        j["epsilon_rounded"] = part.epsilon_rounded;
        write_text_file(out, j.dump(2) + "\n");
        std::printf("wrote %s\n", out.c_str());
    }
    return 0;
}

int do_bounds(const ProblemSpec& spec, const std::string& out, std::size_t threads) {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(static_cast<int>(threads));
#else
    (void)threads;
#endif
    if (spec.epsilon.empty())
        throw SchemaViolation(spec.name + ": computing bounds needs epsilon in the config");
    const Partition part = partition_of(spec);
    TransitionBounds bounds;
    if (spec.system_flag == SystemKind::linear) {
        bounds = compute_transition_bounds(lift_linear_to_inclusion(linear_of(spec), part),
                                           part);
    } else {
        const PwaInclusionDynamics dyn = load_pwa_dynamics(spec.dynamics_path);
        if (dyn.noise.sigma != spec.sigma)
            throw SchemaViolation("dynamics file '" + spec.dynamics_path +
                                  "': sigma differs from the config");
        bounds = compute_transition_bounds(dyn, part);
    }
    save_bounds(bounds, out);
    std::printf("wrote %zu x %zu transition bounds to %s\n", bounds.n_regions, bounds.cols(),
                out.c_str());
    return 0;
}

int do_synthesize(const ProblemSpec& spec, const std::string& out, std::size_t threads) {
    const RunReport report = run(spec, threads);
    std::fputs(report_to_text(report).c_str(), stdout);
    if (!out.empty()) {
        write_text_file(out, report_to_json(report));
        std::printf("wrote %s\n", out.c_str());
    }
    return 0;
}

int do_check(const ProblemSpec& spec, std::size_t samples, std::uint64_t seed,
             std::size_t threads) {
    const LinearDynamics lin = linear_of(spec);
    const RunReport report = run(spec, threads);
    const Partition part = rebuild_partition(report.partition);
    const ValidationReport val =
        validate_monte_carlo(lin, part, spec.initial_region, report.certificate.horizon,
                             samples, seed, report.certificate.p_safe);
    std::printf("certified P_s >= %.9g\n", val.certified);
    std::printf("empirical safety: %.9g (%zu of %zu trajectories unsafe)\n",
                val.empirical_safety, val.violations, val.samples);
    std::printf("wilson 99%% lower bound: %.9g\n", val.confidence_lower);
    std::printf("verdict: %s\n", val.consistent ? "CONSISTENT" : "INCONSISTENT");
    return val.consistent ? 0 : 4;
}

int do_simulate(const ProblemSpec& spec, std::size_t samples, std::uint64_t seed,
                std::size_t horizon, std::size_t threads) {
    const LinearDynamics lin = linear_of(spec);
    const Partition part = partition_of(spec);
    const ValidationReport val = validate_monte_carlo(lin, part, spec.initial_region,
                                                      horizon, samples, seed, 0.0);
    (void)threads;
    std::printf("horizon: %zu, samples: %zu, seed: %llu\n", horizon, val.samples,
                static_cast<unsigned long long>(seed));
    std::printf("unsafe trajectories: %zu\n", val.violations);
    std::printf("empirical safety: %.9g\n", val.empirical_safety);
    std::printf("wilson 99%% lower bound: %.9g\n", val.confidence_lower);
    return 0;
}

int do_bench(const std::vector<std::string>& configs, const std::vector<std::string>& engines,
             const std::string& out, std::size_t threads) {
    std::vector<ProblemSpec> specs;
    specs.reserve(configs.size());
    for (const std::string& path : configs) specs.push_back(load_config(path));
    std::vector<Engine> selected;
    selected.reserve(engines.size());
    for (const std::string& e : engines) selected.push_back(engine_from_flag(e));
    const std::vector<BenchmarkRow> rows = run_benchmarks(specs, selected, threads);
    std::fputs(benchmarks_to_table(rows).c_str(), stdout);
    if (!out.empty()) {
        write_text_file(out, benchmarks_to_csv(rows));
        std::printf("wrote %s\n", out.c_str());
    }
    for (const BenchmarkRow& row : rows)
        if (!row.ok()) return 3;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Piecewise-constant stochastic barrier function synthesis"};
    app.require_subcommand(1);

    std::string config, engine, out;
    std::vector<std::string> configs, engines;
    long long horizon = 0;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    std::size_t samples = 100000;

    auto add_common = [&](CLI::App* sub, bool needs_config = true) {
        if (needs_config)
            sub->add_option("--config", config, "problem config (YAML or JSON)")
                ->required()
                ->check(CLI::ExistingFile);
        sub->add_option("--threads", threads, "bound internal parallelism (0 = default)");
    };

    CLI::App* sub_partition = app.add_subcommand("partition", "inspect the cell partition");
    add_common(sub_partition);
    sub_partition->add_option("--out", out, "write a JSON partition summary");

    CLI::App* sub_bounds =
        app.add_subcommand("bounds", "compute and store transition probability bounds");
    add_common(sub_bounds);
    sub_bounds->add_option("--out", out, "bounds file to write")->required();

    CLI::App* sub_synth =
        app.add_subcommand("synthesize", "synthesize a certified barrier");
    add_common(sub_synth);
    sub_synth->add_option("--engine", engine, "override the config engine")
        ->check(CLI::IsMember({"dual", "cegis", "gd"}));
    sub_synth->add_option("--horizon", horizon, "override the time horizon")
        ->check(CLI::PositiveNumber);
    CLI::Option* synth_seed =
        sub_synth->add_option("--seed", seed, "override the gd seed");
    sub_synth->add_option("--out", out, "write the JSON run report");

    CLI::App* sub_check = app.add_subcommand(
        "check", "synthesize, then cross-check the certificate by simulation");
    add_common(sub_check);
    sub_check->add_option("--engine", engine, "override the config engine")
        ->check(CLI::IsMember({"dual", "cegis", "gd"}));
    sub_check->add_option("--horizon", horizon, "override the time horizon")
        ->check(CLI::PositiveNumber);
    sub_check->add_option("--seed", seed, "simulation seed");
    sub_check->add_option("--samples", samples, "number of trajectories");

    CLI::App* sub_sim = app.add_subcommand("simulate", "estimate safety by simulation only");
    add_common(sub_sim);
    sub_sim->add_option("--horizon", horizon, "time horizon (defaults to the config)")
        ->check(CLI::PositiveNumber);
    sub_sim->add_option("--seed", seed, "simulation seed");
    sub_sim->add_option("--samples", samples, "number of trajectories");

    CLI::App* sub_bench = app.add_subcommand("bench", "run a benchmark sweep");
    sub_bench
        ->add_option("--config", configs, "problem config (repeat for a sweep)")
        ->required()
        ->check(CLI::ExistingFile);
    sub_bench
        ->add_option("--engine", engines,
                     "engine to benchmark (repeatable; default all three)")
        ->check(CLI::IsMember({"dual", "cegis", "gd"}));
    sub_bench->add_option("--threads", threads, "bound internal parallelism (0 = default)");
    sub_bench->add_option("--out", out, "write the CSV series");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sub_bench->parsed()) return do_bench(configs, engines, out, threads);

        ProblemSpec spec = load_config(config);
        if (!engine.empty()) spec.engine = engine_from_flag(engine);
        if (horizon > 0) spec.time_horizon = static_cast<std::size_t>(horizon);
        if (synth_seed->count() > 0) spec.gd.seed = seed;

        if (sub_partition->parsed()) return do_partition(spec, out);
        if (sub_bounds->parsed()) return do_bounds(spec, out, threads);
        if (sub_synth->parsed()) return do_synthesize(spec, out, threads);
        if (sub_check->parsed()) return do_check(spec, samples, seed, threads);
        if (sub_sim->parsed())
            return do_simulate(spec, samples, seed,
                               horizon > 0 ? static_cast<std::size_t>(horizon)
                                           : spec.time_horizon,
                               threads);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
