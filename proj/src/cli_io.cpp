#include "pwcsbf/cli_io.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>
#include <utility>

#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pwcsbf {
namespace {

using nlohmann::ordered_json;

constexpr const char* kBoundsFormat = "pwcsbf-bounds";
constexpr const char* kPwaFormat = "pwcsbf-pwa";
constexpr const char* kReportFormat = "pwcsbf-report";
constexpr int kFormatVersion = 1;
constexpr double kRowSumTol = 1e-9;  // matches the producer's row validation

// ---------------------------------------------------------------------------
// Plumbing
// ---------------------------------------------------------------------------

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileNotFound("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error("cannot write " + path);
}

// Shortest decimal that parses back to the same double.
std::string fmt_double(double v) {
    std::array<char, 64> buf;
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    (void)ec;
    return std::string(buf.data(), p);
}

// Hexadecimal float: bit-exact through text.
std::string hex_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

double parse_double_text(const std::string& s, const std::string& where) {
    const char* c = s.c_str();
    char* end = nullptr;
    double v = std::strtod(c, &end);
    if (end == c || *end != '\0')
        throw SchemaViolation(where + ": malformed number '" + s + "'");
    return v;
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t parse_hex64(const std::string& s, const std::string& where) {
    if (s.size() != 16 || s.find_first_not_of("0123456789abcdef") != std::string::npos)
        throw SchemaViolation(where + ": expected 16 lowercase hex digits, got '" + s + "'");
    return std::strtoull(s.c_str(), nullptr, 16);
}

const char* engine_config_name(Engine engine) {
    switch (engine) {
        case Engine::dual: return "DUAL_ALG";
        case Engine::cegis: return "CEGIS_ALG";
        case Engine::gd: return "GD_ALG";
    }
    return "DUAL_ALG";
}

std::string quote_yaml(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '\\' || c == '"') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

std::size_t cell_count(const std::vector<std::size_t>& cells_per_dim) {
    std::size_t n = 1;
    for (std::size_t c : cells_per_dim) n *= c;
    return n;
}

// ---------------------------------------------------------------------------
// YAML access with strict schema checking
// ---------------------------------------------------------------------------

void check_keys(const YAML::Node& map, const std::string& ctx,
                std::initializer_list<std::string_view> allowed) {
    if (!map.IsMap()) throw SchemaViolation(ctx + ": expected a map");
    for (const auto& kv : map) {
        const std::string key = kv.first.Scalar();
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw SchemaViolation(ctx + ": unknown key '" + key + "'");
    }
}

YAML::Node require_key(const YAML::Node& map, const std::string& ctx, const char* key) {
    YAML::Node n = map[key];
    if (!n) throw SchemaViolation(ctx + ": missing required key '" + key + "'");
    return n;
}

double to_double(const YAML::Node& n, const std::string& ctx) {
    if (!n.IsScalar()) throw SchemaViolation(ctx + ": expected a number");
    try {
        double v = n.as<double>();
        if (!std::isfinite(v)) throw SchemaViolation(ctx + ": must be finite");
        return v;
    } catch (const YAML::Exception&) {
        throw SchemaViolation(ctx + ": expected a number, got '" + n.Scalar() + "'");
    }
}

long long to_int(const YAML::Node& n, const std::string& ctx) {
    if (!n.IsScalar()) throw SchemaViolation(ctx + ": expected an integer");
    try {
        return n.as<long long>();
    } catch (const YAML::Exception&) {
        throw SchemaViolation(ctx + ": expected an integer, got '" + n.Scalar() + "'");
    }
}

std::uint64_t to_uint64(const YAML::Node& n, const std::string& ctx) {
    if (!n.IsScalar()) throw SchemaViolation(ctx + ": expected a nonnegative integer");
    try {
        return n.as<unsigned long long>();
    } catch (const YAML::Exception&) {
        throw SchemaViolation(ctx + ": expected a nonnegative integer, got '" + n.Scalar() + "'");
    }
}

bool to_bool(const YAML::Node& n, const std::string& ctx) {
    if (!n.IsScalar()) throw SchemaViolation(ctx + ": expected true or false");
    try {
        return n.as<bool>();
    } catch (const YAML::Exception&) {
        throw SchemaViolation(ctx + ": expected true or false, got '" + n.Scalar() + "'");
    }
}

std::string to_str(const YAML::Node& n, const std::string& ctx) {
    if (!n.IsScalar()) throw SchemaViolation(ctx + ": expected a string");
    return n.Scalar();
}

Vector to_vector(const YAML::Node& n, const std::string& ctx) {
    if (!n.IsSequence()) throw SchemaViolation(ctx + ": expected a list of numbers");
    Vector v;
    v.reserve(n.size());
    for (std::size_t i = 0; i < n.size(); ++i)
        v.push_back(to_double(n[i], ctx + "[" + std::to_string(i) + "]"));
    return v;
}

Matrix to_matrix(const YAML::Node& n, const std::string& ctx) {
    if (!n.IsSequence()) throw SchemaViolation(ctx + ": expected a list of rows");
    Matrix m;
    m.reserve(n.size());
    for (std::size_t i = 0; i < n.size(); ++i)
        m.push_back(to_vector(n[i], ctx + "[" + std::to_string(i) + "]"));
    return m;
}

// Accepts {low, high} or {c, r}; a scalar or length-1 r broadcasts per axis.
Hyperrectangle to_box(const YAML::Node& n, const std::string& ctx, std::size_t dim) {
    if (!n.IsMap()) throw SchemaViolation(ctx + ": expected a map with keys low/high or c/r");
    const bool has_lh = static_cast<bool>(n["low"]) || static_cast<bool>(n["high"]);
    const bool has_cr = static_cast<bool>(n["c"]) || static_cast<bool>(n["r"]);
    if (has_lh == has_cr)
        throw SchemaViolation(ctx + ": give either low/high or c/r, not both or neither");
    Vector low, high;
    if (has_lh) {
        check_keys(n, ctx, {"low", "high"});
        low = to_vector(require_key(n, ctx, "low"), ctx + ".low");
        high = to_vector(require_key(n, ctx, "high"), ctx + ".high");
    } else {
        check_keys(n, ctx, {"c", "r"});
        Vector c = to_vector(require_key(n, ctx, "c"), ctx + ".c");
        YAML::Node rn = require_key(n, ctx, "r");
        Vector r;
        if (rn.IsScalar())
            r.assign(c.size(), to_double(rn, ctx + ".r"));
        else
            r = to_vector(rn, ctx + ".r");
        if (r.size() == 1 && c.size() > 1) r.assign(c.size(), r[0]);
        if (r.size() != c.size())
            throw SchemaViolation(ctx + ".r: expected 1 or " + std::to_string(c.size()) +
                                  " radii, got " + std::to_string(r.size()));
        for (double rd : r)
            if (rd < 0.0) throw SchemaViolation(ctx + ".r: radii must be nonnegative");
        low.resize(c.size());
        high.resize(c.size());
        for (std::size_t d = 0; d < c.size(); ++d) {
            low[d] = c[d] - r[d];
            high[d] = c[d] + r[d];
        }
    }
    if (dim != 0 && low.size() != dim)
        throw SchemaViolation(ctx + ": expected dimension " + std::to_string(dim) + ", got " +
                              std::to_string(low.size()));
    try {
        return make_hyperrectangle(low, high);
    } catch (const Error& e) {
        throw SchemaViolation(ctx + ": " + e.what());
    }
}

SystemKind parse_system_kind(const std::string& s, const std::string& ctx) {
    if (s == "linear") return SystemKind::linear;
    if (s == "pwa_inclusion") return SystemKind::pwa_inclusion;
    throw SchemaViolation(ctx + ": unknown system_flag '" + s +
                          "' (expected linear or pwa_inclusion)");
}

Engine parse_engine(const std::string& s, const std::string& ctx) {
    if (s == "DUAL_ALG" || s == "dual") return Engine::dual;
    if (s == "CEGIS_ALG" || s == "cegis") return Engine::cegis;
    if (s == "GD_ALG" || s == "gd") return Engine::gd;
    throw SchemaViolation(ctx + ": unknown optimization_type '" + s +
                          "' (expected DUAL_ALG, CEGIS_ALG or GD_ALG)");
}

void parse_gd_settings(const YAML::Node& n, const std::string& ctx, GdSettings& gd) {
    check_keys(n, ctx, {"num_iterations", "initial_lr", "decay", "momentum", "seed"});
    if (n["num_iterations"]) {
        long long k = to_int(n["num_iterations"], ctx + ".num_iterations");
        if (k < 1) throw SchemaViolation(ctx + ".num_iterations: must be >= 1");
        gd.num_iterations = static_cast<std::size_t>(k);
    }
    if (n["initial_lr"]) {
        gd.initial_lr = to_double(n["initial_lr"], ctx + ".initial_lr");
        if (gd.initial_lr <= 0.0) throw SchemaViolation(ctx + ".initial_lr: must be positive");
    }
    if (n["decay"]) {
        gd.decay = to_double(n["decay"], ctx + ".decay");
        if (gd.decay <= 0.0 || gd.decay > 1.0)
            throw SchemaViolation(ctx + ".decay: must lie in (0, 1]");
    }
    if (n["momentum"]) {
        gd.momentum = to_double(n["momentum"], ctx + ".momentum");
        if (gd.momentum < 0.0 || gd.momentum >= 1.0)
            throw SchemaViolation(ctx + ".momentum: must lie in [0, 1)");
    }
    if (n["seed"]) gd.seed = to_uint64(n["seed"], ctx + ".seed");
}

void parse_cegis_settings(const YAML::Node& n, const std::string& ctx, CegisSettings& cegis) {
    check_keys(n, ctx, {"num_iterations", "adaptive", "tolerance"});
    if (n["num_iterations"]) {
        long long k = to_int(n["num_iterations"], ctx + ".num_iterations");
        if (k < 1) throw SchemaViolation(ctx + ".num_iterations: must be >= 1");
        cegis.num_iterations = static_cast<std::size_t>(k);
    }
    if (n["adaptive"]) cegis.adaptive = to_bool(n["adaptive"], ctx + ".adaptive");
    if (n["tolerance"]) {
        cegis.tolerance = to_double(n["tolerance"], ctx + ".tolerance");
        if (cegis.tolerance < 0.0) throw SchemaViolation(ctx + ".tolerance: must be >= 0");
    }
}

// Inline engine-setting keys are sugar for the selected engine's nested map;
// they are rejected when they do not apply to optimization_type or when the
// nested map is also given.
void parse_barrier_settings(const YAML::Node& n, const std::string& ctx, ProblemSpec& spec) {
    check_keys(n, ctx,
               {"barrier_type", "optimization_type", "time_horizon", "num_iterations",
                "initial_lr", "decay", "momentum", "seed", "adaptive", "tolerance", "gd",
                "cegis"});
    const std::string barrier_type =
        to_str(require_key(n, ctx, "barrier_type"), ctx + ".barrier_type");
    if (barrier_type != "PWC")
        throw SchemaViolation(ctx + ".barrier_type: only 'PWC' is supported, got '" +
                              barrier_type + "'");
    spec.engine = parse_engine(
        to_str(require_key(n, ctx, "optimization_type"), ctx + ".optimization_type"),
        ctx + ".optimization_type");
    if (n["time_horizon"]) {
        long long h = to_int(n["time_horizon"], ctx + ".time_horizon");
        if (h < 1) throw SchemaViolation(ctx + ".time_horizon: must be >= 1");
        spec.time_horizon = static_cast<std::size_t>(h);
    }
    if (n["gd"]) parse_gd_settings(n["gd"], ctx + ".gd", spec.gd);
    if (n["cegis"]) parse_cegis_settings(n["cegis"], ctx + ".cegis", spec.cegis);

    YAML::Node inline_gd, inline_cegis;
    for (const char* key : {"initial_lr", "decay", "momentum", "seed"})
        if (n[key]) {
            if (spec.engine != Engine::gd)
                throw SchemaViolation(ctx + "." + key + ": only applies to GD_ALG");
            inline_gd[key] = n[key];
        }
    for (const char* key : {"adaptive", "tolerance"})
        if (n[key]) {
            if (spec.engine != Engine::cegis)
                throw SchemaViolation(ctx + "." + key + ": only applies to CEGIS_ALG");
            inline_cegis[key] = n[key];
        }
    if (n["num_iterations"]) {
        if (spec.engine == Engine::gd)
            inline_gd["num_iterations"] = n["num_iterations"];
        else if (spec.engine == Engine::cegis)
            inline_cegis["num_iterations"] = n["num_iterations"];
        else
            throw SchemaViolation(ctx + ".num_iterations: does not apply to DUAL_ALG");
    }
    if (inline_gd.size() > 0) {
        if (n["gd"])
            throw SchemaViolation(ctx + ": give gd settings inline or in the gd map, not both");
        parse_gd_settings(inline_gd, ctx, spec.gd);
    }
    if (inline_cegis.size() > 0) {
        if (n["cegis"])
            throw SchemaViolation(ctx +
                                  ": give cegis settings inline or in the cegis map, not both");
        parse_cegis_settings(inline_cegis, ctx, spec.cegis);
    }
}

std::string resolve_path(const std::string& base_dir, const std::string& p,
                         const std::string& ctx) {
    if (p.empty()) throw SchemaViolation(ctx + ": path must not be empty");
    std::filesystem::path fp(p);
    if (fp.is_absolute()) return fp.lexically_normal().string();
    std::filesystem::path abs =
        std::filesystem::absolute(std::filesystem::path(base_dir) / fp);
    return abs.lexically_normal().string();
}

ProblemSpec parse_config(const YAML::Node& root, const std::string& file,
                         const std::string& base_dir) {
    if (!root.IsMap()) throw SchemaViolation(file + ": top level must be a map");
    check_keys(root, file,
               {"name", "system_flag", "dim", "A", "b", "dynamics", "sigma", "state_space",
                "initial_region", "unsafe_regions", "epsilon", "probabilities",
                "barrier_settings"});
    ProblemSpec spec;
    if (root["name"])
        spec.name = to_str(root["name"], file + ": name");
    else
        spec.name = std::filesystem::path(file).stem().string();
    spec.system_flag = parse_system_kind(
        to_str(require_key(root, file, "system_flag"), file + ": system_flag"),
        file + ": system_flag");
    spec.state_space = to_box(require_key(root, file, "state_space"), file + ": state_space", 0);
    const std::size_t dim = spec.state_space.dimension();
    if (root["dim"]) {
        long long d = to_int(root["dim"], file + ": dim");
        if (d < 1 || static_cast<std::size_t>(d) != dim)
            throw SchemaViolation(file + ": dim: " + std::to_string(d) +
                                  " does not match the state_space dimension " +
                                  std::to_string(dim));
    }
    spec.sigma = to_vector(require_key(root, file, "sigma"), file + ": sigma");
    try {
        make_gaussian_noise(spec.sigma);
    } catch (const Error& e) {
        throw SchemaViolation(file + ": sigma: " + e.what());
    }
    if (spec.sigma.size() != dim)
        throw SchemaViolation(file + ": sigma: expected " + std::to_string(dim) +
                              " entries, got " + std::to_string(spec.sigma.size()));
    spec.initial_region =
        to_box(require_key(root, file, "initial_region"), file + ": initial_region", dim);
    if (root["unsafe_regions"]) {
        YAML::Node u = root["unsafe_regions"];
        if (!u.IsSequence())
            throw SchemaViolation(file + ": unsafe_regions: expected a list of boxes");
        for (std::size_t i = 0; i < u.size(); ++i)
            spec.unsafe_regions.push_back(
                to_box(u[i], file + ": unsafe_regions[" + std::to_string(i) + "]", dim));
    }
    if (spec.system_flag == SystemKind::linear) {
        if (root["dynamics"])
            throw SchemaViolation(file + ": dynamics: only applies to pwa_inclusion systems");
        spec.A = to_matrix(require_key(root, file, "A"), file + ": A");
        spec.b = to_vector(require_key(root, file, "b"), file + ": b");
        try {
            make_linear_dynamics(spec.A, spec.b, make_gaussian_noise(spec.sigma));
        } catch (const Error& e) {
            throw SchemaViolation(file + ": A/b: " + e.what());
        }
        if (spec.b.size() != dim)
            throw SchemaViolation(file + ": b: expected " + std::to_string(dim) +
                                  " entries, got " + std::to_string(spec.b.size()));
    } else {
        if (root["A"] || root["b"])
            throw SchemaViolation(file + ": A/b: only apply to linear systems");
        spec.dynamics_path = resolve_path(
            base_dir, to_str(require_key(root, file, "dynamics"), file + ": dynamics"),
            file + ": dynamics");
    }
    if (root["probabilities"])
        spec.probabilities_path =
            resolve_path(base_dir, to_str(root["probabilities"], file + ": probabilities"),
                         file + ": probabilities");
    if (root["epsilon"]) {
        YAML::Node e = root["epsilon"];
        if (e.IsScalar())
            spec.epsilon.assign(dim, to_double(e, file + ": epsilon"));
        else
            spec.epsilon = to_vector(e, file + ": epsilon");
        if (spec.epsilon.size() != dim)
            throw SchemaViolation(file + ": epsilon: expected " + std::to_string(dim) +
                                  " entries, got " + std::to_string(spec.epsilon.size()));
        for (double eps : spec.epsilon)
            if (eps <= 0.0) throw SchemaViolation(file + ": epsilon: must be positive");
    }
    if (spec.probabilities_path.empty() && spec.epsilon.empty())
        throw SchemaViolation(file + ": epsilon is required when probabilities is not given");
    parse_barrier_settings(require_key(root, file, "barrier_settings"),
                           file + ": barrier_settings", spec);
    return spec;
}

// ---------------------------------------------------------------------------
// JSON access helpers (bounds and PWA files)
// ---------------------------------------------------------------------------

ordered_json parse_json(const std::string& text, const std::string& where) {
    try {
        return ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        throw ParseError(where + ": " + e.what());
    }
}

void check_json_keys(const ordered_json& j, const std::string& ctx,
                     std::initializer_list<std::string_view> required,
                     std::initializer_list<std::string_view> optional = {}) {
    if (!j.is_object()) throw SchemaViolation(ctx + ": expected an object");
    for (const auto& kv : j.items()) {
        const std::string& key = kv.key();
        if (std::find(required.begin(), required.end(), key) == required.end() &&
            std::find(optional.begin(), optional.end(), key) == optional.end())
            throw SchemaViolation(ctx + ": unknown key '" + key + "'");
    }
    for (std::string_view key : required)
        if (!j.contains(key))
            throw SchemaViolation(ctx + ": missing required key '" + std::string(key) + "'");
}

double json_double(const ordered_json& j, const std::string& ctx) {
    if (j.is_string()) return parse_double_text(j.get<std::string>(), ctx);
    if (j.is_number()) return j.get<double>();
    throw SchemaViolation(ctx + ": expected a number or a hex-float string");
}

Vector json_doubles(const ordered_json& j, const std::string& ctx) {
    if (!j.is_array()) throw SchemaViolation(ctx + ": expected an array");
    Vector v;
    v.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        v.push_back(json_double(j[i], ctx + "[" + std::to_string(i) + "]"));
    return v;
}

std::vector<std::size_t> json_indices(const ordered_json& j, const std::string& ctx,
                                      std::size_t limit) {
    if (!j.is_array()) throw SchemaViolation(ctx + ": expected an array of cell indices");
    std::vector<std::size_t> v;
    v.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string at = ctx + "[" + std::to_string(i) + "]";
        if (!j[i].is_number_unsigned()) throw SchemaViolation(at + ": expected a cell index");
        std::size_t idx = j[i].get<std::size_t>();
        if (idx >= limit)
            throw SchemaViolation(at + ": cell index " + std::to_string(idx) +
                                  " out of range (num cells " + std::to_string(limit) + ")");
        v.push_back(idx);
    }
    return v;
}

ordered_json hex_array(const std::vector<double>& v) {
    ordered_json a = ordered_json::array();
    for (double x : v) a.push_back(hex_double(x));
    return a;
}

ordered_json box_to_json(const Hyperrectangle& box) {
    ordered_json j;
    j["low"] = hex_array(box.low);
    j["high"] = hex_array(box.high);
    return j;
}

Hyperrectangle box_from_json(const ordered_json& j, const std::string& ctx) {
    check_json_keys(j, ctx, {"low", "high"});
    try {
        return make_hyperrectangle(json_doubles(j["low"], ctx + ".low"),
                                   json_doubles(j["high"], ctx + ".high"));
    } catch (const SchemaViolation&) {
        throw;
    } catch (const Error& e) {
        throw SchemaViolation(ctx + ": " + e.what());
    }
}

void check_format(const ordered_json& j, const std::string& path, const char* expected) {
    const std::string format = j["format"].is_string() ? j["format"].get<std::string>() : "";
    if (format != expected)
        throw SchemaViolation(path + ": format is '" + format + "', expected '" + expected +
                              "'");
    if (!j["version"].is_number_integer() || j["version"].get<long long>() != kFormatVersion)
        throw VersionMismatch(path + ": format version " + j["version"].dump() +
                              ", this build reads version " + std::to_string(kFormatVersion));
}

void check_row_feasibility(const TransitionBounds& tb, const std::string& path) {
    for (std::size_t i = 0; i < tb.n_regions; ++i) {
        double sum_lower = 0.0, sum_upper = 0.0;
        for (std::size_t j = 0; j < tb.cols(); ++j) {
            const double l = tb.lower_at(i, j);
            const double u = tb.upper_at(i, j);
            if (!std::isfinite(l) || !std::isfinite(u) || l < 0.0 || u > 1.0 || l > u)
                throw InfeasibleRow(i, path + ": row " + std::to_string(i) + ", column " +
                                           std::to_string(j) +
                                           ": entries must satisfy 0 <= lower <= upper <= 1");
            sum_lower += l;
            sum_upper += u;
        }
        if (sum_lower > 1.0 + kRowSumTol)
            throw InfeasibleRow(i, path + ": row " + std::to_string(i) +
                                       ": lower bounds sum to " + fmt_double(sum_lower) +
                                       " > 1");
        if (sum_upper < 1.0 - kRowSumTol)
            throw InfeasibleRow(i, path + ": row " + std::to_string(i) +
                                       ": upper bounds sum to " + fmt_double(sum_upper) +
                                       " < 1");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

const char* system_kind_name(SystemKind kind) {
    return kind == SystemKind::linear ? "linear" : "pwa_inclusion";
}

ProblemSpec load_config(const std::string& path) {
    const std::string text = read_file(path);
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ParseError(path + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    } catch (const YAML::Exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    const std::string base_dir = std::filesystem::path(path).parent_path().string();
    try {
        return parse_config(root, path, base_dir.empty() ? "." : base_dir);
    } catch (const YAML::Exception& e) {
        throw SchemaViolation(path + ": " + e.what());
    }
}

void save_config(const ProblemSpec& spec, const std::string& path) {
    auto vec = [](const Vector& v) {
        std::string s = "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += ", ";
            s += fmt_double(v[i]);
        }
        return s + "]";
    };
    std::ostringstream out;
    out << "name: " << quote_yaml(spec.name) << "\n";
    out << "system_flag: " << quote_yaml(system_kind_name(spec.system_flag)) << "\n";
    if (spec.system_flag == SystemKind::linear) {
        out << "A: [";
        for (std::size_t i = 0; i < spec.A.size(); ++i) {
            if (i) out << ", ";
            out << vec(spec.A[i]);
        }
        out << "]\n";
        out << "b: " << vec(spec.b) << "\n";
    } else {
        out << "dynamics: " << quote_yaml(spec.dynamics_path) << "\n";
    }
    out << "sigma: " << vec(spec.sigma) << "\n";
    out << "state_space:\n";
    out << "  low: " << vec(spec.state_space.low) << "\n";
    out << "  high: " << vec(spec.state_space.high) << "\n";
    out << "initial_region:\n";
    out << "  low: " << vec(spec.initial_region.low) << "\n";
    out << "  high: " << vec(spec.initial_region.high) << "\n";
    if (spec.unsafe_regions.empty()) {
        out << "unsafe_regions: []\n";
    } else {
        out << "unsafe_regions:\n";
        for (const Hyperrectangle& u : spec.unsafe_regions)
            out << "  - {low: " << vec(u.low) << ", high: " << vec(u.high) << "}\n";
    }
    if (!spec.epsilon.empty()) out << "epsilon: " << vec(spec.epsilon) << "\n";
    if (!spec.probabilities_path.empty())
        out << "probabilities: " << quote_yaml(spec.probabilities_path) << "\n";
    out << "barrier_settings:\n";
    out << "  barrier_type: \"PWC\"\n";
    out << "  optimization_type: " << quote_yaml(engine_config_name(spec.engine)) << "\n";
    out << "  time_horizon: " << spec.time_horizon << "\n";
    out << "  gd: {num_iterations: " << spec.gd.num_iterations
        << ", initial_lr: " << fmt_double(spec.gd.initial_lr)
        << ", decay: " << fmt_double(spec.gd.decay)
        << ", momentum: " << fmt_double(spec.gd.momentum) << ", seed: " << spec.gd.seed
        << "}\n";
    out << "  cegis: {num_iterations: " << spec.cegis.num_iterations
        << ", adaptive: " << (spec.cegis.adaptive ? "true" : "false")
        << ", tolerance: " << fmt_double(spec.cegis.tolerance) << "}\n";
    write_file(path, out.str());
}

// ---------------------------------------------------------------------------
// Transition bounds persistence
// ---------------------------------------------------------------------------

void save_bounds(const TransitionBounds& bounds, const std::string& path) {
    ordered_json payload;
    payload["n_regions"] = bounds.n_regions;
    payload["sigma"] = hex_array(bounds.sigma);
    payload["dynamics_descriptor"] = bounds.dynamics_descriptor;
    payload["partition_hash"] = hex64(bounds.partition_hash);
    ordered_json part;
    part["space"] = box_to_json(bounds.partition.space);
    part["cells_per_dim"] = bounds.partition.cells_per_dim;
    part["initial_cells"] = bounds.partition.initial_cell_indices;
    ordered_json unsafe = ordered_json::array();
    for (std::size_t i = 0; i < bounds.partition.unsafe_cell_flags.size(); ++i)
        if (bounds.partition.unsafe_cell_flags[i]) unsafe.push_back(i);
    part["unsafe_cells"] = unsafe;
    part["epsilon_rounded"] = bounds.partition.epsilon_rounded;
    payload["partition"] = part;
    payload["lower"] = hex_array(bounds.lower);
    payload["upper"] = hex_array(bounds.upper);
    const std::string body = payload.dump();
    ordered_json header;
    header["format"] = kBoundsFormat;
    header["version"] = kFormatVersion;
    header["payload_bytes"] = body.size();
    header["payload_fnv1a64"] = hex64(fnv1a64(body));
    write_file(path, header.dump() + "\n" + body);
}

TransitionBounds load_bounds(const std::string& path) {
    const std::string text = read_file(path);
    const std::size_t nl = text.find('\n');
    if (nl == std::string::npos) throw ParseError(path + ": missing header line");
    const ordered_json header = parse_json(text.substr(0, nl), path + ": header");
    check_json_keys(header, path + ": header",
                    {"format", "version", "payload_bytes", "payload_fnv1a64"});
    check_format(header, path, kBoundsFormat);
    const std::string body = text.substr(nl + 1);
    if (!header["payload_bytes"].is_number_unsigned() ||
        header["payload_bytes"].get<std::size_t>() != body.size())
        throw ChecksumMismatch(path + ": payload is " + std::to_string(body.size()) +
                               " bytes, header says " + header["payload_bytes"].dump() +
                               " (truncated or modified file)");
    if (!header["payload_fnv1a64"].is_string() ||
        header["payload_fnv1a64"].get<std::string>() != hex64(fnv1a64(body)))
        throw ChecksumMismatch(path + ": payload checksum mismatch");

    const ordered_json payload = parse_json(body, path);
    check_json_keys(payload, path,
                    {"n_regions", "sigma", "dynamics_descriptor", "partition_hash",
                     "partition", "lower", "upper"});
    const ordered_json& part = payload["partition"];
    check_json_keys(part, path + ": partition",
                    {"space", "cells_per_dim", "initial_cells", "unsafe_cells",
                     "epsilon_rounded"});

    PartitionDescriptor desc;
    desc.space = box_from_json(part["space"], path + ": partition.space");
    if (!part["cells_per_dim"].is_array())
        throw SchemaViolation(path + ": partition.cells_per_dim: expected an array");
    for (const auto& c : part["cells_per_dim"]) {
        if (!c.is_number_unsigned() || c.get<std::size_t>() == 0)
            throw SchemaViolation(path + ": partition.cells_per_dim: expected positive counts");
        desc.cells_per_dim.push_back(c.get<std::size_t>());
    }
    if (desc.cells_per_dim.size() != desc.space.dimension())
        throw SchemaViolation(path + ": partition.cells_per_dim: expected " +
                              std::to_string(desc.space.dimension()) + " entries");
    const std::size_t num_cells = cell_count(desc.cells_per_dim);
    desc.initial_cell_indices =
        json_indices(part["initial_cells"], path + ": partition.initial_cells", num_cells);
    for (std::size_t i = 1; i < desc.initial_cell_indices.size(); ++i)
        if (desc.initial_cell_indices[i - 1] >= desc.initial_cell_indices[i])
            throw SchemaViolation(path +
                                  ": partition.initial_cells: must be strictly increasing");
    desc.unsafe_cell_flags.assign(num_cells, false);
    for (std::size_t idx :
         json_indices(part["unsafe_cells"], path + ": partition.unsafe_cells", num_cells))
        desc.unsafe_cell_flags[idx] = true;
    if (!part["epsilon_rounded"].is_boolean())
        throw SchemaViolation(path + ": partition.epsilon_rounded: expected true or false");
    desc.epsilon_rounded = part["epsilon_rounded"].get<bool>();

    TransitionBounds tb;
    if (!payload["n_regions"].is_number_unsigned() ||
        payload["n_regions"].get<std::size_t>() != num_cells)
        throw SchemaViolation(path + ": n_regions must equal the partition cell count " +
                              std::to_string(num_cells));
    tb.n_regions = num_cells;
    tb.sigma = json_doubles(payload["sigma"], path + ": sigma");
    try {
        make_gaussian_noise(tb.sigma);
    } catch (const Error& e) {
        throw SchemaViolation(path + ": sigma: " + e.what());
    }
    if (tb.sigma.size() != desc.space.dimension())
        throw SchemaViolation(path + ": sigma: expected " +
                              std::to_string(desc.space.dimension()) + " entries");
    if (!payload["dynamics_descriptor"].is_string())
        throw SchemaViolation(path + ": dynamics_descriptor: expected a string");
    tb.dynamics_descriptor = payload["dynamics_descriptor"].get<std::string>();
    if (!payload["partition_hash"].is_string())
        throw SchemaViolation(path + ": partition_hash: expected a hex string");
    tb.partition_hash =
        parse_hex64(payload["partition_hash"].get<std::string>(), path + ": partition_hash");
    tb.partition = desc;
    tb.lower = json_doubles(payload["lower"], path + ": lower");
    tb.upper = json_doubles(payload["upper"], path + ": upper");
    const std::size_t expected = tb.n_regions * tb.cols();
    if (tb.lower.size() != expected || tb.upper.size() != expected)
        throw SchemaViolation(path + ": lower/upper must hold n_regions * (n_regions + 1) = " +
                              std::to_string(expected) + " entries");

    Partition rebuilt;
    try {
        rebuilt = rebuild_partition(desc);
    } catch (const Error& e) {
        throw SchemaViolation(path + ": partition: " + e.what());
    }
    if (hash_partition(rebuilt) != tb.partition_hash)
        throw ChecksumMismatch(path + ": partition hash does not match the stored descriptor");
    check_row_feasibility(tb, path);
    return tb;
}

// ---------------------------------------------------------------------------
// PWA inclusion dynamics persistence
// ---------------------------------------------------------------------------

void save_pwa_dynamics(const PwaInclusionDynamics& dynamics, const std::string& path) {
    const std::size_t R = dynamics.num_regions();
    ordered_json j;
    j["format"] = kPwaFormat;
    j["version"] = kFormatVersion;
    j["num_regions"] = R;
    j["dim"] = dynamics.dimension();
    j["sigma"] = hex_array(dynamics.noise.sigma);
    j["descriptor"] = dynamics.descriptor;
    ordered_json regions = ordered_json::array();
    for (const Hyperrectangle& r : dynamics.regions) regions.push_back(box_to_json(r));
    j["regions"] = regions;
    // Axes: region, dir (0 lower / 1 upper), y, x.
    ordered_json A = ordered_json::array();
    ordered_json b = ordered_json::array();
    for (std::size_t q = 0; q < R; ++q) {
        ordered_json a_dirs = ordered_json::array();
        ordered_json b_dirs = ordered_json::array();
        for (const Matrix* m : {&dynamics.A_lower[q], &dynamics.A_upper[q]}) {
            ordered_json rows = ordered_json::array();
            for (const Vector& row : *m) rows.push_back(hex_array(row));
            a_dirs.push_back(rows);
        }
        for (const Vector* v : {&dynamics.b_lower[q], &dynamics.b_upper[q]})
            b_dirs.push_back(hex_array(*v));
        A.push_back(a_dirs);
        b.push_back(b_dirs);
    }
    j["nominal_dynamics_A"] = A;
    j["nominal_dynamics_b"] = b;
    write_file(path, j.dump() + "\n");
}

PwaInclusionDynamics load_pwa_dynamics(const std::string& path) {
    const ordered_json j = parse_json(read_file(path), path);
    check_json_keys(j, path,
                    {"format", "version", "num_regions", "dim", "sigma", "regions",
                     "nominal_dynamics_A", "nominal_dynamics_b"},
                    {"descriptor"});
    check_format(j, path, kPwaFormat);
    if (!j["num_regions"].is_number_unsigned())
        throw SchemaViolation(path + ": num_regions: expected a nonnegative integer");
    const std::size_t R = j["num_regions"].get<std::size_t>();
    if (!j["dim"].is_number_unsigned() || j["dim"].get<std::size_t>() == 0)
        throw SchemaViolation(path + ": dim: expected a positive integer");
    const std::size_t n = j["dim"].get<std::size_t>();

    const Vector sigma = json_doubles(j["sigma"], path + ": sigma");
    GaussianNoise noise;
    try {
        noise = make_gaussian_noise(sigma);
    } catch (const Error& e) {
        throw SchemaViolation(path + ": sigma: " + e.what());
    }
    if (sigma.size() != n)
        throw SchemaViolation(path + ": sigma: expected " + std::to_string(n) + " entries");

    auto expect_array = [&](const ordered_json& a, const std::string& ctx, std::size_t size) {
        if (!a.is_array() || a.size() != size)
            throw SchemaViolation(ctx + ": expected an array of " + std::to_string(size) +
                                  " entries");
    };
    expect_array(j["regions"], path + ": regions", R);
    expect_array(j["nominal_dynamics_A"], path + ": nominal_dynamics_A", R);
    expect_array(j["nominal_dynamics_b"], path + ": nominal_dynamics_b", R);

    std::vector<Hyperrectangle> regions;
    std::vector<Matrix> A_lower, A_upper;
    std::vector<Vector> b_lower, b_upper;
    regions.reserve(R);
    for (std::size_t q = 0; q < R; ++q) {
        const std::string rq = path + ": regions[" + std::to_string(q) + "]";
        regions.push_back(box_from_json(j["regions"][q], rq));
        if (regions.back().dimension() != n)
            throw SchemaViolation(rq + ": expected dimension " + std::to_string(n));

        const std::string aq = path + ": nominal_dynamics_A[" + std::to_string(q) + "]";
        expect_array(j["nominal_dynamics_A"][q], aq, 2);
        const std::string bq = path + ": nominal_dynamics_b[" + std::to_string(q) + "]";
        expect_array(j["nominal_dynamics_b"][q], bq, 2);
        for (std::size_t dir = 0; dir < 2; ++dir) {
            const std::string ad = aq + "[" + std::to_string(dir) + "]";
            expect_array(j["nominal_dynamics_A"][q][dir], ad, n);
            Matrix m;
            for (std::size_t y = 0; y < n; ++y) {
                Vector row = json_doubles(j["nominal_dynamics_A"][q][dir][y],
                                          ad + "[" + std::to_string(y) + "]");
                if (row.size() != n)
                    throw SchemaViolation(ad + "[" + std::to_string(y) + "]: expected " +
                                          std::to_string(n) + " entries");
                m.push_back(std::move(row));
            }
            Vector v = json_doubles(j["nominal_dynamics_b"][q][dir],
                                    bq + "[" + std::to_string(dir) + "]");
            if (v.size() != n)
                throw SchemaViolation(bq + "[" + std::to_string(dir) + "]: expected " +
                                      std::to_string(n) + " entries");
            (dir == 0 ? A_lower : A_upper).push_back(std::move(m));
            (dir == 0 ? b_lower : b_upper).push_back(std::move(v));
        }
    }

    PwaInclusionDynamics dyn;
    try {
        dyn = make_pwa_inclusion_dynamics(regions, A_lower, A_upper, b_lower, b_upper, noise,
                                          true);
    } catch (const InconsistentBounds&) {
        throw;
    } catch (const Error& e) {
        throw SchemaViolation(path + ": " + e.what());
    }
    if (j.contains("descriptor")) {
        if (!j["descriptor"].is_string())
            throw SchemaViolation(path + ": descriptor: expected a string");
        dyn.descriptor = j["descriptor"].get<std::string>();
    }
    return dyn;
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

RunReport run(const ProblemSpec& spec, std::size_t threads) {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(static_cast<int>(threads));
#else
    (void)threads;
#endif
    RunReport report;
    report.system = spec.name.empty() ? system_kind_name(spec.system_flag) : spec.name;
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    auto seconds_since = [](clock::time_point from, clock::time_point to) {
        return std::chrono::duration<double>(to - from).count();
    };

    Partition partition;
    TransitionBounds bounds;
    double t_partition = 0.0, t_bounds = 0.0;
    if (!spec.probabilities_path.empty()) {
        auto t = clock::now();
        bounds = load_bounds(spec.probabilities_path);
        t_bounds = seconds_since(t, clock::now());

        t = clock::now();
        partition = rebuild_partition(bounds.partition);
        const std::string file = "probabilities file '" + spec.probabilities_path + "'";
        if (bounds.sigma != spec.sigma)
            throw SchemaViolation(file + ": sigma differs from the config");
        if (partition.space.low != spec.state_space.low ||
            partition.space.high != spec.state_space.high)
            throw SchemaViolation(file + ": state_space differs from the config");
        const Partition expected =
            mark_regions(partition, spec.initial_region, spec.unsafe_regions);
        if (expected.unsafe_cell_flags != partition.unsafe_cell_flags ||
            expected.initial_cell_indices != partition.initial_cell_indices)
            throw SchemaViolation(file +
                                  ": initial/unsafe cell markings differ from the config");
        if (!spec.epsilon.empty()) {
            const Partition from_epsilon = generate_partition(spec.state_space, spec.epsilon);
            if (from_epsilon.cells_per_dim != partition.cells_per_dim)
                throw SchemaViolation(file + ": epsilon implies a different grid");
        }
        t_partition = seconds_since(t, clock::now());
    } else {
        auto t = clock::now();
        partition = generate_partition(spec.state_space, spec.epsilon);
        partition = mark_regions(partition, spec.initial_region, spec.unsafe_regions);
        t_partition = seconds_since(t, clock::now());

        t = clock::now();
        if (spec.system_flag == SystemKind::linear) {
            const LinearDynamics lin =
                make_linear_dynamics(spec.A, spec.b, make_gaussian_noise(spec.sigma));
            bounds = compute_transition_bounds(lift_linear_to_inclusion(lin, partition),
                                               partition);
        } else {
            const PwaInclusionDynamics dyn = load_pwa_dynamics(spec.dynamics_path);
            if (dyn.noise.sigma != spec.sigma)
                throw SchemaViolation("dynamics file '" + spec.dynamics_path +
                                      "': sigma differs from the config");
            bounds = compute_transition_bounds(dyn, partition);
        }
        t_bounds = seconds_since(t, clock::now());
    }
    report.timings.emplace_back("partition", t_partition);
    report.timings.emplace_back("bounds", t_bounds);

    auto t = clock::now();
    CertificateResult cert;
    switch (spec.engine) {
        case Engine::dual:
            cert = synthesize_dual(bounds, partition, spec.time_horizon);
            break;
        case Engine::cegis:
            cert = synthesize_cegis(bounds, partition, spec.time_horizon, spec.cegis);
            break;
        case Engine::gd:
            cert = synthesize_gd(bounds, partition, spec.time_horizon, spec.gd);
            break;
    }
    report.timings.emplace_back("synthesis", seconds_since(t, clock::now()));

    // Independent re-check: the reported certificate must agree with a fresh
    // evaluation of the barrier against the bounds.
    t = clock::now();
    const EvaluationResult check = evaluate_certificate(cert.barrier, bounds, partition);
    if (check.eta != cert.eta || check.beta != cert.beta ||
        psafe(check.eta, check.beta, cert.horizon) != cert.p_safe)
        throw Error("validation: certificate re-check disagrees with the engine report");
    report.timings.emplace_back("validation", seconds_since(t, clock::now()));

    report.partition = describe_partition(partition);
    report.certificate = std::move(cert);
    report.epsilon_rounded = report.partition.epsilon_rounded;
    report.timings.emplace_back("total", seconds_since(t0, clock::now()));
    return report;
}

// ---------------------------------------------------------------------------
// Report renderings
// ---------------------------------------------------------------------------

std::string report_to_json(const RunReport& report, bool include_timings) {
    const CertificateResult& cert = report.certificate;
    ordered_json j;
    j["format"] = kReportFormat;
    j["version"] = kFormatVersion;
    j["system"] = report.system;
    j["engine"] = engine_name(cert.engine);
    j["horizon"] = cert.horizon;

    ordered_json part;
    part["num_cells"] = report.partition.unsafe_cell_flags.size();
    part["cells_per_dim"] = report.partition.cells_per_dim;
    ordered_json space;
    space["low"] = report.partition.space.low;
    space["high"] = report.partition.space.high;
    part["space"] = space;
    part["num_initial"] = report.partition.initial_cell_indices.size();
    part["num_unsafe"] = std::count(report.partition.unsafe_cell_flags.begin(),
                                    report.partition.unsafe_cell_flags.end(), true);
    j["partition"] = part;

    ordered_json c;
    c["eta"] = cert.eta;
    c["beta"] = cert.beta;
    c["objective"] = cert.objective();
    c["p_safe"] = cert.p_safe;
    c["iterations"] = cert.iterations;
    if (include_timings) c["wall_time_seconds"] = cert.wall_time_seconds;
    c["beta_per_region"] = cert.beta_per_region;
    c["barrier"] = cert.barrier.values;
    j["certificate"] = c;

    ordered_json meta;
    for (const auto& [key, value] : cert.metadata) meta[key] = value;
    j["metadata"] = meta;

    ordered_json flags;
    flags["epsilon_rounded"] = report.epsilon_rounded;
    flags["barrier_capped_at_one"] = true;
    j["flags"] = flags;

    if (include_timings) {
        ordered_json timings;
        for (const auto& [phase, secs] : report.timings) timings[phase] = secs;
        j["timings"] = timings;
    }
    return j.dump(2) + "\n";
}

std::string report_to_text(const RunReport& report) {
    const CertificateResult& cert = report.certificate;
    char buf[128];
    std::ostringstream out;
    out << "system:    " << report.system << "\n";
    out << "engine:    " << engine_name(cert.engine) << " (horizon " << cert.horizon << ")\n";
    out << "partition: " << report.partition.unsafe_cell_flags.size() << " cells (";
    for (std::size_t d = 0; d < report.partition.cells_per_dim.size(); ++d) {
        if (d) out << " x ";
        out << report.partition.cells_per_dim[d];
    }
    out << "), " << report.partition.initial_cell_indices.size() << " initial, "
        << std::count(report.partition.unsafe_cell_flags.begin(),
                      report.partition.unsafe_cell_flags.end(), true)
        << " unsafe\n";
    std::snprintf(buf, sizeof buf, "eta:       %.9g\n", cert.eta);
    out << buf;
    std::snprintf(buf, sizeof buf, "beta:      %.9g\n", cert.beta);
    out << buf;
    std::snprintf(buf, sizeof buf, "objective: %.9g (eta + %zu * beta)\n", cert.objective(),
                  cert.horizon);
    out << buf;
    std::snprintf(buf, sizeof buf, "P_s >=     %.9g\n", cert.p_safe);
    out << buf;
    out << "flags:     epsilon_rounded=" << (report.epsilon_rounded ? "yes" : "no")
        << ", barrier_capped_at_one=yes\n";
    out << "timings:  ";
    for (const auto& [phase, secs] : report.timings) {
        std::snprintf(buf, sizeof buf, " %s %.3fs", phase.c_str(), secs);
        out << buf;
    }
    out << "\n";
    if (!cert.metadata.empty()) {
        out << "metadata: ";
        bool first = true;
        for (const auto& [key, value] : cert.metadata) {
            out << (first ? " " : ", ") << key << "=" << value;
            first = false;
        }
        out << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Benchmark harness
// ---------------------------------------------------------------------------

std::vector<BenchmarkRow> run_benchmarks(const std::vector<ProblemSpec>& specs,
                                         const std::vector<Engine>& engines,
                                         std::size_t threads) {
    const std::vector<Engine> selected =
        engines.empty() ? std::vector<Engine>{Engine::dual, Engine::cegis, Engine::gd}
                        : engines;
    std::vector<BenchmarkRow> rows;
    rows.reserve(specs.size() * selected.size());
    for (const ProblemSpec& spec : specs) {
        for (Engine engine : selected) {
            ProblemSpec s = spec;
            s.engine = engine;
            BenchmarkRow row;
            row.system = s.name.empty() ? system_kind_name(s.system_flag) : s.name;
            row.engine = engine_name(engine);
            try {
                const RunReport rep = run(s, threads);
                row.num_cells = rep.partition.unsafe_cell_flags.size();
                row.tau_seconds = rep.timings.back().second;  // total
                for (const auto& [phase, secs] : rep.timings)
                    if (phase == "synthesis") row.tau_seconds = secs;
                row.eta = rep.certificate.eta;
                row.beta = rep.certificate.beta;
                row.p_safe = rep.certificate.p_safe;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::string benchmarks_to_table(const std::vector<BenchmarkRow>& rows) {
    const std::array<const char*, 7> head = {"system", "|Q|", "engine", "tau(s)",
                                             "eta",    "beta", "P_s"};
    std::vector<std::array<std::string, 7>> cells;
    std::vector<std::string> errors;
    char buf[64];
    for (const BenchmarkRow& row : rows) {
        std::array<std::string, 7> c;
        c[0] = row.system;
        c[2] = row.engine;
        if (row.ok()) {
            c[1] = std::to_string(row.num_cells);
            std::snprintf(buf, sizeof buf, "%.3f", row.tau_seconds);
            c[3] = buf;
            std::snprintf(buf, sizeof buf, "%.3e", row.eta);
            c[4] = buf;
            std::snprintf(buf, sizeof buf, "%.3e", row.beta);
            c[5] = buf;
            std::snprintf(buf, sizeof buf, "%.6f", row.p_safe);
            c[6] = buf;
            errors.emplace_back();
        } else {
            c[1] = c[3] = c[4] = c[5] = c[6] = "--";
            errors.push_back(row.error);
        }
        cells.push_back(std::move(c));
    }
    std::array<std::size_t, 7> width;
    for (std::size_t k = 0; k < 7; ++k) {
        width[k] = std::string(head[k]).size();
        for (const auto& c : cells) width[k] = std::max(width[k], c[k].size());
    }
    std::ostringstream out;
    auto emit = [&](const std::array<std::string, 7>& c, const std::string& err) {
        for (std::size_t k = 0; k < 7; ++k) {
            if (k) out << "  ";
            // Left-align the first three text columns, right-align numbers.
            if (k < 3)
                out << c[k] << std::string(width[k] - c[k].size(), ' ');
            else
                out << std::string(width[k] - c[k].size(), ' ') << c[k];
        }
        if (!err.empty()) out << "  error: " << err;
        out << "\n";
    };
    std::array<std::string, 7> h;
    for (std::size_t k = 0; k < 7; ++k) h[k] = head[k];
    emit(h, "");
    for (std::size_t i = 0; i < cells.size(); ++i) emit(cells[i], errors[i]);
    return out.str();
}

std::string benchmarks_to_csv(const std::vector<BenchmarkRow>& rows) {
    std::ostringstream out;
    out << "system,num_cells,engine,tau_seconds,p_safe\n";
    for (const BenchmarkRow& row : rows) {
        if (!row.ok()) continue;
        out << row.system << "," << row.num_cells << "," << row.engine << ","
            << fmt_double(row.tau_seconds) << "," << fmt_double(row.p_safe) << "\n";
    }
    return out.str();
}

}  // namespace pwcsbf
