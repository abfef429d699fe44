#pragma once

// Run configuration: a TOML subset or JSON file, overridden by dotted
// `--key value` pairs, validated before any computation starts.
//
// Supported TOML: comments, [table] and [a.b] headers, bare or quoted keys,
// dotted keys, basic strings with the usual escapes, literal strings,
// integers, floats (with exponent, inf, nan), booleans, arrays that may span
// lines, and one-line inline tables. Dates and arrays of tables are not.

#include "robinlap/grid.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace robinlap {

/// Throws config-invalid with the line number.
nlohmann::json parse_toml(std::string_view text);

/// .json files are JSON, everything else the TOML subset. Missing files are
/// io-error, malformed ones config-invalid.
nlohmann::json load_config_file(const std::filesystem::path& path);

/// Sets a dotted key; the value is read as a TOML value when it parses as one
/// and kept as a string otherwise.
void apply_override(nlohmann::json& config, std::string_view dotted_key, std::string_view value);

struct RunConfig {
    std::string command;

    int d = 2;
    int n = 64;
    double length = 8.0;
    double height = 2.0;
    int nd = 64;
    std::string geometry = "slab";

    std::string coefficient = "1";
    double p = 3.0;
    double t = 1.0 / 3.0;
    double percentile = 0.95;

    std::vector<cplx> lambdas;  // empty: use the certified lambda0
    std::string method = "automatic";
    std::string factorization = "factored";
    double tolerance = 1e-10;
    int max_iterations = 500;
    int restart = 40;
    int norm_iterations = 30;
    double residual_threshold = 1e-8;
    /// Boundary profile of the right-hand side, multiplied by 1 + cos(pi z / H).
    std::string rhs = "exp(-r^2)";

    std::uint64_t seed = 1;
    std::string output;  // empty: environment default
    int workers = 0;     // 0: OpenMP default

    int triple_n = 20;
    int triple_trials = 20;

    std::vector<int> oracle_grids{128, 256, 512};

    std::vector<int> sweep_grids{64, 128, 256};
    int samples = 128;
    double lemma32_p = 1.5;
    double lemma32_s = 0.5;
    double lemma33_t = 2.0 / 3.0;
    double lemma35_s = 0.5;
    double lemma35_eps = 0.1;

    nlohmann::json source;  // merged input, echoed into the manifest
};

/// Reads and validates; throws config-invalid naming the offending key.
RunConfig parse_run_config(const nlohmann::json& config);

/// Every resolved field, in the same layout as the input file.
nlohmann::json to_json(const RunConfig& c);

} // namespace robinlap
