#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "robustq/distributions.hpp"
#include "robustq/robust_objective.hpp"
#include "robustq/utility.hpp"
#include "robustq/vi_solver.hpp"

namespace robustq {

struct MarketConfig {
    double r = 0.02;
    double theta = 0.25;
    double T = 1.0;
    bool operator==(const MarketConfig&) const = default;
};

struct ClaimConfig {
    std::string kind = "uniform";  // uniform | truncated_normal | constant
    double y = 2.0;
    double mu = 1.0;
    double sigma = 0.5;
    double a = 0.0;
    double b = 2.0;
    double value = 0.0;
    // Compares only the fields the kind uses.
    bool operator==(const ClaimConfig& other) const;
};

struct UtilityConfig {
    std::vector<double> c{950.0, 950.0};
    std::vector<double> gamma{0.010, 0.012};
    bool operator==(const UtilityConfig&) const = default;
};

struct NumericsConfig {
    int grid_N = 4000;  // intervals
    double eps_p = 1e-6;
    double tolerance = 1e-6;
    double ode_tolerance = 1e-5;
    std::string mode = "active-set";
    int rho_points = 2001;
    bool refine = true;
    bool operator==(const NumericsConfig&) const = default;
};

struct OutputConfig {
    std::string directory = "out";
    std::string format = "csv";
    bool operator==(const OutputConfig&) const = default;
};

struct SolveConfig {
    MarketConfig market;
    ClaimConfig claim;
    UtilityConfig utility;
    double alpha = 0.25;
    std::optional<double> x;       // endowment
    std::optional<double> lambda;  // multiplier
    NumericsConfig numerics;
    OutputConfig output;

    bool operator==(const SolveConfig&) const = default;

    LognormalKernel kernel() const;
    Claim make_claim() const;
    UtilitySpec make_utility() const;
    RobustObjective objective() const;
    SolverSettings settings() const;
};

// Throws ConfigError with a message naming the offending field.
void validate(const SolveConfig& cfg);

SolveConfig parse_config(const nlohmann::json& doc);
SolveConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const SolveConfig& cfg);

// Sets one parameter from its textual value. Names: r, theta, T, alpha, x, lambda,
// y, mu, sigma, a, b, value, c, gamma. Pairs (c, gamma) are written "v1:v2".
void apply_parameter(SolveConfig& cfg, const std::string& name, const std::string& value);

// Locale-independent strict decimal parse.
double parse_number(const std::string& text);

}  // namespace robustq
